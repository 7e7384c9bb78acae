#pragma once

#include <algorithm>
#include <cmath>
#include <string_view>
#include <vector>

#include <Eigen/Core>

#include "stable_tmle/errors.hpp"
#include "stable_tmle/numkit.hpp"

namespace stable_tmle {

enum class FitStatus {
  kConverged,
  kMaxIterations,
  kStalled,              // no score decrease even at the smallest step length
  kSingularInformation,  // information matrix not positive definite
};

std::string_view to_string(FitStatus status);

template <int D>
struct ScoringEvaluation {
  Eigen::Matrix<double, D, 1> score;
  Eigen::Matrix<double, D, D> info;
  double ridge = 0.0;
};

template <int D>
struct IterationRecord {
  Eigen::Matrix<double, D, 1> theta;
  double score_norm = 0.0;
  double delta = 0.0;  // 0 for the starting point
};

template <int D>
struct ScoringOptions {
  int max_iter = 200;
  double tol_step = 1e-8;
  double tol_score = 1e-8;
  double min_delta = 1.0 / 64.0;
  Eigen::Matrix<double, D, 1> lower;
  Eigen::Matrix<double, D, 1> upper;
};

template <int D>
struct ScoringOutcome {
  Eigen::Matrix<double, D, 1> theta;
  ScoringEvaluation<D> eval;
  int iterations = 0;
  bool converged = false;
  FitStatus status = FitStatus::kMaxIterations;
  std::vector<IterationRecord<D>> trace;
  int ridge_events = 0;
  bool at_boundary = false;
};

namespace detail {

/// Components sitting on a bound whose score points out of the box.
template <int D>
Eigen::Array<bool, D, 1> active_bounds(const Eigen::Matrix<double, D, 1>& theta,
                                       const Eigen::Matrix<double, D, 1>& score,
                                       const ScoringOptions<D>& opt) {
  return ((theta.array() <= opt.lower.array()) && (score.array() < 0.0)) ||
         ((theta.array() >= opt.upper.array()) && (score.array() > 0.0));
}

template <int D>
Eigen::Matrix<double, D, 1> projected_score(const Eigen::Matrix<double, D, 1>& theta,
                                            const Eigen::Matrix<double, D, 1>& score,
                                            const ScoringOptions<D>& opt) {
  return active_bounds<D>(theta, score, opt).select(0.0, score);
}

template <int D>
struct Direction {
  Eigen::Matrix<double, D, 1> step = Eigen::Matrix<double, D, 1>::Zero();
  double merit = 0.0;  // sqrt(S_f^T I_ff^{-1} S_f) over the free components
};

/// Scoring step restricted to the free components. Throws NotPositiveDefinite
/// when the free block of the information is singular.
template <int D>
Direction<D> scoring_direction(const Eigen::Matrix<double, D, 1>& theta,
                               const ScoringEvaluation<D>& e, const ScoringOptions<D>& opt) {
  const auto active = active_bounds<D>(theta, e.score, opt);
  std::vector<Eigen::Index> free;
  for (Eigen::Index i = 0; i < D; ++i) {
    if (!active(i)) free.push_back(i);
  }
  Direction<D> d;
  if (free.empty()) return d;
  const auto f = static_cast<Eigen::Index>(free.size());
  Eigen::MatrixXd info(f, f);
  Eigen::VectorXd s(f);
  for (Eigen::Index a = 0; a < f; ++a) {
    s(a) = e.score(free[a]);
    for (Eigen::Index b = 0; b < f; ++b) info(a, b) = e.info(free[a], free[b]);
  }
  const Eigen::VectorXd step = spd_solve(spd_factor(info, 1e-12), s);
  for (Eigen::Index a = 0; a < f; ++a) d.step(free[a]) = step(a);
  d.merit = std::sqrt(std::max(0.0, s.dot(step)));
  return d;
}

}  // namespace detail

/// Fisher scoring with step halving and box projection.
///
/// theta <- clamp(theta + delta I(theta)^{-1} S(theta)) with delta starting at 1
/// and halved while the information-weighted score norm sqrt(S^T I^{-1} S) does
/// not decrease, down to min_delta. Components on a bound whose score points
/// outward are held fixed and left out of both the step and the score norm.
/// Stops when the max-norm of that projected score is at most tol_score, when
/// the projected full step is at most tol_step in max-norm, or after max_iter
/// accepted steps. A step that fails to decrease the norm at min_delta ends the
/// run as kStalled. `evaluate(theta)` returns score and information; a
/// FactorizationFailure at a trial point rejects that trial, at the starting
/// point it propagates.
template <int D, class EvalFn>
ScoringOutcome<D> run_scoring(EvalFn&& evaluate, Eigen::Matrix<double, D, 1> start,
                              const ScoringOptions<D>& opt) {
  using Vec = Eigen::Matrix<double, D, 1>;
  auto clamp = [&opt](const Vec& v) -> Vec { return v.cwiseMax(opt.lower).cwiseMin(opt.upper); };
  auto score_norm = [&opt](const Vec& th, const ScoringEvaluation<D>& e) {
    return detail::projected_score<D>(th, e.score, opt).cwiseAbs().maxCoeff();
  };

  ScoringOutcome<D> out;
  out.theta = clamp(start);
  out.eval = evaluate(out.theta);
  if (out.eval.ridge > 0.0) ++out.ridge_events;
  double norm = score_norm(out.theta, out.eval);
  out.trace.push_back({out.theta, norm, 0.0});

  out.status = FitStatus::kMaxIterations;
  while (true) {
    if (norm <= opt.tol_score) {
      out.converged = true;
      out.status = FitStatus::kConverged;
      break;
    }
    if (out.iterations >= opt.max_iter) break;

    detail::Direction<D> dir;
    try {
      dir = detail::scoring_direction<D>(out.theta, out.eval, opt);
    } catch (const NotPositiveDefinite&) {
      out.status = FitStatus::kSingularInformation;
      break;
    }

    const Vec full = clamp(out.theta + dir.step);
    if ((full - out.theta).cwiseAbs().maxCoeff() <= opt.tol_step) {
      try {
        ScoringEvaluation<D> e = evaluate(full);
        if (e.ridge > 0.0) ++out.ridge_events;
        out.theta = full;
        out.eval = std::move(e);
        norm = score_norm(out.theta, out.eval);
        ++out.iterations;
        out.trace.push_back({out.theta, norm, 1.0});
        out.converged = true;
        out.status = FitStatus::kConverged;
      } catch (const FactorizationFailure&) {
        out.status = FitStatus::kStalled;
      }
      break;
    }

    bool accepted = false;
    for (double delta = 1.0; delta >= opt.min_delta; delta *= 0.5) {
      const Vec cand = clamp(out.theta + delta * dir.step);
      ScoringEvaluation<D> e;
      double cand_merit = 0.0;
      try {
        e = evaluate(cand);
        cand_merit = detail::scoring_direction<D>(cand, e, opt).merit;
      } catch (const FactorizationFailure&) {
        continue;
      } catch (const NotPositiveDefinite&) {
        continue;
      }
      if (e.ridge > 0.0) ++out.ridge_events;
      if (cand_merit < dir.merit) {
        out.theta = cand;
        out.eval = std::move(e);
        norm = score_norm(out.theta, out.eval);
        ++out.iterations;
        out.trace.push_back({out.theta, norm, delta});
        accepted = true;
        break;
      }
    }
    if (!accepted) {
      out.status = FitStatus::kStalled;
      break;
    }
  }

  out.at_boundary =
      ((out.theta - opt.lower).array() == 0.0).any() || ((out.theta - opt.upper).array() == 0.0).any();
  return out;
}

}  // namespace stable_tmle
