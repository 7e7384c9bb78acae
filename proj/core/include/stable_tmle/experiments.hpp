#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "stable_tmle/estimators.hpp"
#include "stable_tmle/ou_model.hpp"
#include "stable_tmle/sampling.hpp"

namespace stable_tmle {

enum class Mode { kSample, kFit, kSimOu, kFitOu, kMonteCarlo, kMonteCarloOu };
enum class EstimatorKind { kTmle, kExplicitGmm, kPreliminary };

std::string to_string(Mode mode);
std::string to_string(EstimatorKind kind);
Mode parse_mode(const std::string& text);
EstimatorKind parse_estimator(const std::string& text);

struct GridSpec {
  double start = 0.01;
  double step = 0.05;
  int k = 101;

  Grid build() const { return equidistant_grid(start, step, k); }
};

struct ExperimentConfig {
  Mode mode = Mode::kMonteCarlo;
  std::optional<StableParams> theta0;
  std::optional<OUParams> ou;
  std::size_t n = 1000;
  double h = 0.1;
  std::size_t reps = 1;
  std::uint64_t seed = 42;
  std::optional<GridSpec> grid;  // default depends on the mode
  std::vector<EstimatorKind> estimators{EstimatorKind::kTmle};
  std::string out_dir = ".";
  std::string data_path;          // input for fit / fit-ou
  std::size_t lambda_star_trim = 0;  // smallest lambda* values dropped in the trimmed summary
  int max_iter = 200;

  /// Throws ConfigError when a field required by the mode is missing or invalid.
  void validate() const;
  GridSpec resolved_grid() const;
};

/// Applies key=value settings (keys as in the config file: mode, theta0, ou, n,
/// h, reps, seed, grid, estimator, out, data, trim, max_iter) on top of `base`.
ExperimentConfig apply_settings(ExperimentConfig base,
                                const std::map<std::string, std::string>& settings);

/// Reads a key=value file; blank lines and lines starting with '#' are skipped.
std::map<std::string, std::string> read_config_file(const std::string& path);

/// Resolved configuration as key=value lines, readable by read_config_file.
std::string echo_config(const ExperimentConfig& cfg);

struct SummaryStats {
  std::size_t count = 0;
  double mean = 0.0;
  double sd = 0.0;    // denominator r - 1
  double skew = 0.0;  // m3 / m2^{3/2}, central moments with denominator r
  double kurt = 0.0;  // m4 / m2^2 (Gaussian = 3); NaN when m2 == 0
};

SummaryStats summarize(std::span<const double> values);

/// Drops the `trim` smallest values before summarizing.
SummaryStats summarize_trimmed(std::span<const double> values, std::size_t trim);

struct ReplicationRow {
  std::size_t rep = 0;
  std::uint64_t stream_id = 0;
  std::string estimator;
  std::vector<double> estimate;    // parameter order of the report
  std::vector<double> std_errors;  // NaN when unavailable
  int iterations = 0;
  bool converged = false;
  std::string status;              // FitStatus name, or "error"
  double score_norm = 0.0;
  double integrated_square = 0.0;  // OU only
  double lambda_star = 0.0;        // OU only
};

struct SummaryRow {
  std::string estimator;
  std::string parameter;
  std::string variant;  // "all" or "trimmed"
  SummaryStats stats;
};

struct ReplicationReport {
  bool ou = false;
  std::vector<std::string> parameters;
  std::vector<ReplicationRow> rows;
  std::vector<SummaryRow> summary;
  std::vector<std::string> errors;  // one diagnostic per failed replication
};

/// Worker count: STABLE_TMLE_THREADS if set (>= 1), otherwise the hardware
/// concurrency, never more than `jobs`.
unsigned worker_count(std::size_t jobs);

/// Fits every configured estimator to `data` and returns one row per estimator.
std::vector<ReplicationRow> fit_rows(std::span<const double> data, const ExperimentConfig& cfg,
                                     std::size_t rep, std::uint64_t stream_id);

/// Monte Carlo over i.i.d. samples. Replication i draws its sample from
/// RngStream::for_replication(seed, i); rows come back sorted by replication.
ReplicationReport run_montecarlo(const ExperimentConfig& cfg, unsigned workers);

/// Monte Carlo over OU paths with lambda* columns.
ReplicationReport run_montecarlo_ou(const ExperimentConfig& cfg, unsigned workers);

/// Summary rows recomputed from report.rows.
std::vector<SummaryRow> summarize_rows(const ReplicationReport& report,
                                       std::size_t lambda_star_trim);

void write_rows_csv(std::ostream& os, const ReplicationReport& report);
void write_summary_csv(std::ostream& os, const ReplicationReport& report);
/// Inverse of write_rows_csv.
ReplicationReport read_rows_csv(std::istream& is);

/// Reads one number per line (last comma-separated field); lines that do not
/// parse, including headers and '#' comments, are skipped.
std::vector<double> read_series(const std::string& path);

/// Executes the configured mode and writes its files under cfg.out_dir:
/// rows.csv, summary.csv (Monte Carlo modes), samples.csv / path.csv
/// (sampling modes) and config.txt. Returns the process exit code.
int run(const ExperimentConfig& cfg, std::ostream& log);

std::string format_double(double v);

}  // namespace stable_tmle
