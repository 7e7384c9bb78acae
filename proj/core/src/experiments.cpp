#include "stable_tmle/experiments.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <limits>
#include <sstream>
#include <thread>

#include "stable_tmle/errors.hpp"

namespace stable_tmle {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

const std::vector<std::string> kIidParameters{"mu", "sigma", "alpha", "beta"};
const std::vector<std::string> kOuParameters{"alpha", "sigma", "lambda"};

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string item;
  std::istringstream is(s);
  while (std::getline(is, item, sep)) out.push_back(trim(item));
  if (!s.empty() && s.back() == sep) out.emplace_back();
  return out;
}

double parse_double(const std::string& text, const std::string& key) {
  if (text == "NA") return kNaN;
  char* end = nullptr;
  const double v = std::strtod(text.c_str(), &end);
  if (text.empty() || end != text.c_str() + text.size()) {
    throw ConfigError("cannot parse '" + text + "' as a number for " + key);
  }
  return v;
}

std::uint64_t parse_unsigned(const std::string& text, const std::string& key) {
  if (text.empty() || text.find_first_not_of("0123456789") != std::string::npos) {
    throw ConfigError("cannot parse '" + text + "' as a nonnegative integer for " + key);
  }
  return std::stoull(text);
}

std::vector<double> parse_list(const std::string& text, std::size_t expected,
                               const std::string& key) {
  const auto parts = split(text, ',');
  if (parts.size() != expected) {
    throw ConfigError(key + " expects " + std::to_string(expected) + " comma-separated values");
  }
  std::vector<double> out;
  for (const auto& p : parts) out.push_back(parse_double(p, key));
  return out;
}

std::vector<double> nan_vector(std::size_t n) { return std::vector<double>(n, kNaN); }

FitConfig fit_config(const ExperimentConfig& cfg) {
  FitConfig fc;
  fc.grid = cfg.resolved_grid().build();
  fc.max_iter = cfg.max_iter;
  return fc;
}

OUFitConfig ou_fit_config(const ExperimentConfig& cfg) {
  OUFitConfig fc;
  fc.grid = cfg.resolved_grid().build();
  fc.max_iter = cfg.max_iter;
  return fc;
}

std::vector<double> to_std(const Eigen::VectorXd& v) {
  return std::vector<double>(v.data(), v.data() + v.size());
}

ReplicationRow row_from_fit(const FitResult& r, std::size_t rep, std::uint64_t stream,
                            EstimatorKind kind) {
  ReplicationRow row;
  row.rep = rep;
  row.stream_id = stream;
  row.estimator = to_string(kind);
  row.estimate = to_std(r.theta_hat.to_vector());
  row.std_errors = to_std(r.std_errors);
  row.iterations = r.iterations;
  row.converged = r.converged;
  row.status = std::string(to_string(r.status));
  row.score_norm = r.final_score_norm;
  return row;
}

ReplicationRow error_row(std::size_t rep, std::uint64_t stream, const std::string& estimator,
                         std::size_t dim) {
  ReplicationRow row;
  row.rep = rep;
  row.stream_id = stream;
  row.estimator = estimator;
  row.estimate = nan_vector(dim);
  row.std_errors = nan_vector(dim);
  row.status = "error";
  row.score_norm = kNaN;
  return row;
}

// Runs job(i) for i in [0, jobs) on `workers` threads.
void parallel_for(std::size_t jobs, unsigned workers, const std::function<void(std::size_t)>& job) {
  if (workers <= 1 || jobs <= 1) {
    for (std::size_t i = 0; i < jobs; ++i) job(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::jthread> pool;
  pool.reserve(workers);
  for (unsigned w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      for (std::size_t i = next++; i < jobs; i = next++) job(i);
    });
  }
}

std::string csv_bool(bool b) { return b ? "1" : "0"; }

void write_header_comment(std::ostream& os, const std::string& kind) {
  os << "# stable_tmle " << kind << " v1\n";
}

void ensure_open(const std::ofstream& os, const std::filesystem::path& p) {
  if (!os) throw Error("cannot open " + p.string() + " for writing");
}

}  // namespace

std::string format_double(double v) {
  if (std::isnan(v)) return "NA";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string to_string(Mode mode) {
  switch (mode) {
    case Mode::kSample:
      return "sample";
    case Mode::kFit:
      return "fit";
    case Mode::kSimOu:
      return "sim-ou";
    case Mode::kFitOu:
      return "fit-ou";
    case Mode::kMonteCarlo:
      return "montecarlo";
    case Mode::kMonteCarloOu:
      return "montecarlo-ou";
  }
  return "unknown";
}

std::string to_string(EstimatorKind kind) {
  switch (kind) {
    case EstimatorKind::kTmle:
      return "tmle";
    case EstimatorKind::kExplicitGmm:
      return "explicit-gmm";
    case EstimatorKind::kPreliminary:
      return "preliminary";
  }
  return "unknown";
}

Mode parse_mode(const std::string& text) {
  for (Mode m : {Mode::kSample, Mode::kFit, Mode::kSimOu, Mode::kFitOu, Mode::kMonteCarlo,
                 Mode::kMonteCarloOu}) {
    if (to_string(m) == text) return m;
  }
  throw ConfigError("unknown mode '" + text + "'");
}

EstimatorKind parse_estimator(const std::string& text) {
  for (EstimatorKind k :
       {EstimatorKind::kTmle, EstimatorKind::kExplicitGmm, EstimatorKind::kPreliminary}) {
    if (to_string(k) == text) return k;
  }
  throw ConfigError("unknown estimator '" + text + "'");
}

GridSpec ExperimentConfig::resolved_grid() const {
  if (grid) return *grid;
  if (mode == Mode::kSimOu || mode == Mode::kFitOu || mode == Mode::kMonteCarloOu) {
    return GridSpec{0.05, 0.05, 101};
  }
  return GridSpec{0.01, 0.05, 101};
}

void ExperimentConfig::validate() const {
  const bool needs_theta = mode == Mode::kSample || mode == Mode::kMonteCarlo;
  const bool needs_ou = mode == Mode::kSimOu || mode == Mode::kMonteCarloOu;
  const bool needs_data = mode == Mode::kFit || mode == Mode::kFitOu;
  const bool ou_mode = mode == Mode::kSimOu || mode == Mode::kFitOu || mode == Mode::kMonteCarloOu;
  if (needs_theta) {
    if (!theta0) throw ConfigError(to_string(mode) + " requires theta0 (mu,sigma,alpha,beta)");
    if (!theta0->valid()) throw ConfigError("theta0 is outside the parameter space");
  }
  if (needs_ou) {
    if (!ou) throw ConfigError(to_string(mode) + " requires ou (alpha,sigma,lambda)");
    if (!ou->valid()) throw ConfigError("ou parameters are outside the parameter space");
  }
  if (needs_data && data_path.empty()) throw ConfigError(to_string(mode) + " requires data");
  if (reps < 1) throw ConfigError("reps must be at least 1");
  if (!needs_data && n < 1) throw ConfigError("n must be at least 1");
  if (mode == Mode::kMonteCarlo && n < 20) throw ConfigError("montecarlo needs n >= 20");
  if (ou_mode && !(h > 0.0)) throw ConfigError("h must be positive");
  if ((mode == Mode::kSimOu || mode == Mode::kMonteCarloOu) && n < 2) {
    throw ConfigError("OU paths need n >= 2");
  }
  if (mode == Mode::kMonteCarloOu && n < 21) throw ConfigError("montecarlo-ou needs n >= 21");
  if (estimators.empty()) throw ConfigError("at least one estimator is required");
  if (max_iter < 0) throw ConfigError("max_iter must be nonnegative");
  try {
    (void)resolved_grid().build();
  } catch (const InvalidArgument& e) {
    throw ConfigError(std::string("invalid grid: ") + e.what());
  }
}

ExperimentConfig apply_settings(ExperimentConfig cfg,
                                const std::map<std::string, std::string>& settings) {
  for (const auto& [raw_key, raw_value] : settings) {
    const std::string key = trim(raw_key);
    const std::string value = trim(raw_value);
    if (key == "mode") {
      cfg.mode = parse_mode(value);
    } else if (key == "theta0") {
      const auto v = parse_list(value, 4, key);
      cfg.theta0 = StableParams{v[0], v[1], v[2], v[3]};
    } else if (key == "ou") {
      const auto v = parse_list(value, 3, key);
      cfg.ou = OUParams{v[0], v[1], v[2]};
    } else if (key == "n") {
      cfg.n = parse_unsigned(value, key);
    } else if (key == "h") {
      cfg.h = parse_double(value, key);
    } else if (key == "reps") {
      cfg.reps = parse_unsigned(value, key);
    } else if (key == "seed") {
      cfg.seed = parse_unsigned(value, key);
    } else if (key == "grid") {
      const auto v = parse_list(value, 3, key);
      if (v[2] < 1 || v[2] != std::floor(v[2])) throw ConfigError("grid k must be a positive integer");
      cfg.grid = GridSpec{v[0], v[1], static_cast<int>(v[2])};
    } else if (key == "estimator") {
      cfg.estimators.clear();
      for (const auto& e : split(value, ',')) cfg.estimators.push_back(parse_estimator(e));
    } else if (key == "out") {
      cfg.out_dir = value;
    } else if (key == "data") {
      cfg.data_path = value;
    } else if (key == "trim") {
      cfg.lambda_star_trim = parse_unsigned(value, key);
    } else if (key == "max_iter") {
      cfg.max_iter = static_cast<int>(parse_unsigned(value, key));
    } else {
      throw ConfigError("unknown configuration key '" + key + "'");
    }
  }
  return cfg;
}

std::map<std::string, std::string> read_config_file(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw ConfigError("cannot open config file " + path);
  std::map<std::string, std::string> out;
  std::string line;
  int lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    const std::string t = trim(line);
    if (t.empty() || t[0] == '#') continue;
    const auto eq = t.find('=');
    if (eq == std::string::npos) {
      throw ConfigError(path + ":" + std::to_string(lineno) + ": expected key=value");
    }
    out[trim(t.substr(0, eq))] = trim(t.substr(eq + 1));
  }
  return out;
}

std::string echo_config(const ExperimentConfig& cfg) {
  std::ostringstream os;
  os << "mode=" << to_string(cfg.mode) << "\n";
  if (cfg.theta0) {
    os << "theta0=" << format_double(cfg.theta0->mu) << "," << format_double(cfg.theta0->sigma)
       << "," << format_double(cfg.theta0->alpha) << "," << format_double(cfg.theta0->beta)
       << "\n";
  }
  if (cfg.ou) {
    os << "ou=" << format_double(cfg.ou->alpha) << "," << format_double(cfg.ou->sigma) << ","
       << format_double(cfg.ou->lambda) << "\n";
  }
  os << "n=" << cfg.n << "\n";
  os << "h=" << format_double(cfg.h) << "\n";
  os << "reps=" << cfg.reps << "\n";
  os << "seed=" << cfg.seed << "\n";
  const GridSpec g = cfg.resolved_grid();
  os << "grid=" << format_double(g.start) << "," << format_double(g.step) << "," << g.k << "\n";
  os << "estimator=";
  for (std::size_t i = 0; i < cfg.estimators.size(); ++i) {
    os << (i ? "," : "") << to_string(cfg.estimators[i]);
  }
  os << "\n";
  os << "out=" << cfg.out_dir << "\n";
  if (!cfg.data_path.empty()) os << "data=" << cfg.data_path << "\n";
  os << "trim=" << cfg.lambda_star_trim << "\n";
  os << "max_iter=" << cfg.max_iter << "\n";
  return os.str();
}

SummaryStats summarize(std::span<const double> values) {
  SummaryStats s;
  s.count = values.size();
  if (values.empty()) {
    s.mean = s.sd = s.skew = s.kurt = kNaN;
    return s;
  }
  const double r = static_cast<double>(values.size());
  double sum = 0.0;
  for (double v : values) sum += v;
  s.mean = sum / r;
  double m2 = 0.0;
  double m3 = 0.0;
  double m4 = 0.0;
  for (double v : values) {
    const double d = v - s.mean;
    const double d2 = d * d;
    m2 += d2;
    m3 += d2 * d;
    m4 += d2 * d2;
  }
  s.sd = values.size() >= 2 ? std::sqrt(m2 / (r - 1.0)) : kNaN;
  m2 /= r;
  m3 /= r;
  m4 /= r;
  if (m2 > 0.0) {
    s.skew = m3 / std::pow(m2, 1.5);
    s.kurt = m4 / (m2 * m2);
  } else {
    s.skew = kNaN;
    s.kurt = kNaN;
  }
  return s;
}

SummaryStats summarize_trimmed(std::span<const double> values, std::size_t trim) {
  std::vector<double> sorted(values.begin(), values.end());
  std::sort(sorted.begin(), sorted.end());
  const std::size_t drop = std::min(trim, sorted.size());
  return summarize(std::span<const double>(sorted).subspan(drop));
}

unsigned worker_count(std::size_t jobs) {
  unsigned workers = std::max(1u, std::thread::hardware_concurrency());
  if (const char* env = std::getenv("STABLE_TMLE_THREADS")) {
    const long v = std::strtol(env, nullptr, 10);
    if (v >= 1) workers = static_cast<unsigned>(v);
  }
  if (jobs < workers) workers = static_cast<unsigned>(std::max<std::size_t>(1, jobs));
  return workers;
}

std::vector<ReplicationRow> fit_rows(std::span<const double> data, const ExperimentConfig& cfg,
                                     std::size_t rep, std::uint64_t stream_id) {
  const FitConfig fc = fit_config(cfg);
  std::vector<ReplicationRow> rows;
  for (EstimatorKind kind : cfg.estimators) {
    switch (kind) {
      case EstimatorKind::kTmle:
        rows.push_back(row_from_fit(tml_fit(data, fc), rep, stream_id, kind));
        break;
      case EstimatorKind::kExplicitGmm: {
        const StableParams w = fc.box.clamp(preliminary_estimate(data));
        rows.push_back(row_from_fit(explicit_gmm_fit(data, fc, w, w), rep, stream_id, kind));
        break;
      }
      case EstimatorKind::kPreliminary: {
        ReplicationRow row;
        row.rep = rep;
        row.stream_id = stream_id;
        row.estimator = to_string(kind);
        row.estimate = to_std(preliminary_estimate(data).to_vector());
        row.std_errors = nan_vector(4);
        row.converged = true;
        row.status = "closed_form";
        row.score_norm = kNaN;
        rows.push_back(std::move(row));
        break;
      }
    }
  }
  return rows;
}

ReplicationReport run_montecarlo(const ExperimentConfig& cfg, unsigned workers) {
  cfg.validate();
  if (!cfg.theta0) throw ConfigError("montecarlo requires theta0");
  ReplicationReport report;
  report.parameters = kIidParameters;
  std::vector<std::vector<ReplicationRow>> per_rep(cfg.reps);
  std::vector<std::string> diag(cfg.reps);

  parallel_for(cfg.reps, workers, [&](std::size_t i) {
    RngStream rng = RngStream::for_replication(cfg.seed, i);
    const std::uint64_t stream = rng.stream_id();
    try {
      const std::vector<double> data = sample_stable(cfg.n, *cfg.theta0, rng);
      per_rep[i] = fit_rows(data, cfg, i, stream);
    } catch (const std::exception& e) {
      per_rep[i].clear();
      for (EstimatorKind k : cfg.estimators) {
        per_rep[i].push_back(error_row(i, stream, to_string(k), 4));
      }
      diag[i] = "replication " + std::to_string(i) + ": " + e.what();
    }
  });

  for (std::size_t i = 0; i < cfg.reps; ++i) {
    for (auto& row : per_rep[i]) report.rows.push_back(std::move(row));
    if (!diag[i].empty()) report.errors.push_back(diag[i]);
  }
  report.summary = summarize_rows(report, cfg.lambda_star_trim);
  return report;
}

ReplicationReport run_montecarlo_ou(const ExperimentConfig& cfg, unsigned workers) {
  cfg.validate();
  if (!cfg.ou) throw ConfigError("montecarlo-ou requires ou parameters");
  ReplicationReport report;
  report.ou = true;
  report.parameters = kOuParameters;
  std::vector<ReplicationRow> rows(cfg.reps);
  std::vector<std::string> diag(cfg.reps);
  const OUFitConfig fc = ou_fit_config(cfg);

  parallel_for(cfg.reps, workers, [&](std::size_t i) {
    RngStream rng = RngStream::for_replication(cfg.seed, i);
    const std::uint64_t stream = rng.stream_id();
    try {
      const OUPath path = sample_ou_path(*cfg.ou, cfg.h, cfg.n, rng);
      const OUFitResult r = tcml_fit(path, fc);
      ReplicationRow row;
      row.rep = i;
      row.stream_id = stream;
      row.estimator = "tcmle";
      row.estimate = to_std(r.theta_hat.to_vector());
      row.std_errors = to_std(r.std_errors);
      row.iterations = r.iterations;
      row.converged = r.converged;
      row.status = std::string(to_string(r.status));
      row.score_norm = r.final_score_norm;
      row.integrated_square = integrated_square(path);
      rows[i] = std::move(row);
    } catch (const std::exception& e) {
      rows[i] = error_row(i, stream, "tcmle", 3);
      rows[i].integrated_square = kNaN;
      diag[i] = "replication " + std::to_string(i) + ": " + e.what();
    }
  });

  std::vector<double> lambdas;
  std::vector<double> ws;
  std::vector<std::size_t> ok;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (rows[i].status == "error") {
      rows[i].lambda_star = kNaN;
      continue;
    }
    ok.push_back(i);
    lambdas.push_back(rows[i].estimate[OUParams::kLambda]);
    ws.push_back(rows[i].integrated_square);
  }
  for (std::size_t j = 0; j < ok.size(); ++j) {
    rows[ok[j]].lambda_star = ok.size() >= 2 ? lambda_star(lambdas, ws, j) : kNaN;
  }

  report.rows = std::move(rows);
  for (const auto& d : diag) {
    if (!d.empty()) report.errors.push_back(d);
  }
  report.summary = summarize_rows(report, cfg.lambda_star_trim);
  return report;
}

std::vector<SummaryRow> summarize_rows(const ReplicationReport& report,
                                       std::size_t lambda_star_trim) {
  std::vector<std::string> estimators;
  for (const auto& row : report.rows) {
    if (std::find(estimators.begin(), estimators.end(), row.estimator) == estimators.end()) {
      estimators.push_back(row.estimator);
    }
  }
  std::vector<SummaryRow> out;
  for (const auto& est : estimators) {
    std::vector<std::vector<double>> cols(report.parameters.size());
    std::vector<double> lstar;
    for (const auto& row : report.rows) {
      if (row.estimator != est || row.status == "error") continue;
      for (std::size_t j = 0; j < cols.size(); ++j) cols[j].push_back(row.estimate[j]);
      if (report.ou) lstar.push_back(row.lambda_star);
    }
    for (std::size_t j = 0; j < cols.size(); ++j) {
      out.push_back({est, report.parameters[j], "all", summarize(cols[j])});
    }
    if (report.ou) {
      out.push_back({est, "lambda_star", "all", summarize(lstar)});
      out.push_back({est, "lambda_star", "trimmed", summarize_trimmed(lstar, lambda_star_trim)});
    }
  }
  return out;
}

void write_rows_csv(std::ostream& os, const ReplicationReport& report) {
  write_header_comment(os, report.ou ? "ou-rows" : "rows");
  os << "rep,stream_id,estimator";
  for (const auto& p : report.parameters) os << "," << p;
  for (const auto& p : report.parameters) os << ",se_" << p;
  os << ",iterations,converged,status,score_norm";
  if (report.ou) os << ",W,lambda_star";
  os << "\n";
  for (const auto& row : report.rows) {
    os << row.rep << "," << row.stream_id << "," << row.estimator;
    for (double v : row.estimate) os << "," << format_double(v);
    for (double v : row.std_errors) os << "," << format_double(v);
    os << "," << row.iterations << "," << csv_bool(row.converged) << "," << row.status << ","
       << format_double(row.score_norm);
    if (report.ou) {
      os << "," << format_double(row.integrated_square) << "," << format_double(row.lambda_star);
    }
    os << "\n";
  }
}

void write_summary_csv(std::ostream& os, const ReplicationReport& report) {
  write_header_comment(os, "summary");
  os << "estimator,parameter,variant,count,mean,sd,skew,kurt\n";
  for (const auto& s : report.summary) {
    os << s.estimator << "," << s.parameter << "," << s.variant << "," << s.stats.count << ","
       << format_double(s.stats.mean) << "," << format_double(s.stats.sd) << ","
       << format_double(s.stats.skew) << "," << format_double(s.stats.kurt) << "\n";
  }
}

ReplicationReport read_rows_csv(std::istream& is) {
  ReplicationReport report;
  std::string line;
  std::vector<std::string> header;
  while (std::getline(is, line)) {
    if (line.empty() || line[0] == '#') continue;
    header = split(line, ',');
    break;
  }
  if (header.size() < 3 || header[0] != "rep") throw Error("rows file has no header");
  report.ou = std::find(header.begin(), header.end(), "lambda_star") != header.end();
  const std::size_t fixed = report.ou ? 9 : 7;
  if (header.size() < fixed || (header.size() - fixed) % 2 != 0) {
    throw Error("rows header has an unexpected layout");
  }
  const std::size_t dim = (header.size() - fixed) / 2;
  for (std::size_t j = 0; j < dim; ++j) report.parameters.push_back(header[3 + j]);

  while (std::getline(is, line)) {
    if (line.empty() || line[0] == '#') continue;
    const auto f = split(line, ',');
    if (f.size() != header.size()) throw Error("rows line has the wrong number of fields");
    ReplicationRow row;
    row.rep = parse_unsigned(f[0], "rep");
    row.stream_id = parse_unsigned(f[1], "stream_id");
    row.estimator = f[2];
    for (std::size_t j = 0; j < dim; ++j) row.estimate.push_back(parse_double(f[3 + j], "row"));
    for (std::size_t j = 0; j < dim; ++j) {
      row.std_errors.push_back(parse_double(f[3 + dim + j], "row"));
    }
    std::size_t c = 3 + 2 * dim;
    row.iterations = static_cast<int>(parse_unsigned(f[c++], "iterations"));
    row.converged = f[c++] == "1";
    row.status = f[c++];
    row.score_norm = parse_double(f[c++], "score_norm");
    if (report.ou) {
      row.integrated_square = parse_double(f[c++], "W");
      row.lambda_star = parse_double(f[c++], "lambda_star");
    }
    report.rows.push_back(std::move(row));
  }
  return report;
}

std::vector<double> read_series(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw Error("cannot open data file " + path);
  std::vector<double> out;
  std::string line;
  while (std::getline(is, line)) {
    const std::string t = trim(line);
    if (t.empty() || t[0] == '#') continue;
    const auto pos = t.rfind(',');
    const std::string field = trim(pos == std::string::npos ? t : t.substr(pos + 1));
    char* end = nullptr;
    const double v = std::strtod(field.c_str(), &end);
    if (field.empty() || end != field.c_str() + field.size() || !std::isfinite(v)) continue;
    out.push_back(v);
  }
  return out;
}

int run(const ExperimentConfig& cfg, std::ostream& log) {
  cfg.validate();
  const std::filesystem::path dir(cfg.out_dir);
  std::filesystem::create_directories(dir);
  {
    std::ofstream os(dir / "config.txt");
    ensure_open(os, dir / "config.txt");
    os << echo_config(cfg);
  }

  auto write_report = [&](const ReplicationReport& report, bool with_summary) {
    std::ofstream rows(dir / "rows.csv");
    ensure_open(rows, dir / "rows.csv");
    write_rows_csv(rows, report);
    if (with_summary) {
      std::ofstream sum(dir / "summary.csv");
      ensure_open(sum, dir / "summary.csv");
      write_summary_csv(sum, report);
    }
  };

  switch (cfg.mode) {
    case Mode::kSample: {
      RngStream rng(cfg.seed, 0);
      const auto xs = sample_stable(cfg.n, *cfg.theta0, rng);
      std::ofstream os(dir / "samples.csv");
      ensure_open(os, dir / "samples.csv");
      write_header_comment(os, "samples");
      os << "x\n";
      for (double x : xs) os << format_double(x) << "\n";
      log << "wrote " << xs.size() << " draws to " << (dir / "samples.csv").string() << "\n";
      return 0;
    }
    case Mode::kSimOu: {
      RngStream rng(cfg.seed, 0);
      const OUPath path = sample_ou_path(*cfg.ou, cfg.h, cfg.n, rng);
      std::ofstream os(dir / "path.csv");
      ensure_open(os, dir / "path.csv");
      write_header_comment(os, "ou-path");
      os << "t,x\n";
      for (std::size_t i = 0; i < path.values.size(); ++i) {
        os << format_double(cfg.h * static_cast<double>(i + 1)) << ","
           << format_double(path.values[i]) << "\n";
      }
      log << "wrote " << path.values.size() << " observations to "
          << (dir / "path.csv").string() << "\n";
      return 0;
    }
    case Mode::kFit: {
      const auto data = read_series(cfg.data_path);
      ReplicationReport report;
      report.parameters = kIidParameters;
      report.rows = fit_rows(data, cfg, 0, 0);
      write_report(report, false);
      for (const auto& row : report.rows) {
        log << row.estimator << ": mu=" << format_double(row.estimate[0])
            << " sigma=" << format_double(row.estimate[1])
            << " alpha=" << format_double(row.estimate[2])
            << " beta=" << format_double(row.estimate[3]) << " (" << row.status << ")\n";
      }
      return 0;
    }
    case Mode::kFitOu: {
      OUPath path{cfg.h, read_series(cfg.data_path)};
      const OUFitResult r = tcml_fit(path, ou_fit_config(cfg));
      ReplicationReport report;
      report.ou = true;
      report.parameters = kOuParameters;
      ReplicationRow row;
      row.estimator = "tcmle";
      row.estimate = to_std(r.theta_hat.to_vector());
      row.std_errors = to_std(r.std_errors);
      row.iterations = r.iterations;
      row.converged = r.converged;
      row.status = std::string(to_string(r.status));
      row.score_norm = r.final_score_norm;
      row.integrated_square = integrated_square(path);
      row.lambda_star = kNaN;
      report.rows.push_back(row);
      write_report(report, false);
      log << "tcmle: alpha=" << format_double(row.estimate[0])
          << " sigma=" << format_double(row.estimate[1])
          << " lambda=" << format_double(row.estimate[2]) << " (" << row.status << ")\n";
      return 0;
    }
    case Mode::kMonteCarlo:
    case Mode::kMonteCarloOu: {
      const unsigned workers = worker_count(cfg.reps);
      const ReplicationReport report = cfg.mode == Mode::kMonteCarlo
                                           ? run_montecarlo(cfg, workers)
                                           : run_montecarlo_ou(cfg, workers);
      write_report(report, true);
      for (const auto& s : report.summary) {
        log << s.estimator << " " << s.parameter << " [" << s.variant
            << "] mean=" << format_double(s.stats.mean) << " sd=" << format_double(s.stats.sd)
            << "\n";
      }
      for (const auto& e : report.errors) log << "error: " << e << "\n";
      return report.errors.empty() ? 0 : 1;
    }
  }
  return 1;
}

}  // namespace stable_tmle
