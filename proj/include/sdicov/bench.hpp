#pragma once

// Experiment harness behind the `sdicov` command line tool: seeded trial
// matrices over (problem, optimizer), identity verification sweeps, instance
// generation and per-iteration traces. Everything here returns data or text;
// the CLI only parses flags and writes bytes.

#include <algorithm>
#include <chrono>
#include <cstdint>
#include <cstdio>
#include <ctime>
#include <fstream>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "sdicov/dense_reference.hpp"
#include "sdicov/optimizers.hpp"
#include "sdicov/problems.hpp"
#include "sdicov/quadratic_lab.hpp"

namespace sdicov::bench {

inline constexpr int kExitOk = 0;
inline constexpr int kExitError = 1;
inline constexpr int kExitAllTrialsFailed = 2;

/// Condition number used for random quadratics throughout the harness.
inline constexpr double kQuadraticKappa = 1e3;

enum class OutputFormat { Csv, Markdown };

struct ProblemSpec {
  std::string kind;  ///< distg | quadratic | rosenbrock
  int size = 0;      ///< particles for distg, dimension otherwise

  std::string label() const { return kind + "-" + std::to_string(size); }
};

inline ProblemSpec parse_problem_spec(const std::string& text) {
  const auto colon = text.find(':');
  if (colon == std::string::npos) {
    throw Error(ErrorCode::Config, "problem spec must look like kind:size, got '" + text + "'");
  }
  ProblemSpec spec;
  spec.kind = text.substr(0, colon);
  try {
    std::size_t used = 0;
    spec.size = std::stoi(text.substr(colon + 1), &used);
    if (used != text.size() - colon - 1) throw std::invalid_argument("trailing");
  } catch (const std::exception&) {
    throw Error(ErrorCode::Config, "bad problem size in '" + text + "'");
  }
  if (spec.kind != "distg" && spec.kind != "quadratic" && spec.kind != "rosenbrock") {
    throw Error(ErrorCode::Config, "unknown problem kind '" + spec.kind + "'");
  }
  const int min_size = spec.kind == "distg" ? 3 : (spec.kind == "rosenbrock" ? 2 : 1);
  if (spec.size < min_size) throw Error(ErrorCode::Config, "problem size too small in '" + text + "'");
  return spec;
}

struct BenchConfig {
  std::vector<ProblemSpec> problems;
  std::vector<Method> optimizers;
  LineSearchSpec line_search;
  TerminationPolicy termination;
  int trials = 4;
  std::uint64_t seed = 1;
  double edge_fraction = 0.3;
  double noise = 0.05;
  OutputFormat format = OutputFormat::Markdown;
  bool timestamp = true;
  /// Quadratic problems use the exact step unless this is false.
  bool quadratic_exact = true;

  /// Line search for one problem kind.
  LineSearchSpec search_for(const ProblemSpec& spec) const {
    return spec.kind == "quadratic" && quadratic_exact ? LineSearchSpec::exact() : line_search;
  }

  void validate() const {
    if (trials < 1) throw Error(ErrorCode::Config, "trials must be >= 1");
    if (problems.empty()) throw Error(ErrorCode::Config, "at least one problem is required");
    if (optimizers.empty()) throw Error(ErrorCode::Config, "at least one optimizer is required");
    if (!(edge_fraction > 0.0 && edge_fraction <= 1.0)) {
      throw Error(ErrorCode::Config, "edge_fraction must lie in (0, 1]");
    }
    if (!(noise >= 0.0)) throw Error(ErrorCode::Config, "noise must be >= 0");
    line_search.validate();
    termination.validate();
  }
};

inline std::vector<std::string> split_list(const std::string& text) {
  std::vector<std::string> out;
  std::string item;
  std::istringstream in(text);
  while (std::getline(in, item, ',')) {
    const auto b = item.find_first_not_of(" \t");
    const auto e = item.find_last_not_of(" \t");
    if (b != std::string::npos) out.push_back(item.substr(b, e - b + 1));
  }
  return out;
}

inline std::vector<Method> parse_method_list(const std::string& text) {
  std::vector<Method> out;
  for (const auto& name : split_list(text)) {
    if (name == "all") {
      out.assign(std::begin(kAllMethods), std::end(kAllMethods));
      continue;
    }
    auto m = parse_method(name);
    if (!m) throw Error(ErrorCode::Config, "unknown optimizer '" + name + "'");
    out.push_back(*m);
  }
  return out;
}

inline OutputFormat parse_format(const std::string& text) {
  if (text == "csv") return OutputFormat::Csv;
  if (text == "markdown" || text == "md") return OutputFormat::Markdown;
  throw Error(ErrorCode::Config, "unknown format '" + text + "'");
}

namespace detail {

template <class T>
T parse_number(const std::string& key, const std::string& value) {
  std::istringstream in(value);
  T out{};
  if (!(in >> out) || !(in >> std::ws).eof()) {
    throw Error(ErrorCode::Config, "bad value for '" + key + "': '" + value + "'");
  }
  return out;
}

}  // namespace detail

/// Applies one `key = value` setting. Keys use underscores; the CLI maps its
/// dashed flags onto the same names.
inline void apply_setting(BenchConfig& config, const std::string& key, const std::string& value) {
  using detail::parse_number;
  if (key == "problems") {
    config.problems.clear();
    for (const auto& p : split_list(value)) config.problems.push_back(parse_problem_spec(p));
  } else if (key == "optimizers") {
    config.optimizers = parse_method_list(value);
  } else if (key == "trials") {
    config.trials = parse_number<int>(key, value);
  } else if (key == "seed") {
    config.seed = parse_number<std::uint64_t>(key, value);
  } else if (key == "tol") {
    config.termination.grad_rel_tol = parse_number<double>(key, value);
  } else if (key == "max_iterations") {
    config.termination.max_iterations = parse_number<int>(key, value);
  } else if (key == "stagnation_window") {
    config.termination.stagnation_window = parse_number<int>(key, value);
  } else if (key == "stagnation_rel") {
    config.termination.stagnation_rel = parse_number<double>(key, value);
  } else if (key == "ls_c") {
    config.line_search.shrink_factor = parse_number<double>(key, value);
  } else if (key == "ls_initial_step") {
    config.line_search.initial_step = parse_number<double>(key, value);
  } else if (key == "ls_max_expansions") {
    config.line_search.max_expansions = parse_number<int>(key, value);
  } else if (key == "ls_max_bisections") {
    config.line_search.max_bisections = parse_number<int>(key, value);
  } else if (key == "edge_fraction") {
    config.edge_fraction = parse_number<double>(key, value);
  } else if (key == "noise") {
    config.noise = parse_number<double>(key, value);
  } else if (key == "format") {
    config.format = parse_format(value);
  } else if (key == "quadratic_line_search") {
    if (value != "exact" && value != "bisection") {
      throw Error(ErrorCode::Config, "quadratic_line_search must be exact or bisection");
    }
    config.quadratic_exact = value == "exact";
  } else if (key == "timestamp") {
    if (value != "true" && value != "false") {
      throw Error(ErrorCode::Config, "timestamp must be true or false");
    }
    config.timestamp = value == "true";
  } else {
    throw Error(ErrorCode::Config, "unknown setting '" + key + "'");
  }
}

/// Flat `key = value` manifest; blank lines and `#` comments are ignored.
inline void apply_config_text(BenchConfig& config, const std::string& text) {
  std::istringstream in(text);
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw Error(ErrorCode::Config, "line " + std::to_string(line_no) + ": expected key = value");
    }
    auto trim = [](std::string s) {
      const auto b = s.find_first_not_of(" \t\r");
      const auto e = s.find_last_not_of(" \t\r");
      return b == std::string::npos ? std::string() : s.substr(b, e - b + 1);
    };
    apply_setting(config, trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
  }
}

inline void apply_config_file(BenchConfig& config, const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::Io, "cannot read config file '" + path + "'");
  std::stringstream buf;
  buf << in.rdbuf();
  apply_config_text(config, buf.str());
}

/// Seed for the noisy starting point of a trial whose instance seed is `s`.
inline std::uint64_t start_seed(std::uint64_t s) { return s ^ 0x9E3779B97F4A7C15ULL; }

/// Builds the problem for one trial. distg: instance from `seed`, start from
/// start_seed(seed). quadratic: random SPD (kappa 1e3) from `seed`, start at
/// the origin. rosenbrock: the standard start, independent of the seed.
inline ProblemBundle make_problem(const ProblemSpec& spec, std::uint64_t seed,
                                  double edge_fraction, double noise) {
  if (spec.kind == "distg") {
    const auto inst = generate_distg(spec.size, edge_fraction, seed);
    ProblemBundle b;
    b.name = spec.label();
    b.oracle = distg_oracle(inst);
    b.x_star = inst.truth_free();
    b.x0 = initial_point(inst, noise, start_seed(seed));
    return b;
  }
  if (spec.kind == "quadratic") {
    Rng rng(seed);
    return quadratic_bundle(random_spd_quadratic(spec.size, kQuadraticKappa, rng), spec.label(),
                            Vector::Zero(spec.size));
  }
  if (spec.kind == "rosenbrock") {
    auto b = rosenbrock(spec.size);
    b.name = spec.label();
    return b;
  }
  throw Error(ErrorCode::Config, "unknown problem kind '" + spec.kind + "'");
}

struct TrialResult {
  std::string problem;
  Method method = Method::Sdicov;
  std::uint64_t seed = 0;
  RunStatus status = RunStatus::MaxIterations;
  int iterations = 0;
  double final_f = 0.0;
  double final_grad_norm = 0.0;
  long f_evals = 0;
  long g_evals = 0;
  int non_descent_steps = 0;  ///< recorded directions with grad.m >= 0
  int flagged_steps = 0;      ///< iterations carrying a StepEvent
  std::string detail;
  double wall_ms = 0.0;

  bool succeeded() const { return status == RunStatus::GradConverged; }
};

struct SummaryRow {
  std::string problem;
  Method method = Method::Sdicov;
  std::optional<double> mean_iterations;  ///< over successful trials only
  int min_iterations = 0;
  int max_iterations = 0;
  int successes = 0;
  int trials = 0;
  std::optional<double> mean_final_f;
  std::optional<double> mean_final_grad_norm;
  std::string failure_reasons;
};

struct BenchReport {
  BenchConfig config;
  std::vector<TrialResult> trials;
  std::vector<SummaryRow> rows;
  std::string timestamp;

  /// 2 when some (problem, optimizer) pair failed every trial, else 0.
  int exit_code() const {
    for (const auto& r : rows)
      if (r.successes == 0) return kExitAllTrialsFailed;
    return kExitOk;
  }
};

inline TrialResult run_trial(const ProblemSpec& spec, Method method, std::uint64_t seed,
                             const BenchConfig& config) {
  const ProblemBundle problem = make_problem(spec, seed, config.edge_fraction, config.noise);
  const auto start = std::chrono::steady_clock::now();
  const RunReport run = minimize(method, problem.oracle, problem.x0, config.search_for(spec),
                                 config.termination);
  const auto stop = std::chrono::steady_clock::now();

  TrialResult t;
  t.problem = spec.label();
  t.method = method;
  t.seed = seed;
  t.status = run.status;
  t.iterations = run.iterations;
  t.final_f = run.final_f;
  t.final_grad_norm = run.final_grad_norm;
  t.f_evals = run.f_evals;
  t.g_evals = run.g_evals;
  t.detail = run.detail;
  for (const auto& rec : run.records) {
    if (!(rec.slope < 0.0)) ++t.non_descent_steps;
    if (rec.event != StepEvent::None) ++t.flagged_steps;
  }
  t.wall_ms = std::chrono::duration<double, std::milli>(stop - start).count();
  return t;
}

inline std::vector<SummaryRow> summarize(const BenchConfig& config,
                                         const std::vector<TrialResult>& trials) {
  std::vector<SummaryRow> rows;
  for (const auto& spec : config.problems) {
    for (Method m : config.optimizers) {
      SummaryRow row;
      row.problem = spec.label();
      row.method = m;
      double sum_it = 0.0, sum_f = 0.0, sum_g = 0.0;
      std::set<std::string> reasons;
      for (const auto& t : trials) {
        if (t.problem != row.problem || t.method != m) continue;
        ++row.trials;
        if (!t.succeeded()) {
          reasons.insert(to_string(t.status));
          continue;
        }
        if (row.successes == 0) {
          row.min_iterations = row.max_iterations = t.iterations;
        } else {
          row.min_iterations = std::min(row.min_iterations, t.iterations);
          row.max_iterations = std::max(row.max_iterations, t.iterations);
        }
        ++row.successes;
        sum_it += t.iterations;
        sum_f += t.final_f;
        sum_g += t.final_grad_norm;
      }
      if (row.successes > 0) {
        row.mean_iterations = sum_it / row.successes;
        row.mean_final_f = sum_f / row.successes;
        row.mean_final_grad_norm = sum_g / row.successes;
      }
      for (const auto& r : reasons) {
        if (!row.failure_reasons.empty()) row.failure_reasons += ";";
        row.failure_reasons += r;
      }
      rows.push_back(std::move(row));
    }
  }
  return rows;
}

inline std::string utc_timestamp() {
  const std::time_t now = std::time(nullptr);
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

/// Trial seeds are seed, seed + 1, ..., seed + trials - 1 for every problem.
inline BenchReport run_bench(const BenchConfig& config) {
  config.validate();
  BenchReport report;
  report.config = config;
  if (config.timestamp) report.timestamp = utc_timestamp();
  for (const auto& spec : config.problems) {
    for (int t = 0; t < config.trials; ++t) {
      const std::uint64_t seed = config.seed + static_cast<std::uint64_t>(t);
      for (Method m : config.optimizers) report.trials.push_back(run_trial(spec, m, seed, config));
    }
  }
  report.rows = summarize(config, report.trials);
  return report;
}

// ---------------------------------------------------------------------------
// Report formatting

inline std::string display_name(Method m) {
  switch (m) {
    case Method::Sdicov: return "SDICOV";
    case Method::Bfgs: return "BFGS";
    case Method::Dfp: return "DFP";
    case Method::CgPrPlus: return "CG-PR+";
    case Method::CgFr: return "CG-FR";
  }
  return "?";
}

inline std::string config_echo(const BenchConfig& c) {
  std::ostringstream out;
  out << "problems=";
  for (std::size_t i = 0; i < c.problems.size(); ++i) out << (i ? "," : "") << c.problems[i].kind << ':' << c.problems[i].size;
  out << " optimizers=";
  for (std::size_t i = 0; i < c.optimizers.size(); ++i) out << (i ? "," : "") << to_string(c.optimizers[i]);
  out << " trials=" << c.trials << " seed=" << c.seed << " tol=" << format_real(c.termination.grad_rel_tol)
      << " max_iterations=" << c.termination.max_iterations
      << " stagnation_window=" << c.termination.stagnation_window
      << " stagnation_rel=" << format_real(c.termination.stagnation_rel)
      << " ls_c=" << format_real(c.line_search.shrink_factor)
      << " ls_initial_step=" << format_real(c.line_search.initial_step)
      << " quadratic_line_search=" << (c.quadratic_exact ? "exact" : "bisection")
      << " edge_fraction=" << format_real(c.edge_fraction) << " noise=" << format_real(c.noise);
  return out.str();
}

inline std::string optional_real(const std::optional<double>& v) { return v ? format_real(*v) : ""; }

inline std::string csv_quote(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char ch : s) {
    if (ch == '"') out += '"';
    out += ch;
  }
  return out + "\"";
}

/// One header row, then a `trial` row per run and a `summary` row per
/// (problem, optimizer). Metadata lines start with '#'. wall_ms is only
/// emitted together with the timestamp.
inline std::string format_csv(const BenchReport& r) {
  const bool timed = r.config.timestamp;
  std::ostringstream out;
  out << "# sdicov bench\n";
  if (timed) out << "# timestamp: " << r.timestamp << '\n';
  out << "# config: " << config_echo(r.config) << '\n';
  out << "row,problem,optimizer,seed,status,iterations,min_iterations,max_iterations,successes,"
         "trials,final_f,final_grad_norm,f_evals,g_evals,failure_reasons";
  if (timed) out << ",wall_ms";
  out << '\n';
  for (const auto& t : r.trials) {
    out << "trial," << t.problem << ',' << to_string(t.method) << ',' << t.seed << ','
        << to_string(t.status) << ',' << t.iterations << ",,,,," << format_real(t.final_f) << ','
        << format_real(t.final_grad_norm) << ',' << t.f_evals << ',' << t.g_evals << ','
        << csv_quote(t.succeeded() ? "" : to_string(t.status));
    if (timed) out << ',' << format_real(t.wall_ms);
    out << '\n';
  }
  for (const auto& s : r.rows) {
    out << "summary," << s.problem << ',' << to_string(s.method) << ",,,"
        << optional_real(s.mean_iterations) << ',';
    if (s.successes > 0) out << s.min_iterations << ',' << s.max_iterations;
    else out << ',';
    out << ',' << s.successes << ',' << s.trials << ',' << optional_real(s.mean_final_f) << ','
        << optional_real(s.mean_final_grad_norm) << ",,," << csv_quote(s.failure_reasons);
    if (timed) out << ',';
    out << '\n';
  }
  return out.str();
}

inline std::string fixed2(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.2f", v);
  return buf;
}

inline std::string sci(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.3e", v);
  return buf;
}

/// Pipe tables: mean iterations with one column per problem (an empty cell
/// means every trial failed), then the per-(problem, optimizer) summary and
/// the per-trial rows.
inline std::string format_markdown(const BenchReport& r) {
  std::ostringstream out;
  out << "# Benchmark results\n\n";
  if (r.config.timestamp) out << "Generated " << r.timestamp << "\n\n";
  out << "Config: `" << config_echo(r.config) << "`\n\n";

  out << "| Algorithm |";
  for (const auto& p : r.config.problems) out << ' ' << p.label() << " |";
  out << "\n|:--|";
  for (std::size_t i = 0; i < r.config.problems.size(); ++i) out << "--:|";
  out << '\n';
  for (Method m : r.config.optimizers) {
    out << "| " << display_name(m) << " |";
    for (const auto& p : r.config.problems) {
      for (const auto& s : r.rows) {
        if (s.problem == p.label() && s.method == m) {
          out << ' ' << (s.mean_iterations ? fixed2(*s.mean_iterations) : "") << " |";
        }
      }
    }
    out << '\n';
  }

  out << "\n## Summary\n\n";
  out << "| problem | optimizer | mean iterations | min | max | successes | mean final f | "
         "mean final grad norm | failure reasons |\n";
  out << "|:--|:--|--:|--:|--:|--:|--:|--:|:--|\n";
  for (const auto& s : r.rows) {
    out << "| " << s.problem << " | " << display_name(s.method) << " | "
        << (s.mean_iterations ? fixed2(*s.mean_iterations) : "") << " | "
        << (s.successes ? std::to_string(s.min_iterations) : "") << " | "
        << (s.successes ? std::to_string(s.max_iterations) : "") << " | " << s.successes << '/'
        << s.trials << " | " << (s.mean_final_f ? sci(*s.mean_final_f) : "") << " | "
        << (s.mean_final_grad_norm ? sci(*s.mean_final_grad_norm) : "") << " | "
        << s.failure_reasons << " |\n";
  }

  out << "\n## Trials\n\n";
  out << "| problem | optimizer | seed | status | iterations | final f | final grad norm | f evals | g evals |";
  if (r.config.timestamp) out << " wall ms |";
  out << "\n|:--|:--|--:|:--|--:|--:|--:|--:|--:|";
  if (r.config.timestamp) out << "--:|";
  out << '\n';
  for (const auto& t : r.trials) {
    out << "| " << t.problem << " | " << display_name(t.method) << " | " << t.seed << " | "
        << to_string(t.status) << " | " << t.iterations << " | " << sci(t.final_f) << " | "
        << sci(t.final_grad_norm) << " | " << t.f_evals << " | " << t.g_evals << " |";
    if (r.config.timestamp) out << ' ' << fixed2(t.wall_ms) << " |";
    out << '\n';
  }
  return out.str();
}

inline std::string format_report(const BenchReport& r) {
  return r.config.format == OutputFormat::Csv ? format_csv(r) : format_markdown(r);
}

// ---------------------------------------------------------------------------
// Verification sweeps

enum class VerifySuite { Transforms, CgEquivalence, Termination, Shrinkage, Secant };

inline VerifySuite parse_suite(const std::string& name) {
  if (name == "transforms") return VerifySuite::Transforms;
  if (name == "cg-equivalence") return VerifySuite::CgEquivalence;
  if (name == "termination") return VerifySuite::Termination;
  if (name == "shrinkage") return VerifySuite::Shrinkage;
  if (name == "secant") return VerifySuite::Secant;
  throw Error(ErrorCode::Config, "unknown verify suite '" + name + "'");
}

struct VerifyOptions {
  int size = 8;
  int trials = 100;
  std::uint64_t seed = 1;
  double kappa = kQuadraticKappa;
  int max_chain = 6;  ///< transforms suite: chains have 1..max_chain members
};

struct VerifyOutcome {
  bool passed = true;
  double max_residual = 0.0;
  int failures = 0;
  std::optional<std::uint64_t> first_failing_seed;
  std::string summary;
};

/// Chain of `k` random transforms with |mu| >= 1e-6 (resampled otherwise).
inline TransformChain random_chain(Eigen::Index n, int k, Rng& rng) {
  TransformChain c(n);
  auto gaussian = [&] {
    Vector v(n);
    for (Eigen::Index i = 0; i < n; ++i) v[i] = rng.normal();
    return v;
  };
  while (static_cast<int>(c.size()) < k) {
    Vector p = gaussian();
    Vector g = gaussian();
    const double mu = 1.0 + g.dot(p) / p.squaredNorm();
    if (std::abs(mu) < 1e-6) continue;
    c.push_back(make_transform(std::move(p), std::move(g)));
  }
  return c;
}

/// Dense-oracle agreement plus the round-trip and adjoint identities for one
/// random chain; returns the largest relative residual.
inline double check_random_chain(Eigen::Index n, int k, Rng& rng) {
  const TransformChain c = random_chain(n, k, rng);
  Vector x(n), y(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    x[i] = rng.normal();
    y[i] = rng.normal();
  }
  double worst = dense::compare_chain(c, x).max();
  worst = std::max(worst, relative_error(c.inverse(c.forward(x)), x));
  worst = std::max(worst, relative_error(c.forward(c.inverse(x)), x));
  const double lhs = c.forward(x).dot(y);
  const double rhs = x.dot(c.adjoint(y));
  worst = std::max(worst, std::abs(lhs - rhs) / std::max(std::abs(rhs), c.forward(x).norm() * y.norm()));
  return worst;
}

inline VerifyOutcome run_verify(VerifySuite suite, const VerifyOptions& opt) {
  if (opt.size < 1 || opt.trials < 1) throw Error(ErrorCode::Config, "size and trials must be >= 1");
  if (suite != VerifySuite::Transforms && opt.size > 50) {
    throw Error(ErrorCode::Config, "quadratic verification is limited to size <= 50");
  }
  VerifyOutcome out;
  const Eigen::Index n = opt.size;
  std::string label;
  double limit = 0.0;
  for (int t = 0; t < opt.trials; ++t) {
    const std::uint64_t seed = opt.seed + static_cast<std::uint64_t>(t);
    Rng rng(seed);
    bool ok = true;
    double residual = 0.0;
    switch (suite) {
      case VerifySuite::Transforms: {
        label = "max relative residual vs dense oracle";
        limit = 1e-10;
        const int k = 1 + static_cast<int>(rng.index(static_cast<std::size_t>(opt.max_chain)));
        residual = check_random_chain(n, k, rng);
        ok = residual <= limit;
        break;
      }
      case VerifySuite::CgEquivalence: {
        label = "max deviation from linear CG";
        limit = 1e-8;
        const auto q = random_spd_quadratic(n, opt.kappa, rng);
        const auto rep = verify_cg_equivalence(q, Vector::Zero(n));
        residual = rep.max_deviation;
        ok = rep.passed;
        break;
      }
      case VerifySuite::Termination: {
        label = "max iterations to relative gradient 1e-8";
        limit = static_cast<double>(n);
        const auto q = random_spd_quadratic(n, opt.kappa, rng);
        TerminationPolicy term;
        term.grad_rel_tol = 1e-8;
        term.max_iterations = 10 * static_cast<int>(n);
        const auto run = sdicov_minimize(q.oracle(), Vector::Zero(n), LineSearchSpec::exact(), term);
        residual = run.iterations;
        ok = run.status == RunStatus::GradConverged && run.iterations <= n;
        break;
      }
      case VerifySuite::Shrinkage: {
        label = "max containment residual";
        limit = 1e-6;
        const auto q = random_spd_quadratic(n, opt.kappa, rng);
        const auto rep = verify_subspace_shrinkage(q, Vector::Zero(n));
        residual = rep.max_containment_residual;
        ok = rep.passed;
        break;
      }
      case VerifySuite::Secant: {
        label = "max secant residual";
        limit = 1e-8;
        const auto q = random_spd_quadratic(n, opt.kappa, rng);
        const auto oracle = q.oracle();
        TerminationPolicy term;
        term.max_iterations = static_cast<int>(n);
        const auto run = sdicov_minimize(oracle, Vector::Zero(n), LineSearchSpec::exact(), term);
        for (std::size_t k = 0; k < run.records.size(); ++k) {
          residual = std::max(residual, verify_secant(oracle, run, k));
        }
        ok = residual <= limit;
        break;
      }
    }
    out.max_residual = std::max(out.max_residual, residual);
    if (!ok) {
      ++out.failures;
      if (!out.first_failing_seed) out.first_failing_seed = seed;
    }
  }
  out.passed = out.failures == 0;
  std::ostringstream s;
  s << (out.passed ? "PASS" : "FAIL") << ": " << opt.trials - out.failures << '/' << opt.trials
    << " trials, " << label << " = " << format_real(out.max_residual) << " (limit "
    << format_real(limit) << ")";
  if (out.first_failing_seed) s << ", first failing seed " << *out.first_failing_seed;
  out.summary = s.str();
  return out;
}

// ---------------------------------------------------------------------------
// Trace

/// Per-iteration CSV: a k = 0 row for the start point, one row per
/// iteration, and a closing `# status=...` comment line.
inline std::string format_trace(const RunReport& run) {
  std::ostringstream out;
  out << "k,f,grad_norm,alpha,ls_status,f_evals,g_evals\n";
  out << "0," << format_real(run.initial_f) << ',' << format_real(run.initial_grad_norm)
      << ",,start,1,1\n";
  for (const auto& r : run.records) {
    out << r.k << ',' << format_real(r.f_value) << ',' << format_real(r.grad_norm) << ','
        << format_real(r.alpha) << ',' << to_string(r.ls_status) << ',' << r.f_evals << ','
        << r.g_evals << '\n';
  }
  out << "# status=" << to_string(run.status) << " iterations=" << run.iterations;
  if (!run.detail.empty()) out << " detail=" << run.detail;
  out << '\n';
  return out.str();
}

}  // namespace sdicov::bench
