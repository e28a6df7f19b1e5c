// sdicov command line tool: bench, verify, gen, trace.

#include <cstdio>
#include <fstream>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "sdicov/sdicov.hpp"

namespace {

using namespace sdicov;
using namespace sdicov::bench;

int write_output(const std::string& text, const std::string& path) {
  if (path.empty() || path == "-") {
    std::cout << text;
    return std::cout ? kExitOk : kExitError;
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::Io, "cannot open '" + path + "' for writing");
  out << text;
  if (!out) throw Error(ErrorCode::Io, "write to '" + path + "' failed");
  return kExitOk;
}

// Flag values are kept as strings so unset flags leave config values alone.
struct CommonFlags {
  std::string seed, trials, tol, ls_c, edge_fraction, noise, format, out, config;
  bool no_timestamp = false;

  void attach(CLI::App* app) {
    app->add_option("--seed", seed, "base seed (trial t uses seed + t)");
    app->add_option("--trials", trials, "trials per problem");
    app->add_option("--tol", tol, "relative gradient tolerance");
    app->add_option("--ls-c", ls_c, "line search curvature factor c");
    app->add_option("--edge-fraction", edge_fraction, "distg edge probability");
    app->add_option("--noise", noise, "distg start noise, as a fraction of the diameter");
    app->add_option("--format", format, "csv or markdown");
    app->add_option("--out", out, "output path (default stdout)");
    app->add_flag("--no-timestamp", no_timestamp, "omit timestamp and wall times");
  }

  void apply(BenchConfig& c) const {
    auto set = [&](const char* key, const std::string& v) {
      if (!v.empty()) apply_setting(c, key, v);
    };
    set("seed", seed);
    set("trials", trials);
    set("tol", tol);
    set("ls_c", ls_c);
    set("edge_fraction", edge_fraction);
    set("noise", noise);
    set("format", format);
    if (no_timestamp) c.timestamp = false;
  }
};

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"SDICOV optimizer tool"};
  app.require_subcommand(1);

  CommonFlags bench_flags;
  std::string bench_problems, bench_optimizers;
  std::string bench_particles;
  auto* bench_cmd = app.add_subcommand("bench", "run an optimizer/problem matrix over seeded trials");
  bench_flags.attach(bench_cmd);
  bench_cmd->add_option("--config", bench_flags.config, "key = value config file (flags override it)");
  bench_cmd->add_option("--problems", bench_problems, "comma list of kind:size, e.g. distg:10,distg:100");
  bench_cmd->add_option("--particles", bench_particles, "shorthand for --problems distg:N[,distg:M]");
  bench_cmd->add_option("--optimizers,--optimizer", bench_optimizers, "comma list or 'all'");

  std::string verify_suite;
  VerifyOptions verify_opt;
  auto* verify_cmd = app.add_subcommand("verify", "check algebraic identities on random quadratics");
  verify_cmd->add_option("suite", verify_suite, "transforms | cg-equivalence | termination | shrinkage | secant")
      ->required();
  verify_cmd->add_option("--size", verify_opt.size, "dimension");
  verify_cmd->add_option("--trials", verify_opt.trials, "number of seeded instances");
  verify_cmd->add_option("--seed", verify_opt.seed, "first seed");
  verify_cmd->add_option("--kappa", verify_opt.kappa, "condition number of random quadratics");

  std::string gen_kind, gen_out;
  int gen_particles = 10;
  std::uint64_t gen_seed = 0;
  double gen_edge_fraction = 0.3;
  auto* gen_cmd = app.add_subcommand("gen", "write a problem instance");
  gen_cmd->add_option("kind", gen_kind, "problem kind (distg)")->required();
  gen_cmd->add_option("--particles", gen_particles, "number of particles");
  gen_cmd->add_option("--seed", gen_seed, "instance seed");
  gen_cmd->add_option("--edge-fraction", gen_edge_fraction, "edge probability");
  gen_cmd->add_option("--out", gen_out, "output path (default stdout)");

  CommonFlags trace_flags;
  std::string trace_problem = "rosenbrock:2", trace_optimizer = "sdicov";
  std::string trace_search = "auto";
  auto* trace_cmd = app.add_subcommand("trace", "per-iteration CSV for one run");
  trace_flags.attach(trace_cmd);
  trace_cmd->add_option("--problem", trace_problem, "kind:size");
  trace_cmd->add_option("--optimizer", trace_optimizer, "optimizer name");
  trace_cmd->add_option("--line-search", trace_search, "auto (exact for quadratics), exact or bisection")
      ->check(CLI::IsMember({"auto", "exact", "bisection"}));

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? kExitOk : kExitError;
  }

  try {
    if (*bench_cmd) {
      BenchConfig config;
      config.optimizers.assign(std::begin(kAllMethods), std::end(kAllMethods));
      if (!bench_flags.config.empty()) apply_config_file(config, bench_flags.config);
      bench_flags.apply(config);
      if (!bench_particles.empty()) {
        std::string list;
        for (const auto& n : split_list(bench_particles)) list += (list.empty() ? "" : ",") + ("distg:" + n);
        apply_setting(config, "problems", list);
      }
      if (!bench_problems.empty()) apply_setting(config, "problems", bench_problems);
      if (!bench_optimizers.empty()) apply_setting(config, "optimizers", bench_optimizers);
      if (config.problems.empty()) apply_setting(config, "problems", "distg:10,distg:100");
      const BenchReport report = run_bench(config);
      write_output(format_report(report), bench_flags.out);
      return report.exit_code();
    }
    if (*verify_cmd) {
      const VerifyOutcome outcome = run_verify(parse_suite(verify_suite), verify_opt);
      std::cout << verify_suite << ": " << outcome.summary << '\n';
      return outcome.passed ? kExitOk : kExitError;
    }
    if (*gen_cmd) {
      if (gen_kind != "distg") throw Error(ErrorCode::Config, "gen supports only 'distg'");
      const auto inst = generate_distg(gen_particles, gen_edge_fraction, gen_seed);
      return write_output(write_distg(inst), gen_out);
    }
    if (*trace_cmd) {
      BenchConfig config;
      trace_flags.apply(config);
      const ProblemSpec spec = parse_problem_spec(trace_problem);
      const auto method = parse_method(trace_optimizer);
      if (!method) throw Error(ErrorCode::Config, "unknown optimizer '" + trace_optimizer + "'");
      if (trace_search != "auto") {
        if (trace_search == "exact" && spec.kind != "quadratic") {
          throw Error(ErrorCode::Config, "exact line search needs a quadratic problem");
        }
        config.quadratic_exact = trace_search == "exact";
      }
      config.line_search.validate();
      config.termination.validate();
      const ProblemBundle problem = make_problem(spec, config.seed, config.edge_fraction, config.noise);
      const RunReport run =
          minimize(*method, problem.oracle, problem.x0, config.search_for(spec), config.termination);
      return write_output(format_trace(run), trace_flags.out);
    }
  } catch (const Error& e) {
    std::cerr << "error (" << to_string(e.code()) << "): " << e.what() << '\n';
    return kExitError;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitError;
  }
  return kExitOk;
}
