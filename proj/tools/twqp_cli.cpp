#include <omp.h>

#include <CLI11.hpp>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "twqp/bigm.hpp"
#include "twqp/error.hpp"
#include "twqp/esoc.hpp"
#include "twqp/gen.hpp"
#include "twqp/io.hpp"
#include "twqp/oracle.hpp"
#include "twqp/solver.hpp"

namespace {

using namespace twqp;

std::uint64_t default_seed() {
  if (const char* s = std::getenv("TWQP_SEED")) {
    char* end = nullptr;
    const auto v = std::strtoull(s, &end, 10);
    if (end == s || *end != '\0') throw InputError("TWQP_SEED must be a nonnegative integer");
    return v;
  }
  return 1;
}

double parse_number(const std::string& text, const std::string& what) {
  char* end = nullptr;
  const double v = std::strtod(text.c_str(), &end);
  if (text.empty() || end != text.c_str() + text.size()) throw InputError("cannot parse " + what + " '" + text + "'");
  return v;
}

void emit(const std::string& path, const std::string& text) {
  if (path.empty() || path == "-") {
    std::cout << text;
    return;
  }
  std::ofstream out(path);
  if (!out) throw InputError("cannot write " + path);
  out << text;
}

DecompositionChoice parse_decomp(const std::string& text) {
  DecompositionChoice d;
  if (text == "auto") return d;
  if (text.rfind("banded:", 0) == 0) {
    d.kind = DecompositionChoice::Kind::banded;
    const double w = parse_number(text.substr(7), "bandwidth");
    if (w < 0 || w != static_cast<int>(w)) throw InputError("bandwidth must be a nonnegative integer");
    d.bandwidth = static_cast<int>(w);
    return d;
  }
  d.kind = DecompositionChoice::Kind::given;
  std::ifstream in(text);
  if (!in) throw InputError("cannot open decomposition file " + text);
  const Json j = parse_json(in, text);
  d.tree = decomposition_from_json(j);
  if (j.contains("root_order")) {
    for (const auto& v : j.at("root_order")) d.root_order.push_back(v.get<int>() - 1);
  }
  return d;
}

void apply_bound(SolveOptions& opts, const std::string& text) {
  if (text == "auto") {
    opts.bound_mode = BoundMode::automatic;
  } else if (text == "theory") {
    opts.bound_mode = BoundMode::theory;
  } else {
    opts.bound_mode = BoundMode::user;
    opts.user_bound = parse_number(text, "bound U");
    if (!(opts.user_bound > 0.0)) throw InputError("bound U must be positive");
  }
}

Exec parse_exec(const std::string& text) {
  if (text == "serial") return Exec::serial;
  if (text == "parallel") return Exec::parallel;
  throw InputError("exec must be serial or parallel");
}

Json diagnostics_json(const PreparedProblem& prep) {
  return {{"mu_min", prep.diagnostics.mu_min},
          {"mu_max", prep.diagnostics.mu_max},
          {"kappa2", prep.diagnostics.kappa2},
          {"kappa_inf", prep.diagnostics.kappa_inf},
          {"exact_spectrum", prep.diagnostics.exact},
          {"bandwidth", prep.bandwidth},
          {"width", prep.ld.width},
          {"path_decomposition", prep.ld.is_path()}};
}

struct SolveArgs {
  std::string instance;
  std::string decomp = "auto";
  std::string bound = "auto";
  std::string prune = "auto";
  std::string exec = "parallel";
  std::string out;
};

int cmd_solve(const SolveArgs& a) {
  const Instance inst = read_instance(a.instance);
  SolveOptions opts;
  apply_bound(opts, a.bound);
  opts.prune = parse_prune_mode(a.prune);
  opts.exec = parse_exec(a.exec);
  const PreparedProblem prep = prepare(inst, parse_decomp(a.decomp), opts);
  const Solution sol = restore_solution(prep, inst, solve(prep.instance, prep.ld, prep.U, opts));
  Json j = solution_to_json(sol);
  j["diagnostics"] = diagnostics_json(prep);
  emit(a.out, j.dump(2) + "\n");
  return 0;
}

int cmd_oracle(const std::string& path, const std::string& out, const std::string& exec) {
  const Instance inst = read_instance(path);
  emit(out, solution_to_json(brute_force(inst, parse_exec(exec))).dump(2) + "\n");
  return 0;
}

struct GenArgs {
  std::string family = "banded";
  int n = 100;
  int w = 2;
  int omega = -1;
  double nu = 1.0;
  double kappa = 0.0;
  std::uint64_t seed = 1;
  std::string out;
  std::string decomp_out;
  // signal family
  double level_sigma = 0.3;
  double noise_sigma = 1.0;
  double spike_fraction = 0.05;
  double spike_sigmas = 10.0;
};

int cmd_gen(const GenArgs& a) {
  if (a.family == "signal") {
    const SyntheticSignal s = gen_ses_signal(a.n, a.level_sigma, a.noise_sigma, a.spike_fraction, a.spike_sigmas, a.seed);
    std::ostringstream csv;
    csv << "timestamp,value\n";
    char buf[40];
    for (int t = 0; t < s.series.size(); ++t) {
      std::snprintf(buf, sizeof buf, "%.17g", s.series.y[static_cast<std::size_t>(t)]);
      csv << t + 1 << ',' << buf << '\n';
    }
    emit(a.out, csv.str());
    if (!a.decomp_out.empty()) {
      Json spikes = Json::array();
      for (int t : s.spikes) spikes.push_back(t + 1);
      emit(a.decomp_out, Json{{"seed", a.seed}, {"spikes", spikes}}.dump(2) + "\n");
    }
    return 0;
  }
  if (a.family != "banded" && a.family != "lowtw") throw InputError("family must be banded, lowtw, or signal");
  GenSpec spec;
  spec.n = a.n;
  spec.w = a.w;
  spec.omega = a.family == "banded" ? a.w : (a.omega < 0 ? 2 : a.omega);
  spec.nu = a.nu;
  spec.target_kappa = a.kappa;
  spec.seed = a.seed;
  const GeneratedInstance g = generate(spec);
  Json j = instance_to_json(g.instance);
  j["generator"] = {{"family", a.family}, {"n", a.n},         {"w", a.w},          {"omega", spec.omega},
                    {"nu", g.nu},         {"kappa2", g.kappa2}, {"seed", g.seed}, {"rng", "mt19937_64"}};
  emit(a.out, j.dump(1) + "\n");
  if (!a.decomp_out.empty()) emit(a.decomp_out, decomposition_to_json(g.decomposition).dump(1) + "\n");
  return 0;
}

struct BenchArgs {
  std::string family = "banded";
  std::vector<int> n{100, 200};
  std::vector<int> w{2};
  int omega = 2;
  int trials = 5;
  double kappa = 7.0;
  double nu = 0.0;
  std::uint64_t seed = 1;
  int threads = 0;
  std::string prune = "auto";
  std::string decomp = "auto";
  bool omit_timing = false;
  std::string out;
};

int cmd_bench(const BenchArgs& a) {
  struct Cell {
    int n, w, trial;
    std::uint64_t seed;
    double kappa2 = 0, seconds = 0, avg = 0, objective = 0;
    std::size_t max = 0;
    std::string error;
  };
  if (a.trials < 1) throw InputError("trials must be at least 1");
  if (a.family != "banded" && a.family != "lowtw") throw InputError("family must be banded or lowtw");
  if (a.decomp != "auto" && a.decomp != "banded" && a.decomp != "given") {
    throw InputError("bench decomposition must be auto, banded, or given");
  }
  std::vector<Cell> cells;
  for (int n : a.n)
    for (int w : a.w)
      for (int t = 0; t < a.trials; ++t) {
        Cell c{};
        c.n = n;
        c.w = w;
        c.trial = t;
        c.seed = a.seed + static_cast<std::uint64_t>(t);
        cells.push_back(c);
      }

  const int threads = a.threads > 0 ? a.threads : omp_get_num_procs();
  SolveOptions opts;
  opts.prune = parse_prune_mode(a.prune);
  if (threads > 1) opts.exec = Exec::serial;

#pragma omp parallel for schedule(dynamic) num_threads(threads)
  for (std::size_t k = 0; k < cells.size(); ++k) {
    Cell& c = cells[k];
    try {
      GenSpec spec;
      spec.n = c.n;
      spec.w = c.w;
      spec.omega = a.family == "banded" ? c.w : a.omega;
      spec.seed = c.seed;
      if (a.nu > 0.0) spec.nu = a.nu;
      else spec.target_kappa = a.kappa;
      const GeneratedInstance g = generate(spec);
      DecompositionChoice d;
      if (a.decomp == "banded") {
        d.kind = DecompositionChoice::Kind::banded;
        d.bandwidth = c.w;
      } else if (a.decomp == "given") {
        d.kind = DecompositionChoice::Kind::given;
        d.tree = g.decomposition;
      }
      const Solution s = solve_instance(g.instance, d, opts);
      c.kappa2 = g.kappa2;
      c.seconds = s.stats.seconds;
      c.avg = s.stats.mean_retained;
      c.max = s.stats.max_retained;
      c.objective = s.objective;
    } catch (const Error& e) {
      c.error = e.kind();
    }
  }

  std::ostringstream csv;
  csv << "family,n,w,trial,seed,kappa2," << (a.omit_timing ? "" : "time_s,") << "avg_retained,max_retained,objective\n";
  char buf[64];
  for (const Cell& c : cells) {
    csv << a.family << ',' << c.n << ',' << c.w << ',' << c.trial << ',' << c.seed << ',';
    if (!c.error.empty()) {
      csv << c.error << (a.omit_timing ? ",,," : ",,,,") << '\n';
      continue;
    }
    std::snprintf(buf, sizeof buf, "%.6g", c.kappa2);
    csv << buf << ',';
    if (!a.omit_timing) {
      std::snprintf(buf, sizeof buf, "%.6f", c.seconds);
      csv << buf << ',';
    }
    std::snprintf(buf, sizeof buf, "%.4f", c.avg);
    csv << buf << ',' << c.max << ',';
    std::snprintf(buf, sizeof buf, "%.17g", c.objective);
    csv << buf << '\n';
  }
  emit(a.out, csv.str());
  return 0;
}

struct EsocArgs {
  std::string csv;
  std::vector<double> betas = TuneGrid{}.betas;
  std::vector<double> lambdas = TuneGrid{}.lambdas;
  double mu1 = 1.2;
  double mu2 = 0.001;
  double split = 0.5;
  int workers = 0;
  std::string out;
};

int cmd_esoc(const EsocArgs& a) {
  const TimeSeries ts = ingest_csv(a.csv);
  TuneGrid grid;
  grid.betas = a.betas;
  grid.lambdas = a.lambdas;
  grid.mu1 = a.mu1;
  grid.mu2 = a.mu2;
  const EsocReport rep = run_esoc(ts, a.split, grid, a.workers);

  Json cells = Json::array();
  for (const auto& c : rep.tuning.cells) {
    Json cell = {{"beta", c.beta}, {"lambda", c.lambda}, {"flagged_fraction", c.flagged_fraction}, {"discarded", c.discarded}};
    if (c.discarded) cell["reason"] = c.reason;
    else cell["train_mse"] = c.train_mse;
    cells.push_back(std::move(cell));
  }
  Json summary = {
      {"T", ts.size()},
      {"train_size", rep.train_size},
      {"config", {{"beta", rep.tuning.best.beta}, {"lambda", rep.tuning.best.lambda.front()}, {"mu1", a.mu1}, {"mu2", a.mu2}}},
      {"ses_beta", rep.ses_beta},
      {"train_mse", {{"esoc", rep.train_mse_esoc}, {"ses", rep.train_mse_ses}}},
      {"test_mse", {{"esoc", rep.test_mse_esoc}, {"ses", rep.test_mse_ses}}},
      {"outlier_fraction", rep.outlier_fraction},
      {"objective", rep.esoc.objective},
      {"grid", cells}};
  if (a.out.empty()) {
    std::cout << summary.dump(2) << '\n';
    return 0;
  }
  std::filesystem::create_directories(a.out);
  std::ostringstream csv;
  write_result_csv(csv, ts, rep.esoc);
  emit((std::filesystem::path(a.out) / "result.csv").string(), csv.str());
  emit((std::filesystem::path(a.out) / "summary.json").string(), summary.dump(2) + "\n");
  return 0;
}

int cmd_export_bigm(const std::string& path, const std::string& bound, const std::string& out) {
  const Instance inst = read_instance(path);
  double U = 0.0;
  if (bound == "theory" || bound == "auto") {
    SolveOptions opts;
    opts.bound_mode = BoundMode::theory;
    const PreparedProblem prep = prepare(inst, {}, opts);
    // The prepared bound lives in scaled units; the loosest original-unit
    // bound comes from the smallest scale.
    U = prep.U / *std::min_element(prep.scale.begin(), prep.scale.end());
  } else {
    U = parse_number(bound, "bound U");
  }
  std::ostringstream lp;
  export_bigm_lp(lp, inst, U);
  emit(out, lp.str());
  return 0;
}

void report(const char* kind, const std::string& message) {
  std::cerr << Json{{"error", {{"kind", kind}, {"message", message}}}}.dump() << '\n';
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Exact MIQP solver for indicator variables over low-treewidth Hessians"};
  app.require_subcommand(1);
  int threads = 0;
  app.add_option("--threads", threads, "OpenMP threads for the parallel kernels (default: all cores)");

  SolveArgs solve_args;
  auto* solve_cmd = app.add_subcommand("solve", "Solve an instance with the parametric DP");
  solve_cmd->add_option("instance", solve_args.instance, "Instance JSON")->required();
  solve_cmd->add_option("--decomp", solve_args.decomp, "auto | banded:W | decomposition JSON file");
  solve_cmd->add_option("--u", solve_args.bound, "theory | auto | bound on |x*| in instance units");
  solve_cmd->add_option("--prune", solve_args.prune, "exact | path | auto | none");
  solve_cmd->add_option("--exec", solve_args.exec, "serial | parallel kernels");
  solve_cmd->add_option("--out", solve_args.out, "Output JSON (default stdout)");

  std::string oracle_in, oracle_out, oracle_exec = "parallel";
  auto* oracle_cmd = app.add_subcommand("oracle", "Brute-force enumeration of indicator patterns");
  oracle_cmd->add_option("instance", oracle_in, "Instance JSON")->required();
  oracle_cmd->add_option("--exec", oracle_exec, "serial | parallel");
  oracle_cmd->add_option("--out", oracle_out, "Output JSON (default stdout)");

  GenArgs gen_args;
  gen_args.seed = 0;
  bool gen_seed_given = false;
  auto* gen_cmd = app.add_subcommand("gen", "Generate a synthetic instance or signal");
  gen_cmd->add_option("--family", gen_args.family, "banded | lowtw | signal");
  gen_cmd->add_option("--n", gen_args.n, "Dimension (or series length for signal)");
  gen_cmd->add_option("--w", gen_args.w, "Bandwidth");
  gen_cmd->add_option("--omega", gen_args.omega, "Treewidth target for lowtw (default 2)");
  gen_cmd->add_option("--nu", gen_args.nu, "Diagonal shift");
  gen_cmd->add_option("--kappa", gen_args.kappa, "Target condition number (overrides --nu)");
  gen_cmd->add_option("--seed", gen_args.seed, "Seed (default $TWQP_SEED or 1)")->each([&](const std::string&) { gen_seed_given = true; });
  gen_cmd->add_option("--out", gen_args.out, "Output file (default stdout)");
  gen_cmd->add_option("--decomp-out", gen_args.decomp_out, "Also write the known decomposition (spike list for signal)");
  gen_cmd->add_option("--level-sigma", gen_args.level_sigma, "Signal level noise");
  gen_cmd->add_option("--noise-sigma", gen_args.noise_sigma, "Signal observation noise");
  gen_cmd->add_option("--spike-fraction", gen_args.spike_fraction, "Fraction of spiked observations");
  gen_cmd->add_option("--spike-sigmas", gen_args.spike_sigmas, "Spike amplitude in noise standard deviations");

  BenchArgs bench_args;
  bool bench_seed_given = false;
  auto* bench_cmd = app.add_subcommand("bench", "Generate and solve a sweep, one CSV row per trial");
  bench_cmd->add_option("--family", bench_args.family, "banded | lowtw");
  bench_cmd->add_option("--n", bench_args.n, "Dimensions")->delimiter(',');
  bench_cmd->add_option("--w", bench_args.w, "Bandwidths")->delimiter(',');
  bench_cmd->add_option("--omega", bench_args.omega, "Treewidth for lowtw");
  bench_cmd->add_option("--trials", bench_args.trials, "Trials per (n, w)");
  bench_cmd->add_option("--kappa", bench_args.kappa, "Target condition number");
  bench_cmd->add_option("--nu", bench_args.nu, "Fixed diagonal shift instead of a target condition number");
  bench_cmd->add_option("--seed", bench_args.seed, "Base seed; trial t uses seed + t")->each([&](const std::string&) { bench_seed_given = true; });
  bench_cmd->add_option("--workers", bench_args.threads, "Concurrent solves (default: all cores)");
  bench_cmd->add_option("--prune", bench_args.prune, "exact | path | auto | none");
  bench_cmd->add_option("--decomp", bench_args.decomp, "auto | banded | given");
  bench_cmd->add_flag("--omit-timing", bench_args.omit_timing, "Drop the time column for byte-stable output");
  bench_cmd->add_option("--out", bench_args.out, "Output CSV (default stdout)");

  EsocArgs esoc_args;
  auto* esoc_cmd = app.add_subcommand("esoc", "Tune and run exponential smoothing with outlier correction");
  esoc_cmd->add_option("csv", esoc_args.csv, "timestamp,value CSV")->required();
  esoc_cmd->add_option("--beta-grid", esoc_args.betas, "Smoothing factors")->delimiter(',');
  esoc_cmd->add_option("--lambda-grid", esoc_args.lambdas, "Outlier penalties")->delimiter(',');
  esoc_cmd->add_option("--mu1", esoc_args.mu1, "Dynamics penalty");
  esoc_cmd->add_option("--mu2", esoc_args.mu2, "Ridge on the outlier vector");
  esoc_cmd->add_option("--split", esoc_args.split, "Training fraction");
  esoc_cmd->add_option("--workers", esoc_args.workers, "Concurrent grid cells (default: all cores)");
  esoc_cmd->add_option("--out", esoc_args.out, "Output directory for result.csv and summary.json (default: summary to stdout)");

  std::string bigm_in, bigm_u = "theory", bigm_out;
  auto* bigm_cmd = app.add_subcommand("export-bigm", "Write the big-M reformulation in LP format");
  bigm_cmd->add_option("instance", bigm_in, "Instance JSON")->required();
  bigm_cmd->add_option("--u", bigm_u, "Big-M constant, or theory");
  bigm_cmd->add_option("--out", bigm_out, "Output LP file (default stdout)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::Success& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    report("InputError", e.what());
    return 2;
  }

  try {
    if (threads > 0) omp_set_num_threads(threads);
    if (!gen_seed_given) gen_args.seed = default_seed();
    if (!bench_seed_given) bench_args.seed = default_seed();
    if (*solve_cmd) return cmd_solve(solve_args);
    if (*oracle_cmd) return cmd_oracle(oracle_in, oracle_out, oracle_exec);
    if (*gen_cmd) return cmd_gen(gen_args);
    if (*bench_cmd) return cmd_bench(bench_args);
    if (*esoc_cmd) return cmd_esoc(esoc_args);
    if (*bigm_cmd) return cmd_export_bigm(bigm_in, bigm_u, bigm_out);
  } catch (const Error& e) {
    report(e.kind(), e.what());
    return e.exit_code();
  } catch (const std::exception& e) {
    report("Error", e.what());
    return 1;
  }
  return 0;
}
