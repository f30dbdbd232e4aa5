// Acceptance gate: one line per criterion, nonzero exit when any criterion fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <functional>
#include <map>
#include <string>
#include <vector>

#include "twqp/error.hpp"
#include "twqp/esoc.hpp"
#include "twqp/gen.hpp"
#include "twqp/oracle.hpp"
#include "twqp/solver.hpp"

using namespace twqp;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

struct Outcome {
  enum { pass, fail, skip } status = pass;
  std::string detail;
};

Outcome fail(std::string d) { return {Outcome::fail, std::move(d)}; }
Outcome verdict(bool ok, std::string d) { return {ok ? Outcome::pass : Outcome::fail, std::move(d)}; }

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

// Small instances covering four λ regimes, with some variables lacking an indicator.
std::vector<Instance> oracle_suite() {
  std::vector<Instance> out;
  for (std::uint64_t k = 0; k < 200; ++k) {
    Rng rng(1000 + k);
    const int n = 2 + static_cast<int>(rng.below(13));
    const int w = std::min(n - 1, 1 + static_cast<int>(rng.below(3)));
    Instance inst = gen_banded(n, w, rng.uniform(0.05, 2.0), 7000 + k).instance;
    const int regime = static_cast<int>(k % 4);
    for (auto& l : inst.lambda) {
      if (regime == 0) l = rng.uniform(0.01, 0.5);
      if (regime == 2) l = rng.uniform(20.0, 60.0);
      if (regime == 3) l = rng.uniform(-1.0, 6.0);
    }
    if (k % 3 == 0)
      for (int i = 0; i < n; ++i)
        if (rng.uniform() < 0.2) inst.indicator[static_cast<std::size_t>(i)] = false;
    inst.offset = rng.uniform(-1.0, 1.0);
    out.push_back(std::move(inst));
  }
  return out;
}

SolveOptions prune_opts(PruneMode mode) {
  SolveOptions o;
  o.prune = mode;
  return o;
}

Outcome oracle_equivalence(const std::vector<Instance>& suite, const std::vector<Solution>& truth) {
  const auto t0 = Clock::now();
  int bad_value = 0, bad_recovery = 0;
  double worst = 0.0;
  for (std::size_t k = 0; k < suite.size(); ++k) {
    const double fstar = truth[k].objective;
    const Solution s = solve_instance(suite[k]);
    const double gap = std::abs(s.objective - fstar) / (1.0 + std::abs(fstar));
    worst = std::max(worst, gap);
    if (gap > 1e-6) ++bad_value;
    const double rec = evaluate_objective(suite[k], s.x, s.z);
    if (std::abs(rec - s.objective) > 1e-8 * (1.0 + std::abs(fstar))) ++bad_recovery;
  }
  const double secs = seconds_since(t0);
  return verdict(bad_value == 0 && bad_recovery == 0 && secs < 120,
                 fmt("%zu instances, %d value mismatches (worst rel gap %.2e), %d recovery mismatches, %.1f s",
                     suite.size(), bad_value, worst, bad_recovery, secs));
}

Outcome no_prune_equals_exact(const std::vector<Instance>& suite) {
  int bad = 0;
  double worst = 0.0;
  for (const auto& inst : suite) {
    const double a = solve_instance(inst, {}, prune_opts(PruneMode::none)).objective;
    const double b = solve_instance(inst, {}, prune_opts(PruneMode::exact)).objective;
    const double d = std::abs(a - b) / (1.0 + std::abs(a));
    worst = std::max(worst, d);
    if (d > 1e-9) ++bad;
  }
  return verdict(bad == 0, fmt("%d of %zu differ beyond 1e-9 (worst %.2e)", bad, suite.size(), worst));
}

Outcome pruning_soundness() {
  int checked = 0, bad = 0;
  double worst = 0.0;
  for (std::uint64_t k = 0; k < 50; ++k) {
    Rng rng(500 + k);
    const int n = 4 + static_cast<int>(rng.below(9));
    const int w = std::min(n - 1, 1 + static_cast<int>(rng.below(3)));
    Instance inst = gen_banded(n, w, rng.uniform(0.05, 1.0), 900 + k).instance;
    for (auto& l : inst.lambda) l = rng.uniform(0.05, 4.0);
    SolveOptions opts = prune_opts(PruneMode::exact);
    const PreparedProblem prep = prepare(inst, {}, opts);
    opts.on_prune = [&](int, const PiecewiseQuad& full, const PiecewiseQuad& pruned) {
      std::vector<double> a(static_cast<std::size_t>(full.dim()));
      for (int p = 0; p < 200; ++p) {
        for (auto& v : a) v = rng.uniform(-prep.U, prep.U);
        const double d = std::abs(eval(full, a).value - eval(pruned, a).value);
        worst = std::max(worst, d);
        if (d > 1e-8) ++bad;
        ++checked;
      }
    };
    solve(prep.instance, prep.ld, prep.U, opts);
  }
  return verdict(bad == 0, fmt("%d of %d sampled points differ (worst %.2e)", bad, checked, worst));
}

Outcome theory_bound_holds(const std::vector<Instance>& suite) {
  int bad = 0;
  double tightest = 0.0;
  for (const auto& inst : suite) {
    SolveOptions o;
    o.bound_mode = BoundMode::theory;
    const PreparedProblem prep = prepare(inst, {}, o);
    const Solution s = brute_force(prep.instance);
    double m = 0.0;
    for (double v : s.x) m = std::max(m, std::abs(v));
    tightest = std::max(tightest, m / prep.U);
    if (m > prep.U) ++bad;
  }
  return verdict(bad == 0, fmt("%d violations over %zu instances (max |x*|/U = %.3f)", bad, suite.size(), tightest));
}

Outcome decay_diagnostic_holds() {
  int bad = 0, samples = 0;
  double worst = -1e300;
  for (std::uint64_t k = 0; k < 50; ++k) {
    Rng rng(300 + k);
    const int n = 20 + static_cast<int>(rng.below(181));
    const double nu = rng.uniform(0.05, 2.0);
    Instance inst = k % 2 == 0 ? gen_banded(n, 1 + static_cast<int>(rng.below(4)), nu, k).instance
                               : gen_low_treewidth(n, 4, 1 + static_cast<int>(rng.below(3)), nu, k).instance;
    std::vector<std::vector<int>> subsets;
    std::vector<int> all(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) all[static_cast<std::size_t>(i)] = i;
    subsets.push_back(all);
    for (int s = 0; s < 4; ++s) {
      std::vector<int> sub;
      const double keep = rng.uniform(0.2, 0.9);
      for (int i = 0; i < n; ++i)
        if (rng.uniform() < keep) sub.push_back(i);
      if (!sub.empty()) subsets.push_back(sub);
    }
    for (const auto& sub : subsets) {
      const double d = decay_diagnostic(inst.q, sub);
      worst = std::max(worst, d);
      if (d > 1e-12) ++bad;
      ++samples;
    }
  }
  return verdict(bad == 0, fmt("%d violations over %d submatrices of 50 matrices (max excess %.2e)", bad, samples,
                               worst));
}

GeneratedInstance table_instance(int n, int w, std::uint64_t seed) {
  GenSpec spec;
  spec.n = n;
  spec.w = w;
  spec.target_kappa = 7.0;
  spec.seed = seed;
  return generate(spec);
}

Outcome retained_pieces() {
  std::map<int, double> mean;
  for (int w : {2, 4}) {
    double total = 0.0;
    for (std::uint64_t t = 0; t < 3; ++t) {
      auto g = table_instance(1000, w, 40 + t);
      total += solve_instance(g.instance).stats.mean_retained;
    }
    mean[w] = total / 3.0;
  }
  return verdict(mean[2] <= 200 && mean[4] <= 5000,
                 fmt("mean retained %.1f at w=2 (limit 200), %.1f at w=4 (limit 5000)", mean[2], mean[4]));
}

Outcome linear_scaling() {
  // Times the dynamic program only; generation and spectrum checks are excluded.
  auto total_time = [](int n) {
    double secs = 0.0;
    for (std::uint64_t t = 0; t < 5; ++t) {
      auto g = table_instance(n, 2, 60 + t);
      const SolveOptions opts;
      const PreparedProblem prep = prepare(g.instance, {}, opts);
      for (int rep = 0; rep < 3; ++rep) secs += solve(prep.instance, prep.ld, prep.U, opts).stats.seconds;
    }
    return secs;
  };
  total_time(500);  // warm-up
  const double small = total_time(500);
  const double large = total_time(2000);
  const double ratio = large / small;
  return verdict(ratio >= 2.0 && ratio <= 8.0,
                 fmt("time(n=2000)/time(n=500) = %.2f (%.3f s / %.3f s over 5 trials)", ratio, large, small));
}

Outcome treewidth_vs_banded() {
  int wins = 0;
  std::string detail;
  for (std::uint64_t t = 0; t < 5; ++t) {
    auto g = gen_low_treewidth(1000, 4, 2, 1.0, 80 + t);
    // The automatic choice finds the width-2 tree on this pattern.
    DecompositionChoice banded;
    banded.kind = DecompositionChoice::Kind::banded;
    banded.bandwidth = 4;
    const Solution tree = solve_instance(g.instance);
    if (tree.stats.width != 2) return fail(fmt("automatic decomposition has width %d", tree.stats.width));
    const double low = tree.stats.mean_retained;
    const double band = solve_instance(g.instance, banded).stats.mean_retained;
    if (low < band) ++wins;
    detail += fmt("%s%.1f/%.1f", t == 0 ? "" : " ", low, band);
  }
  return verdict(wins >= 4, fmt("width-2 decomposition wins %d of 5 (mean retained width2/banded: %s)", wins,
                                detail.c_str()));
}

double median3(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  return v[v.size() / 2];
}

Outcome u_sweep() {
  // Runtime and retained pieces along a decreasing U grid on a mid-size instance.
  auto g = table_instance(600, 3, 91);
  SolveOptions base = prune_opts(PruneMode::exact);
  base.bound_mode = BoundMode::theory;
  const PreparedProblem prep = prepare(g.instance, {}, base);
  std::vector<double> fractions{1.0, 0.3, 0.1, 0.03, 0.01};
  std::vector<double> times, pieces;
  for (double f : fractions) {
    std::vector<double> runs;
    double retained = 0.0;
    for (int r = 0; r < 3; ++r) {
      const Solution s = solve(prep.instance, prep.ld, f * prep.U, base);
      runs.push_back(s.stats.seconds);
      retained = s.stats.mean_retained;
    }
    times.push_back(median3(runs));
    pieces.push_back(retained);
  }
  bool monotone = true;
  for (std::size_t k = 1; k < fractions.size(); ++k) {
    if (pieces[k] > pieces[k - 1]) monotone = false;
    if (times[k] > 1.10 * times[k - 1] + 1e-3) monotone = false;
  }
  int gaps = 0;
  for (std::uint64_t k = 0; k < 40; ++k) {
    Rng rng(2000 + k);
    const int n = 4 + static_cast<int>(rng.below(9));
    Instance inst = gen_banded(n, std::min(n - 1, 2), rng.uniform(0.1, 1.0), 3000 + k).instance;
    SolveOptions o = prune_opts(PruneMode::exact);
    o.bound_mode = BoundMode::theory;
    const double f = solve_instance(inst, {}, o).objective;
    const double ref = brute_force(inst).objective;
    if (std::abs(f - ref) > 1e-9 * (1.0 + std::abs(ref))) ++gaps;
  }
  std::string trace;
  for (std::size_t k = 0; k < fractions.size(); ++k)
    trace += fmt("%s%.2gU:%.1f/%.4fs", k == 0 ? "" : " ", fractions[k], pieces[k], times[k]);
  return verdict(monotone && gaps == 0, fmt("%s; oracle gaps at U_theory: %d of 40 (%s)",
                                            monotone ? "monotone" : "not monotone", gaps, trace.c_str()));
}

struct EsocRun {
  SyntheticSignal signal;
  EsocReport report;
  double seconds = 0.0;
};

EsocRun esoc_synthetic() {
  EsocRun run;
  run.signal = gen_ses_signal(500, 0.3, 1.0, 0.05, 10.0, 2024);
  const auto t0 = Clock::now();
  run.report = run_esoc(run.signal.series, 0.5);
  run.seconds = seconds_since(t0);
  return run;
}

Outcome esoc_quality(const EsocRun& run) {
  const auto& rep = run.report;
  int flagged = 0;
  for (int t : run.signal.spikes)
    if (rep.esoc.outlier[static_cast<std::size_t>(t)]) ++flagged;
  const double recall = static_cast<double>(flagged) / static_cast<double>(run.signal.spikes.size());
  const double ratio = rep.test_mse_esoc / rep.test_mse_ses;
  return verdict(ratio < 0.25 && recall >= 0.9 && run.seconds < 300,
                 fmt("test MSE ESOC %.3f vs SES %.3f (ratio %.3f), spikes flagged %d/%zu, %.1f s", rep.test_mse_esoc,
                     rep.test_mse_ses, ratio, flagged, run.signal.spikes.size(), run.seconds));
}

Outcome esoc_paper_scale(const EsocRun& tuned) {
  auto sig = gen_ses_signal(1000, 0.3, 1.0, 0.05, 10.0, 77);
  const auto t0 = Clock::now();
  auto r = solve_esoc(sig.series, tuned.report.tuning.best);
  const double secs = seconds_since(t0);
  return verdict(secs < 300, fmt("T=1000 solve in %.2f s (max retained %zu)", secs, r.stats.max_retained));
}

Outcome nab_ordering() {
  const char* dir = std::getenv("TWQP_NAB_DIR");
  if (dir == nullptr || *dir == '\0') return {Outcome::skip, "set TWQP_NAB_DIR to the NAB csv directory to run"};
  std::vector<std::filesystem::path> files;
  for (const auto& e : std::filesystem::directory_iterator(dir))
    if (e.path().extension() == ".csv") files.push_back(e.path());
  std::sort(files.begin(), files.end());
  if (files.empty()) return fail(std::string("no csv files in ") + dir);
  int ok = 0;
  std::string detail;
  for (const auto& f : files) {
    auto rep = run_esoc(ingest_csv(f.string()), 0.5);
    const bool good = rep.train_mse_esoc <= rep.train_mse_ses && rep.test_mse_esoc <= rep.test_mse_ses;
    if (good) ++ok;
    detail += fmt(" %s[%.3g/%.3g train, %.3g/%.3g test]", f.stem().c_str(), rep.train_mse_esoc, rep.train_mse_ses,
                  rep.test_mse_esoc, rep.test_mse_ses);
  }
  return verdict(ok == static_cast<int>(files.size()),
                 fmt("ESOC <= SES on %d of %zu signals;", ok, files.size()) + detail);
}

}  // namespace

int main() {
  int failures = 0;
  auto report = [&](const char* name, const std::function<Outcome()>& check) {
    Outcome o;
    const auto t0 = Clock::now();
    try {
      o = check();
    } catch (const std::exception& e) {
      o = fail(std::string("threw: ") + e.what());
    }
    const char* tag = o.status == Outcome::pass ? "PASS" : o.status == Outcome::fail ? "FAIL" : "SKIP";
    if (o.status == Outcome::fail) ++failures;
    std::printf("[%s] %s: %s (%.1f s)\n", tag, name, o.detail.c_str(), seconds_since(t0));
    std::fflush(stdout);
  };

  const auto suite = oracle_suite();
  std::vector<Solution> truth;
  for (const auto& inst : suite) truth.push_back(brute_force(inst));

  report("oracle_equivalence", [&] { return oracle_equivalence(suite, truth); });
  report("no_prune_equals_exact_prune", [&] { return no_prune_equals_exact(suite); });
  report("pruning_soundness", pruning_soundness);
  report("solution_bound", [&] { return theory_bound_holds(suite); });
  report("inverse_decay", decay_diagnostic_holds);
  report("retained_pieces_n1000", retained_pieces);
  report("linear_scaling", linear_scaling);
  report("treewidth_vs_banded", treewidth_vs_banded);
  report("u_sweep", u_sweep);
  EsocRun esoc;
  report("esoc_synthetic_quality", [&] {
    esoc = esoc_synthetic();
    return esoc_quality(esoc);
  });
  report("esoc_T1000_runtime", [&] { return esoc_paper_scale(esoc); });
  report("nab_ordering", nab_ordering);

  std::printf("%d criterion(s) failed\n", failures);
  return failures == 0 ? 0 : 1;
}
