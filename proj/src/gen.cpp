#include "twqp/gen.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numbers>
#include <set>

#include "twqp/error.hpp"

namespace twqp {

namespace {

constexpr int kDenseLimit = 4096;

std::size_t idx(int i) { return static_cast<std::size_t>(i); }

struct Extremes {
  double lo = 0.0;
  double hi = 0.0;
};

// Smallest and largest eigenvalue of a symmetric matrix that may be indefinite.
Extremes extremes(const SparseSymMatrix& m) {
  if (m.size() <= kDenseLimit) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(m.to_dense(), Eigen::EigenvaluesOnly);
    return {es.eigenvalues().minCoeff(), es.eigenvalues().maxCoeff()};
  }
  Extremes e{std::numeric_limits<double>::infinity(), -std::numeric_limits<double>::infinity()};
  for (int i = 0; i < m.size(); ++i) {
    double r = 0.0;
    for (const auto& nb : m.row(i)) r += std::abs(nb.value);
    e.lo = std::min(e.lo, m.diag(i) - r);
    e.hi = std::max(e.hi, m.diag(i) + r);
  }
  return e;
}

SparseSymMatrix shifted(const std::map<std::pair<int, int>, double>& entries, int n, double nu) {
  std::vector<MatrixEntry> list;
  list.reserve(entries.size());
  for (const auto& [key, value] : entries) list.push_back({key.first, key.second, key.first == key.second ? value + nu : value});
  return SparseSymMatrix::from_entries(n, list);
}

}  // namespace

std::uint64_t Rng::below(std::uint64_t bound) {
  // Rejection keeps the draw unbiased.
  const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() - std::numeric_limits<std::uint64_t>::max() % bound;
  std::uint64_t v;
  do v = engine_();
  while (v >= limit);
  return v % bound;
}

double Rng::normal() {
  if (has_spare_) {
    has_spare_ = false;
    return spare_;
  }
  double u1;
  do u1 = uniform();
  while (u1 <= 0.0);
  const double u2 = uniform();
  const double r = std::sqrt(-2.0 * std::log(u1));
  spare_ = r * std::sin(2.0 * std::numbers::pi * u2);
  has_spare_ = true;
  return r * std::cos(2.0 * std::numbers::pi * u2);
}

LowTreewidthPattern low_treewidth_pattern(int n, int w, int omega) {
  if (w < 1 || n <= w) throw InputError("low-treewidth pattern needs n > w >= 1");
  if (omega < 1 || omega > w) throw InputError("treewidth target must lie in [1, w]");
  LowTreewidthPattern p;
  if (omega == w) {
    for (int i = 0; i < n; ++i)
      for (int j = i + 1; j <= std::min(n - 1, i + w); ++j) p.edges.emplace_back(i, j);
    p.decomposition = path_decomposition_banded(n, w);
    return p;
  }

  std::set<std::pair<int, int>> edges;
  auto add_edge = [&](int a, int b) {
    if (a < n && b < n && a != b) edges.insert({std::min(a, b), std::max(a, b)});
  };
  std::vector<std::vector<int>> path;
  auto add_bag = [&](std::vector<int> bag) {
    std::erase_if(bag, [&](int v) { return v >= n; });
    std::sort(bag.begin(), bag.end());
    if (!bag.empty()) path.push_back(std::move(bag));
  };

  for (int base = 0; base < n; base += w) {
    std::vector<int> spine, next;
    for (int i = 0; i < omega; ++i) {
      spine.push_back(base + i);
      next.push_back(base + w + i);
    }
    for (int a = 0; a < omega; ++a)
      for (int b = a + 1; b < omega; ++b) add_edge(spine[idx(a)], spine[idx(b)]);
    for (int pend = base + omega; pend < base + w; ++pend) {
      for (int s : spine) add_edge(s, pend);
      auto bag = spine;
      bag.push_back(pend);
      add_bag(bag);
    }
    for (int i = 0; i < omega; ++i) add_edge(spine[idx(i)], next[idx(i)]);
    // Hand the spine over to the next block one node at a time.
    for (int i = 0; i < omega; ++i) {
      std::vector<int> bag(spine.begin() + i, spine.end());
      bag.insert(bag.end(), next.begin(), next.begin() + i + 1);
      add_bag(bag);
    }
  }
  p.edges.assign(edges.begin(), edges.end());

  TreeDecomposition raw;
  // Truncation can leave consecutive duplicates and nested bags; balance
  // cleans those up.
  raw.bags = std::move(path);
  raw.child.resize(raw.bags.size());
  for (std::size_t b = 0; b < raw.bags.size(); ++b) raw.child[b] = static_cast<int>(b) + 1;
  raw.child.back() = -1;
  p.decomposition = balance(raw, n);
  return p;
}

GeneratedInstance generate(const GenSpec& spec) {
  const int n = spec.n;
  const int w = spec.w;
  const int omega = spec.omega < 0 ? w : spec.omega;
  if (w < 1 || n <= w) throw InputError("generator needs n > w >= 1");
  if (omega < 1 || omega > w) throw InputError("treewidth target must lie in [1, w]");
  if (spec.target_kappa <= 0.0 && !(spec.nu > 0.0)) throw InputError("nu must be positive");
  if (spec.target_kappa > 0.0 && spec.target_kappa <= 1.0) throw InputError("target condition number must exceed 1");

  Rng rng(spec.seed);
  // Row i of Y holds columns i..min(n-1, i+w).
  std::vector<std::vector<double>> y(idx(n));
  for (int i = 0; i < n; ++i) {
    const int width = std::min(n - 1, i + w) - i + 1;
    y[idx(i)].resize(idx(width));
    for (auto& v : y[idx(i)]) v = rng.uniform(-1.0, 1.0);
  }
  std::vector<double> c(idx(n)), lambda(idx(n));
  for (auto& v : c) v = rng.uniform(-spec.c_bound, spec.c_bound);
  for (auto& v : lambda) v = rng.uniform(spec.lambda_lo, spec.lambda_hi);

  std::map<std::pair<int, int>, double> m;
  for (int i = 0; i < n; ++i) m[{i, i}] = 0.0;
  for (int i = 0; i < n; ++i) {
    const auto& row = y[idx(i)];
    for (std::size_t a = 0; a < row.size(); ++a)
      for (std::size_t b = a; b < row.size(); ++b) m[{i + static_cast<int>(a), i + static_cast<int>(b)}] += row[a] * row[b];
  }

  GeneratedInstance out;
  out.seed = spec.seed;
  LowTreewidthPattern pattern = low_treewidth_pattern(n, w, omega);
  out.decomposition = std::move(pattern.decomposition);
  double floor_shift = 0.0;
  if (omega < w) {
    std::set<std::pair<int, int>> keep(pattern.edges.begin(), pattern.edges.end());
    std::erase_if(m, [&](const auto& kv) { return kv.first.first != kv.first.second && !keep.count(kv.first); });
  }
  std::erase_if(m, [](const auto& kv) { return kv.first.first != kv.first.second && kv.second == 0.0; });

  const SparseSymMatrix base = shifted(m, n, 0.0);
  const Extremes ext = extremes(base);
  if (omega < w) floor_shift = std::max(0.0, -ext.lo);

  double nu = spec.nu + floor_shift;
  if (spec.target_kappa > 0.0) {
    const double kappa = spec.target_kappa;
    if (n <= kDenseLimit) {
      // κ(M + νI) = (hi + ν) / (lo + ν) solves for ν in closed form.
      nu = (ext.hi - kappa * ext.lo) / (kappa - 1.0);
    } else {
      double lo = floor_shift + 1e-12, hi = std::max(1.0, 2.0 * floor_shift);
      auto kappa_at = [&](double v) { return analyze_spectrum(shifted(m, n, v)).kappa2; };
      while (kappa_at(hi) > kappa) hi *= 2.0;
      for (int it = 0; it < 60 && hi - lo > 1e-6 * hi; ++it) {
        const double mid = 0.5 * (lo + hi);
        (kappa_at(mid) > kappa ? lo : hi) = mid;
      }
      nu = hi;
    }
  }
  out.nu = nu;
  out.instance = make_instance(shifted(m, n, nu), std::move(c), std::move(lambda));
  out.kappa2 = analyze_spectrum(out.instance.q).kappa2;
  return out;
}

GeneratedInstance gen_banded(int n, int w, double nu, std::uint64_t seed) {
  GenSpec spec;
  spec.n = n;
  spec.w = w;
  spec.nu = nu;
  spec.seed = seed;
  return generate(spec);
}

GeneratedInstance gen_low_treewidth(int n, int w, int omega, double nu, std::uint64_t seed) {
  GenSpec spec;
  spec.n = n;
  spec.w = w;
  spec.omega = omega;
  spec.nu = nu;
  spec.seed = seed;
  return generate(spec);
}

SyntheticSignal gen_ses_signal(int T, double level_sigma, double noise_sigma, double spike_fraction,
                               double spike_sigmas, std::uint64_t seed) {
  if (T < 2) throw InputError("signal needs at least 2 observations");
  if (!(spike_fraction >= 0.0 && spike_fraction < 1.0)) throw InputError("spike fraction must lie in [0, 1)");
  Rng rng(seed);
  SyntheticSignal s;
  s.noise_sigma = noise_sigma;
  s.series.y.resize(idx(T));
  double level = 0.0;
  for (int t = 0; t < T; ++t) {
    if (t > 0) level += level_sigma * rng.normal();
    s.series.y[idx(t)] = level + noise_sigma * rng.normal();
  }
  const int count = static_cast<int>(std::lround(spike_fraction * T));
  std::vector<int> pos(idx(T - 1));
  for (int t = 1; t < T; ++t) pos[idx(t - 1)] = t;
  for (int k = 0; k < count; ++k) {
    const auto j = idx(k) + rng.below(pos.size() - idx(k));
    std::swap(pos[idx(k)], pos[j]);
  }
  pos.resize(idx(count));
  std::sort(pos.begin(), pos.end());
  for (int t : pos) {
    const double sign = rng.uniform() < 0.5 ? -1.0 : 1.0;
    s.series.y[idx(t)] += sign * spike_sigmas * noise_sigma;
  }
  s.spikes = std::move(pos);
  return s;
}

}  // namespace twqp
