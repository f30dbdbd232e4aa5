#include <algorithm>
#include <atomic>
#include <cmath>

#include "twqp/error.hpp"
#include "twqp/pwq.hpp"

namespace twqp::kernels {

namespace {

// Below this many pieces the OpenMP fork costs more than the loop.
constexpr std::size_t kGrain = 256;

std::size_t idx(int i) { return static_cast<std::size_t>(i); }

std::vector<int> without(const std::vector<int>& coords, int k) {
  std::vector<int> out;
  for (int i = 0; i < static_cast<int>(coords.size()); ++i)
    if (i != k) out.push_back(coords[idx(i)]);
  return out;
}

[[noreturn]] void lost_definiteness(int u) {
  throw NumericalError("piece lost positive definiteness while eliminating node " + std::to_string(u + 1));
}

// Position of each of `sub`'s coordinates inside `super` (both sorted).
std::vector<int> embedding(const std::vector<int>& sub, const std::vector<int>& super) {
  std::vector<int> pos;
  for (int node : sub) {
    auto it = std::lower_bound(super.begin(), super.end(), node);
    pos.push_back(static_cast<int>(it - super.begin()));
  }
  return pos;
}

void add_embedded(QuadPiece& target, const QuadPiece& p, const std::vector<int>& pos, double sign) {
  for (int i = 0; i < p.dim(); ++i) {
    for (int j = 0; j < p.dim(); ++j) target.a(pos[idx(i)], pos[idx(j)]) += sign * p.a(i, j);
    target.b(pos[idx(i)]) += sign * p.b(i);
  }
  target.d += sign * p.d;
}

// Packed index of each coefficient of a piece over `sub` inside a piece over `super`.
std::vector<std::size_t> packed_embedding(const std::vector<int>& sub, const std::vector<int>& super) {
  auto pos = embedding(sub, super);
  PackedLayout in{static_cast<int>(sub.size())};
  PackedLayout out{static_cast<int>(super.size())};
  std::vector<std::size_t> map(in.stride());
  for (int i = 0; i < in.dim; ++i) {
    for (int j = i; j < in.dim; ++j) map[in.a(i, j)] = out.a(pos[idx(i)], pos[idx(j)]);
    map[in.b(i)] = out.b(pos[idx(i)]);
  }
  map[in.d()] = out.d();
  return map;
}

}  // namespace

PiecewiseQuad eliminate_serial(const PiecewiseQuad& f, int u, double lambda_u, bool has_indicator) {
  const int k = f.position(u);
  const int m = f.dim() - 1;
  PiecewiseQuad out(without(f.coords(), k));
  std::vector<int> keep;
  for (int i = 0; i <= m; ++i)
    if (i != k) keep.push_back(i);

  auto restricted = [&](const QuadPiece& p) {
    QuadPiece r;
    r.coords = out.coords();
    r.a.resize(m, m);
    r.b.resize(m);
    for (int i = 0; i < m; ++i) {
      for (int j = 0; j < m; ++j) r.a(i, j) = p.a(keep[idx(i)], keep[idx(j)]);
      r.b(i) = p.b(keep[idx(i)]);
    }
    r.d = p.d;
    return r;
  };

  if (has_indicator) {
    for (std::size_t s = 0; s < f.size(); ++s) out.push_back(restricted(f.piece(s)));
  }
  for (std::size_t s = 0; s < f.size(); ++s) {
    QuadPiece p = f.piece(s);
    const double a = p.a(k, k);
    if (!(a > 0.0)) lost_definiteness(u);
    QuadPiece r = restricted(p);
    Eigen::VectorXd v(m);
    for (int i = 0; i < m; ++i) v(i) = p.a(keep[idx(i)], k);
    const double bk = p.b(k);
    r.a -= v * v.transpose() / a;
    r.b -= (bk / a) * v;
    r.d = p.d - bk * bk / (2.0 * a) + (has_indicator ? lambda_u : 0.0);
    out.push_back(r);
  }
  return out;
}

PiecewiseQuad eliminate_parallel(const PiecewiseQuad& f, int u, double lambda_u, bool has_indicator) {
  const int k = f.position(u);
  const PackedLayout& in = f.layout();
  PiecewiseQuad out(without(f.coords(), k));
  const PackedLayout& lo = out.layout();
  const int m = lo.dim;

  std::vector<std::size_t> src_a(lo.tri()), src_b(idx(m)), col_k(idx(m));
  for (int i = 0; i < m; ++i) {
    const int si = i < k ? i : i + 1;
    col_k[idx(i)] = in.a(si, k);
    src_b[idx(i)] = in.b(si);
    for (int j = i; j < m; ++j) src_a[lo.a(i, j)] = in.a(si, j < k ? j : j + 1);
  }
  const std::size_t kk = in.a(k, k);
  const std::size_t bk_at = in.b(k);
  const std::size_t n = f.size();
  const std::size_t free_base = has_indicator ? n : 0;
  const double extra = has_indicator ? lambda_u : 0.0;
  out.resize(has_indicator ? 2 * n : n);
  std::atomic<bool> failed{false};

#pragma omp parallel for schedule(static) if (n >= kGrain)
  for (std::size_t s = 0; s < n; ++s) {
    auto p = f.raw(s);
    if (has_indicator) {
      auto z = out.raw(s);
      for (std::size_t t = 0; t < src_a.size(); ++t) z[t] = p[src_a[t]];
      for (int i = 0; i < m; ++i) z[lo.b(i)] = p[src_b[idx(i)]];
      z[lo.d()] = p[in.d()];
    }
    auto r = out.raw(free_base + s);
    const double a = p[kk];
    if (!(a > 0.0)) {
      failed.store(true, std::memory_order_relaxed);
      continue;
    }
    const double inv = 1.0 / a;
    const double bk = p[bk_at];
    for (int i = 0; i < m; ++i) {
      const double vi = p[col_k[idx(i)]] * inv;
      for (int j = i; j < m; ++j) {
        const std::size_t t = lo.a(i, j);
        r[t] = p[src_a[t]] - vi * p[col_k[idx(j)]];
      }
      r[lo.b(i)] = p[src_b[idx(i)]] - bk * vi;
    }
    r[lo.d()] = p[in.d()] - 0.5 * bk * bk * inv + extra;
  }
  if (failed.load()) lost_definiteness(u);
  return out;
}

PiecewiseQuad combine_serial(const QuadPiece& h, std::span<const ParentTerm> parents) {
  QuadPiece base = h;
  std::vector<std::vector<int>> pos;
  std::size_t count = 1;
  for (const auto& p : parents) {
    pos.push_back(embedding(p.g->coords(), h.coords));
    add_embedded(base, *p.phi, pos.back(), -1.0);
    count *= p.g->size();
  }
  PiecewiseQuad out(h.coords);
  std::vector<std::size_t> choice(parents.size(), 0);
  for (std::size_t s = 0; s < count; ++s) {
    QuadPiece piece = base;
    for (std::size_t v = 0; v < parents.size(); ++v)
      add_embedded(piece, parents[v].g->piece(choice[v]), pos[v], 1.0);
    out.push_back(piece);
    // Advance the mixed-radix counter; the last parent varies fastest.
    for (std::size_t v = parents.size(); v-- > 0;) {
      if (++choice[v] < parents[v].g->size()) break;
      choice[v] = 0;
    }
  }
  return out;
}

PiecewiseQuad combine_parallel(const QuadPiece& h, std::span<const ParentTerm> parents) {
  PiecewiseQuad base_fn(h.coords);
  QuadPiece base = h;
  std::vector<std::vector<std::size_t>> maps;
  std::size_t count = 1;
  for (const auto& p : parents) {
    add_embedded(base, *p.phi, embedding(p.g->coords(), h.coords), -1.0);
    maps.push_back(packed_embedding(p.g->coords(), h.coords));
    count *= p.g->size();
  }
  base_fn.push_back(base);
  auto base_raw = base_fn.raw(0);

  PiecewiseQuad out(h.coords);
  out.resize(count);
  const std::size_t np = parents.size();

#pragma omp parallel for schedule(static) if (count >= kGrain)
  for (std::size_t s = 0; s < count; ++s) {
    auto r = out.raw(s);
    std::copy(base_raw.begin(), base_raw.end(), r.begin());
    std::size_t rem = s;
    for (std::size_t v = np; v-- > 0;) {
      const std::size_t radix = parents[v].g->size();
      auto g = parents[v].g->raw(rem % radix);
      rem /= radix;
      const auto& map = maps[v];
      for (std::size_t t = 0; t < map.size(); ++t) r[map[t]] += g[t];
    }
  }
  return out;
}

namespace {

bool better(const FirstCoordinateMin& cand, const FirstCoordinateMin& best) {
  if (cand.value < best.value) return true;
  return cand.value == best.value && !cand.free && best.free;
}

}  // namespace

FirstCoordinateMin minimize_first_serial(const PiecewiseQuad& f, std::span<const double> rest, double lambda,
                                         bool has_indicator) {
  if (f.empty()) throw InputError("cannot minimize an empty piecewise function");
  const int m = f.dim() - 1;
  Eigen::Map<const Eigen::VectorXd> y(rest.data(), m);
  FirstCoordinateMin best{std::numeric_limits<double>::infinity(), 0.0, true, 0};
  for (std::size_t s = 0; s < f.size(); ++s) {
    QuadPiece p = f.piece(s);
    const double a = p.a(0, 0);
    const double beta = p.b(0) + p.a.row(0).tail(m).dot(y);
    const double gamma = p.d + p.b.tail(m).dot(y) + 0.5 * y.dot(p.a.bottomRightCorner(m, m) * y);
    if (has_indicator) {
      FirstCoordinateMin zero{gamma, 0.0, false, s};
      if (better(zero, best)) best = zero;
    }
    if (!(a > 0.0)) lost_definiteness(f.coords().front());
    FirstCoordinateMin free{gamma - beta * beta / (2.0 * a) + (has_indicator ? lambda : 0.0), -beta / a, true, s};
    if (better(free, best)) best = free;
  }
  return best;
}

FirstCoordinateMin minimize_first_parallel(const PiecewiseQuad& f, std::span<const double> rest, double lambda,
                                           bool has_indicator) {
  if (f.empty()) throw InputError("cannot minimize an empty piecewise function");
  const PackedLayout& lay = f.layout();
  const int m = lay.dim - 1;
  const std::size_t n = f.size();
  std::vector<double> zero_value(n), free_value(n), free_x(n);
  std::atomic<bool> failed{false};

#pragma omp parallel for schedule(static) if (n >= kGrain)
  for (std::size_t s = 0; s < n; ++s) {
    auto p = f.raw(s);
    double beta = p[lay.b(0)];
    for (int j = 1; j <= m; ++j) beta += p[lay.a(0, j)] * rest[idx(j - 1)];
    double gamma = p[lay.d()];
    for (int i = 1; i <= m; ++i) {
      const double yi = rest[idx(i - 1)];
      double row = 0.5 * p[lay.a(i, i)] * yi;
      for (int j = i + 1; j <= m; ++j) row += p[lay.a(i, j)] * rest[idx(j - 1)];
      gamma += (row + p[lay.b(i)]) * yi;
    }
    const double a = p[lay.a(0, 0)];
    if (!(a > 0.0)) failed.store(true, std::memory_order_relaxed);
    zero_value[s] = gamma;
    free_value[s] = gamma - beta * beta / (2.0 * a) + (has_indicator ? lambda : 0.0);
    free_x[s] = -beta / a;
  }
  if (failed.load()) lost_definiteness(f.coords().front());

  FirstCoordinateMin best{std::numeric_limits<double>::infinity(), 0.0, true, 0};
  for (std::size_t s = 0; s < n; ++s) {
    if (has_indicator) {
      FirstCoordinateMin zero{zero_value[s], 0.0, false, s};
      if (better(zero, best)) best = zero;
    }
    FirstCoordinateMin free{free_value[s], free_x[s], true, s};
    if (better(free, best)) best = free;
  }
  return best;
}

}  // namespace twqp::kernels
