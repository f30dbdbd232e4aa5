#include "twqp/pruning.hpp"

#include <cmath>
#include <limits>
#include <list>

#include "twqp/error.hpp"

namespace twqp {

namespace {

bool identical(std::span<const double> p1, std::span<const double> p2) {
  for (std::size_t t = 0; t < p1.size(); ++t)
    if (p1[t] != p2[t]) return false;
  return true;
}

double bound_from_norms(double abar, double bbar, double dbar) {
  // 2d̄ / (b̄ + √(b̄² + 4ād̄)) is the positive root of ā t² + b̄ t = d̄ without cancellation.
  const double denom = bbar + std::sqrt(bbar * bbar + 4.0 * abar * dbar);
  if (denom == 0.0) return dbar > 0.0 ? std::numeric_limits<double>::infinity() : 0.0;
  return 2.0 * dbar / denom;
}

enum class Verdict : unsigned char { keep, drop_j, drop_i };

Verdict compare(const PackedLayout& layout, std::span<const double> pi, std::span<const double> pj, double U) {
  if (identical(pi, pj)) return Verdict::drop_j;
  if (root_lower_bound(layout, pi, pj) > U) {
    return pi[layout.d()] <= pj[layout.d()] ? Verdict::drop_j : Verdict::drop_i;
  }
  return Verdict::keep;
}

}  // namespace

double root_lower_bound(const PackedLayout& layout, std::span<const double> p1, std::span<const double> p2) {
  double abar = 0.0;
  std::size_t t = 0;
  for (int i = 0; i < layout.dim; ++i) {
    abar += 0.5 * std::abs(p1[t] - p2[t]);
    ++t;
    for (int j = i + 1; j < layout.dim; ++j, ++t) abar += std::abs(p1[t] - p2[t]);
  }
  double bbar = 0.0;
  for (int i = 0; i < layout.dim; ++i) bbar += std::abs(p1[layout.b(i)] - p2[layout.b(i)]);
  const double dbar = std::abs(p1[layout.d()] - p2[layout.d()]);
  return bound_from_norms(abar, bbar, dbar);
}

double root_lower_bound(const QuadPiece& p1, const QuadPiece& p2) {
  if (p1.coords != p2.coords) throw InputError("pieces are defined over different coordinates");
  const double abar = 0.5 * (p1.a - p2.a).cwiseAbs().sum();
  const double bbar = (p1.b - p2.b).cwiseAbs().sum();
  const double dbar = std::abs(p1.d - p2.d);
  return bound_from_norms(abar, bbar, dbar);
}

namespace kernels {

std::vector<std::size_t> prune_exact_serial(const PiecewiseQuad& f, double U) {
  const auto& layout = f.layout();
  std::list<std::size_t> pending;
  for (std::size_t s = 0; s < f.size(); ++s) pending.push_back(s);
  std::vector<std::size_t> kept;
  while (!pending.empty()) {
    const std::size_t i = pending.front();
    pending.pop_front();
    bool keep_i = true;
    for (auto it = pending.begin(); it != pending.end();) {
      Verdict v = compare(layout, f.raw(i), f.raw(*it), U);
      if (v == Verdict::drop_j) {
        it = pending.erase(it);
      } else if (v == Verdict::drop_i) {
        keep_i = false;
        break;
      } else {
        ++it;
      }
    }
    if (keep_i) kept.push_back(i);
  }
  std::sort(kept.begin(), kept.end());
  return kept;
}

std::vector<std::size_t> prune_exact_parallel(const PiecewiseQuad& f, double U) {
  const auto& layout = f.layout();
  std::vector<std::size_t> pending(f.size());
  for (std::size_t s = 0; s < pending.size(); ++s) pending[s] = s;
  std::vector<std::size_t> kept;
  std::vector<Verdict> verdict;
  std::vector<std::size_t> next;
  std::size_t head = 0;
  while (head < pending.size()) {
    const std::size_t i = pending[head];
    const std::size_t rest = pending.size() - head - 1;
    verdict.assign(rest, Verdict::keep);
    // Verdicts depend only on the pair, so evaluating them all up front and
    // committing in order reproduces the sequential sweep exactly.
#pragma omp parallel for schedule(static) if (rest >= 512)
    for (std::size_t k = 0; k < rest; ++k) verdict[k] = compare(layout, f.raw(i), f.raw(pending[head + 1 + k]), U);

    next.clear();
    bool keep_i = true;
    std::size_t k = 0;
    for (; k < rest; ++k) {
      if (verdict[k] == Verdict::drop_i) {
        keep_i = false;
        break;
      }
      if (verdict[k] == Verdict::keep) next.push_back(pending[head + 1 + k]);
    }
    for (; k < rest; ++k) next.push_back(pending[head + 1 + k]);
    if (keep_i) kept.push_back(i);
    pending.swap(next);
    head = 0;
  }
  std::sort(kept.begin(), kept.end());
  return kept;
}

}  // namespace kernels

PiecewiseQuad prune_exact(const PiecewiseQuad& f, double U, Exec exec) {
  auto survivors = exec == Exec::serial ? kernels::prune_exact_serial(f, U) : kernels::prune_exact_parallel(f, U);
  PiecewiseQuad out = f;
  if (survivors.size() != f.size()) out.keep(survivors);
  return out;
}

PiecewiseQuad prune_path_heuristic(const PiecewiseQuad& f, double U) {
  const auto& layout = f.layout();
  std::vector<std::size_t> kept;
  for (std::size_t i = 0; i < f.size(); ++i) {
    if (kept.empty()) {
      kept.push_back(i);
      continue;
    }
    auto pi = f.raw(i);
    auto pj = f.raw(kept.back());
    if (identical(pi, pj)) continue;
    if (root_lower_bound(layout, pi, pj) > U) {
      if (pi[layout.d()] < pj[layout.d()]) kept.back() = i;
      continue;
    }
    kept.push_back(i);
  }
  PiecewiseQuad out = f;
  if (kept.size() != f.size()) out.keep(kept);
  return out;
}

}  // namespace twqp
