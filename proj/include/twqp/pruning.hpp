#pragma once

#include <span>

#include "twqp/pwq.hpp"

namespace twqp {

/// Lower bound on ‖α‖∞ at any real root of p1 − p2 (+∞ when no root exists).
double root_lower_bound(const QuadPiece& p1, const QuadPiece& p2);
double root_lower_bound(const PackedLayout& layout, std::span<const double> p1, std::span<const double> p2);

/// Pairwise pruning: whenever L(p_i, p_j) > U the piece with the larger
/// constant term is dropped; identical pieces keep the first copy.
PiecewiseQuad prune_exact(const PiecewiseQuad& f, double U, Exec exec = Exec::parallel);

/// Single pass that only compares each piece with the last kept one.
PiecewiseQuad prune_path_heuristic(const PiecewiseQuad& f, double U);

namespace kernels {

/// Survivor indices of the exact prune, in input order.
std::vector<std::size_t> prune_exact_serial(const PiecewiseQuad& f, double U);
std::vector<std::size_t> prune_exact_parallel(const PiecewiseQuad& f, double U);

}  // namespace kernels

}  // namespace twqp
