#pragma once

#include <cstddef>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "twqp/instance.hpp"
#include "twqp/pwq.hpp"
#include "twqp/treedec.hpp"

namespace twqp {

enum class PruneMode { exact, path_heuristic, automatic, none };
enum class BoundMode { theory, user, data, automatic };

std::string to_string(PruneMode mode);
PruneMode parse_prune_mode(const std::string& text);

/// Which form of the solution bound to use in theory mode.
struct BoundStructure {
  enum class Kind { banded, volume_growth };
  Kind kind = Kind::banded;
  int bandwidth = 0;    // banded; 0 means measure from the matrix
  double delta = 0.0;   // volume growth; 0 means fit from neighborhood sizes
  double gamma = 0.0;
};

struct SolveOptions {
  BoundMode bound_mode = BoundMode::automatic;
  /// Bounds on ‖x*‖∞ in the instance's own units. user_bound wins in
  /// automatic mode, then data_bound, then the theory bound.
  double user_bound = 0.0;
  double data_bound = 0.0;
  BoundStructure structure;
  PruneMode prune = PruneMode::automatic;
  bool store_parametric_costs = true;
  double tolerance = 1e-9;
  std::size_t max_pieces_per_bag = std::size_t{1} << 23;
  std::size_t max_total_bytes = std::size_t{2} << 30;
  Exec exec = Exec::parallel;
  /// Called after every prune with the bag label, the unpruned and the pruned function.
  std::function<void(int, const PiecewiseQuad&, const PiecewiseQuad&)> on_prune;
};

/// Constants of the inverse-decay bound: |[Q_II⁻¹]_ij| ≤ c1 · rho^dist(i, j).
struct DecayConstants {
  double c1 = 0.0;
  double rho = 0.0;
};
DecayConstants decay_constants(double mu_min, double kappa2);

double compute_U_theory(const Instance& inst, const BoundStructure& structure, const Diagnostics& diag);
double compute_U_theory(const Instance& inst, const BoundStructure& structure);

/// Runs the parametric DP on an instance whose variables already carry the
/// decomposition's labels. Returns x and z in label order; the objective
/// includes the instance offset.
Solution solve(const Instance& inst, const LabeledDecomposition& ld, double U, const SolveOptions& opts);

/// How solve_instance obtains its decomposition.
struct DecompositionChoice {
  enum class Kind { automatic, banded, given };
  Kind kind = Kind::automatic;
  int bandwidth = 0;
  TreeDecomposition tree;
  std::vector<int> root_order;
};

/// Everything solve() needs, derived from a user instance.
struct PreparedProblem {
  Instance instance;  // normalized, λ ≤ 0 folded, permuted to labels
  LabeledDecomposition ld;
  std::vector<double> scale;  // per original variable
  Diagnostics diagnostics;
  int bandwidth = 0;
  double U = 0.0;
};

PreparedProblem prepare(const Instance& inst, const DecompositionChoice& decomp, const SolveOptions& opts);

/// Full pipeline: fold λ ≤ 0, normalize, validate, decompose, solve, and map
/// the solution back to the original variables and scale.
Solution solve_instance(const Instance& inst, const DecompositionChoice& decomp = {}, const SolveOptions& opts = {});

/// Maps a solution of the prepared problem back to original variables.
Solution restore_solution(const PreparedProblem& prep, const Instance& original, Solution labeled);

/// max over i, j in `subset` of |[Q_II⁻¹]_ij| − c1·rho^dist(i, j), distances
/// taken in supp(Q). Nonpositive values mean the decay bound holds.
double decay_diagnostic(const SparseSymMatrix& q, std::span<const int> subset);

}  // namespace twqp
