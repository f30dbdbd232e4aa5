#pragma once

#include <Eigen/Dense>
#include <Eigen/Sparse>
#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "twqp/graph.hpp"

namespace twqp {

/// One stored coefficient of a symmetric matrix; (i, j) and (j, i) are the same entry.
struct MatrixEntry {
  int i = 0;
  int j = 0;
  double value = 0.0;
};

/// Symmetric sparse matrix that stores each unordered pair once.
///
/// The diagonal is always present and strictly positive. Off-diagonal zeros
/// are dropped so that the sparsity pattern equals the support graph.
class SparseSymMatrix {
 public:
  struct Neighbor {
    int col;
    double value;
  };

  SparseSymMatrix() = default;

  /// Builds from entries in either triangle. Repeated pairs must agree,
  /// otherwise AsymmetricInput is thrown. Missing diagonals raise InputError;
  /// nonpositive diagonals raise NotPositiveDefinite.
  static SparseSymMatrix from_entries(int n, std::span<const MatrixEntry> entries);
  static SparseSymMatrix from_dense(const Eigen::MatrixXd& m, double symmetry_tol = 0.0);
  static SparseSymMatrix identity(int n);

  int size() const { return n_; }
  double diag(int i) const { return diag_[static_cast<std::size_t>(i)]; }
  std::span<const double> diagonal() const { return diag_; }
  /// Off-diagonal nonzeros of row i, sorted by column.
  std::span<const Neighbor> row(int i) const { return rows_[static_cast<std::size_t>(i)]; }
  double operator()(int i, int j) const;

  std::size_t offdiag_count() const;
  int bandwidth() const;

  /// Entries with i <= j, sorted row-major.
  std::vector<MatrixEntry> upper_entries() const;
  Eigen::MatrixXd to_dense() const;
  Eigen::SparseMatrix<double> to_eigen() const;
  Eigen::MatrixXd principal_submatrix(std::span<const int> idx) const;

  /// Returns P Q Pᵀ where node i moves to new_label[i].
  SparseSymMatrix permuted(std::span<const int> new_label) const;
  /// Returns D Q D with D = diag(s).
  SparseSymMatrix scaled(std::span<const double> s) const;

  Eigen::VectorXd multiply(const Eigen::VectorXd& x) const;
  double quadratic_form(std::span<const double> x) const;

 private:
  int n_ = 0;
  std::vector<double> diag_;
  std::vector<std::vector<Neighbor>> rows_;
};

/// One MIQP: min ½xᵀQx + cᵀx + Σ_{indicator} λ_i z_i + offset, x_i(1 − z_i) = 0.
struct Instance {
  SparseSymMatrix q;
  std::vector<double> c;
  std::vector<double> lambda;
  /// indicator[i] == false means x_i is always free and λ_i is ignored.
  std::vector<bool> indicator;
  double offset = 0.0;

  int size() const { return q.size(); }
  int indicator_count() const;
  /// Throws InputError when vector lengths disagree with Q.
  void check_shape() const;
};

/// Builds an instance with every variable carrying an indicator.
Instance make_instance(SparseSymMatrix q, std::vector<double> c, std::vector<double> lambda,
                       double offset = 0.0);

struct SolveStats {
  std::vector<std::size_t> pieces_before_prune;
  std::vector<std::size_t> pieces_after_prune;
  std::size_t max_retained = 0;
  double mean_retained = 0.0;
  double seconds = 0.0;
  double u_used = 0.0;
  int width = 0;
  std::string prune_mode;
  /// Objective of the recovered (x, z); equals `objective` up to rounding when U is valid.
  double recovered_objective = 0.0;
};

struct Solution {
  std::vector<double> x;
  std::vector<bool> z;
  double objective = 0.0;
  SolveStats stats;
};

/// ½xᵀQx + cᵀx + Σ λ_i z_i + offset. Throws InputError on a length mismatch
/// or when x_i != 0 while z_i is false.
double evaluate_objective(const Instance& inst, std::span<const double> x, const std::vector<bool>& z);

struct NormalizedInstance {
  Instance instance;
  /// scale[i] = sqrt(Q_ii); x_original = x_scaled / scale.
  std::vector<double> scale;
};

NormalizedInstance normalize_diagonal(const Instance& inst);

/// Turns indicators with λ ≤ 0 into free variables and moves λ into the offset.
Instance fix_nonpositive_lambda(const Instance& inst);

Graph support_graph(const SparseSymMatrix& q);

struct Diagnostics {
  double mu_min = 0.0;
  double mu_max = 0.0;
  double kappa2 = 0.0;
  double kappa_inf = 0.0;
  /// True when the numbers come from a dense eigensolve rather than bounds/estimates.
  bool exact = true;
};

/// Checks positive definiteness and returns spectral estimates. Dense
/// eigensolve for n <= 4096; otherwise Gershgorin bounds with sparse Cholesky
/// and iterative fallbacks.
Diagnostics validate(const Instance& inst);
Diagnostics analyze_spectrum(const SparseSymMatrix& q);

/// Reorders every per-variable field so that variable i becomes new_label[i].
Instance permute_instance(const Instance& inst, std::span<const int> new_label);

}  // namespace twqp
