#pragma once

#include <Eigen/Dense>
#include <cstddef>
#include <utility>
#include <span>
#include <vector>

#include "twqp/instance.hpp"

namespace twqp {

/// Selects between the serial reference kernels and the OpenMP kernels.
enum class Exec { serial, parallel };

/// p(α) = ½αᵀAα + bᵀα + d over the listed coordinates.
struct QuadPiece {
  std::vector<int> coords;
  Eigen::MatrixXd a;
  Eigen::VectorXd b;
  double d = 0.0;

  int dim() const { return static_cast<int>(coords.size()); }
  double operator()(std::span<const double> alpha) const;
};

/// Index arithmetic for one packed piece: upper triangle of A row by row,
/// then b, then d.
struct PackedLayout {
  int dim = 0;

  std::size_t tri() const { return static_cast<std::size_t>(dim) * static_cast<std::size_t>(dim + 1) / 2; }
  std::size_t stride() const { return tri() + static_cast<std::size_t>(dim) + 1; }
  std::size_t a(int i, int j) const {
    if (i > j) std::swap(i, j);
    return static_cast<std::size_t>(i * dim - i * (i - 1) / 2 + (j - i));
  }
  std::size_t b(int i) const { return tri() + static_cast<std::size_t>(i); }
  std::size_t d() const { return tri() + static_cast<std::size_t>(dim); }

  double eval(std::span<const double> p, std::span<const double> alpha) const;
};

/// f(α) = min_s p_s(α), all pieces sharing one sorted coordinate list.
class PiecewiseQuad {
 public:
  PiecewiseQuad() = default;
  explicit PiecewiseQuad(std::vector<int> coords);
  explicit PiecewiseQuad(const QuadPiece& piece);

  const std::vector<int>& coords() const { return coords_; }
  int dim() const { return layout_.dim; }
  const PackedLayout& layout() const { return layout_; }
  std::size_t stride() const { return stride_; }
  std::size_t size() const { return stride_ == 0 ? 0 : data_.size() / stride_; }
  bool empty() const { return data_.empty(); }
  std::size_t bytes() const { return data_.size() * sizeof(double); }

  std::span<const double> raw(std::size_t s) const { return {data_.data() + s * stride_, stride_}; }
  std::span<double> raw(std::size_t s) { return {data_.data() + s * stride_, stride_}; }
  double constant(std::size_t s) const { return data_[s * stride_ + stride_ - 1]; }

  void push_back(const QuadPiece& p);
  void push_raw(std::span<const double> p);
  /// Resizes to `count` pieces; new pieces are zero.
  void resize(std::size_t count);
  /// Keeps only the listed pieces, in the listed order.
  void keep(std::span<const std::size_t> survivors);
  QuadPiece piece(std::size_t s) const;
  int position(int node) const;

 private:
  std::vector<int> coords_;
  PackedLayout layout_;
  std::size_t stride_ = 1;
  std::vector<double> data_;
};

struct EvalResult {
  double value = 0.0;
  std::size_t piece = 0;
};

/// Minimum over pieces; lowest index wins ties. Throws InputError when empty.
EvalResult eval(const PiecewiseQuad& f, std::span<const double> alpha);

/// ½αᵀQ_SSα + c_Sᵀα over the node set S (sorted).
QuadPiece h_phi(const SparseSymMatrix& q, std::span<const double> c, std::span<const int> nodes);

/// g(α') = min_{x_u} f(x_u, α') + λ_u·1(x_u ≠ 0). Output lists every
/// zero-branch piece (input order) and then every free-branch piece.
PiecewiseQuad eliminate_with_indicator(const PiecewiseQuad& f, int u, double lambda_u, bool has_indicator,
                                       Exec exec = Exec::parallel);

struct ParentTerm {
  const PiecewiseQuad* g = nullptr;
  const QuadPiece* phi = nullptr;
};

/// f = h + Σ (g_v − φ_v), one piece per combination of parent pieces with the
/// first parent varying slowest. Throws ResourceCapExceeded past max_pieces.
PiecewiseQuad combine(const QuadPiece& h, std::span<const ParentTerm> parents, Exec exec = Exec::parallel,
                      std::size_t max_pieces = static_cast<std::size_t>(-1));

/// Direct Schur-complement piece for the free set J_s:
/// A = Q_BB − Q_BJ Q_JJ⁻¹ Q_JB, b = c_B − Q_BJ Q_JJ⁻¹ c_J, d = −½c_Jᵀ Q_JJ⁻¹ c_J + Σ_J λ.
QuadPiece build_piece_direct(const Instance& inst, std::span<const int> bag, std::span<const int> j_s);

namespace kernels {

/// Piece-by-piece Eigen implementations used as the reference for the packed kernels.
PiecewiseQuad eliminate_serial(const PiecewiseQuad& f, int u, double lambda_u, bool has_indicator);
PiecewiseQuad eliminate_parallel(const PiecewiseQuad& f, int u, double lambda_u, bool has_indicator);
PiecewiseQuad combine_serial(const QuadPiece& h, std::span<const ParentTerm> parents);
PiecewiseQuad combine_parallel(const QuadPiece& h, std::span<const ParentTerm> parents);

/// Best value of min_s min_{x} p_s(x, rest) + λ·1(x ≠ 0) over the first
/// coordinate with the others fixed to `rest`.
struct FirstCoordinateMin {
  double value = 0.0;
  double x = 0.0;
  bool free = false;
  std::size_t piece = 0;
};
FirstCoordinateMin minimize_first_serial(const PiecewiseQuad& f, std::span<const double> rest, double lambda,
                                         bool has_indicator);
FirstCoordinateMin minimize_first_parallel(const PiecewiseQuad& f, std::span<const double> rest, double lambda,
                                           bool has_indicator);

}  // namespace kernels

}  // namespace twqp
