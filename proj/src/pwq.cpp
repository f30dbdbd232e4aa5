#include "twqp/pwq.hpp"

#include <algorithm>
#include <sstream>

#include "twqp/error.hpp"

namespace twqp {

namespace {

std::size_t idx(int i) { return static_cast<std::size_t>(i); }

}  // namespace

double QuadPiece::operator()(std::span<const double> alpha) const {
  Eigen::Map<const Eigen::VectorXd> x(alpha.data(), static_cast<Eigen::Index>(alpha.size()));
  return 0.5 * x.dot(a * x) + b.dot(x) + d;
}

double PackedLayout::eval(std::span<const double> p, std::span<const double> alpha) const {
  double value = p[d()];
  std::size_t t = 0;
  for (int i = 0; i < dim; ++i) {
    const double xi = alpha[idx(i)];
    double row = 0.5 * p[t++] * xi;
    for (int j = i + 1; j < dim; ++j) row += p[t++] * alpha[idx(j)];
    value += (row + p[b(i)]) * xi;
  }
  return value;
}

PiecewiseQuad::PiecewiseQuad(std::vector<int> coords)
    : coords_(std::move(coords)), layout_{static_cast<int>(coords_.size())}, stride_(layout_.stride()) {}

PiecewiseQuad::PiecewiseQuad(const QuadPiece& piece) : PiecewiseQuad(piece.coords) { push_back(piece); }

void PiecewiseQuad::push_back(const QuadPiece& p) {
  if (p.coords != coords_) throw InputError("piece coordinates differ from the function's coordinates");
  const auto base = data_.size();
  data_.resize(base + stride_, 0.0);
  double* out = data_.data() + base;
  for (int i = 0; i < dim(); ++i) {
    for (int j = i; j < dim(); ++j) out[layout_.a(i, j)] = p.a(i, j);
    out[layout_.b(i)] = p.b(i);
  }
  out[layout_.d()] = p.d;
}

void PiecewiseQuad::push_raw(std::span<const double> p) { data_.insert(data_.end(), p.begin(), p.end()); }

void PiecewiseQuad::resize(std::size_t count) { data_.resize(count * stride_, 0.0); }

void PiecewiseQuad::keep(std::span<const std::size_t> survivors) {
  std::vector<double> next(survivors.size() * stride_);
  for (std::size_t k = 0; k < survivors.size(); ++k) {
    auto src = raw(survivors[k]);
    std::copy(src.begin(), src.end(), next.begin() + static_cast<std::ptrdiff_t>(k * stride_));
  }
  data_ = std::move(next);
}

QuadPiece PiecewiseQuad::piece(std::size_t s) const {
  QuadPiece p;
  p.coords = coords_;
  const int k = dim();
  p.a.resize(k, k);
  p.b.resize(k);
  auto r = raw(s);
  for (int i = 0; i < k; ++i) {
    for (int j = i; j < k; ++j) {
      p.a(i, j) = r[layout_.a(i, j)];
      p.a(j, i) = r[layout_.a(i, j)];
    }
    p.b(i) = r[layout_.b(i)];
  }
  p.d = r[layout_.d()];
  return p;
}

int PiecewiseQuad::position(int node) const {
  auto it = std::lower_bound(coords_.begin(), coords_.end(), node);
  if (it == coords_.end() || *it != node) return -1;
  return static_cast<int>(it - coords_.begin());
}

EvalResult eval(const PiecewiseQuad& f, std::span<const double> alpha) {
  if (f.empty()) throw InputError("cannot evaluate an empty piecewise function");
  if (alpha.size() != f.coords().size()) throw InputError("evaluation point has the wrong dimension");
  EvalResult best{f.layout().eval(f.raw(0), alpha), 0};
  for (std::size_t s = 1; s < f.size(); ++s) {
    double v = f.layout().eval(f.raw(s), alpha);
    if (v < best.value) best = {v, s};
  }
  return best;
}

QuadPiece h_phi(const SparseSymMatrix& q, std::span<const double> c, std::span<const int> nodes) {
  QuadPiece p;
  p.coords.assign(nodes.begin(), nodes.end());
  p.a = q.principal_submatrix(nodes);
  p.b.resize(static_cast<Eigen::Index>(nodes.size()));
  for (std::size_t k = 0; k < nodes.size(); ++k) p.b(static_cast<Eigen::Index>(k)) = c[idx(nodes[k])];
  p.d = 0.0;
  return p;
}

PiecewiseQuad eliminate_with_indicator(const PiecewiseQuad& f, int u, double lambda_u, bool has_indicator,
                                       Exec exec) {
  if (f.position(u) < 0) {
    throw InputError("node " + std::to_string(u + 1) + " is not a coordinate of the function");
  }
  return exec == Exec::serial ? kernels::eliminate_serial(f, u, lambda_u, has_indicator)
                              : kernels::eliminate_parallel(f, u, lambda_u, has_indicator);
}

PiecewiseQuad combine(const QuadPiece& h, std::span<const ParentTerm> parents, Exec exec,
                      std::size_t max_pieces) {
  std::size_t count = 1;
  for (const auto& p : parents) {
    for (int node : p.g->coords()) {
      if (!std::binary_search(h.coords.begin(), h.coords.end(), node)) {
        throw InputError("parent coordinate " + std::to_string(node + 1) + " is not in the bag");
      }
    }
    if (p.phi->coords != p.g->coords()) throw InputError("parent correction has mismatched coordinates");
    const auto pieces = p.g->size();
    if (pieces != 0 && count > max_pieces / pieces) {
      throw ResourceCapExceeded("combined piece count exceeds the per-bag cap of " + std::to_string(max_pieces));
    }
    count *= pieces;
  }
  if (count > max_pieces) {
    throw ResourceCapExceeded("combined piece count " + std::to_string(count) + " exceeds the per-bag cap of " +
                              std::to_string(max_pieces));
  }
  return exec == Exec::serial ? kernels::combine_serial(h, parents) : kernels::combine_parallel(h, parents);
}

QuadPiece build_piece_direct(const Instance& inst, std::span<const int> bag, std::span<const int> j_s) {
  QuadPiece p = h_phi(inst.q, inst.c, bag);
  if (j_s.empty()) return p;
  const auto nb = static_cast<Eigen::Index>(bag.size());
  const auto nj = static_cast<Eigen::Index>(j_s.size());
  Eigen::MatrixXd qjj = inst.q.principal_submatrix(j_s);
  Eigen::MatrixXd qbj(nb, nj);
  Eigen::VectorXd cj(nj);
  for (Eigen::Index r = 0; r < nb; ++r)
    for (Eigen::Index s = 0; s < nj; ++s) qbj(r, s) = inst.q(bag[static_cast<std::size_t>(r)], j_s[static_cast<std::size_t>(s)]);
  for (Eigen::Index s = 0; s < nj; ++s) cj(s) = inst.c[idx(j_s[static_cast<std::size_t>(s)])];
  Eigen::LLT<Eigen::MatrixXd> llt(qjj);
  if (llt.info() != Eigen::Success) throw NumericalError("free-set submatrix is not positive definite");
  Eigen::MatrixXd x = llt.solve(qbj.transpose());
  Eigen::VectorXd y = llt.solve(cj);
  p.a -= qbj * x;
  p.a = 0.5 * (p.a + p.a.transpose()).eval();
  p.b -= qbj * y;
  p.d = -0.5 * cj.dot(y);
  for (int node : j_s)
    if (inst.indicator[idx(node)]) p.d += inst.lambda[idx(node)];
  return p;
}

}  // namespace twqp
