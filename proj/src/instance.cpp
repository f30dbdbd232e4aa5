#include "twqp/instance.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <map>
#include <sstream>

#include "twqp/error.hpp"

namespace twqp {

namespace {

std::size_t idx(int i) { return static_cast<std::size_t>(i); }

}  // namespace

SparseSymMatrix SparseSymMatrix::from_entries(int n, std::span<const MatrixEntry> entries) {
  if (n < 1) throw InputError("matrix dimension must be at least 1");
  std::map<std::pair<int, int>, double> seen;
  for (const auto& e : entries) {
    if (e.i < 0 || e.j < 0 || e.i >= n || e.j >= n) {
      std::ostringstream msg;
      msg << "matrix entry (" << e.i + 1 << ", " << e.j + 1 << ") outside dimension " << n;
      throw InputError(msg.str());
    }
    if (!std::isfinite(e.value)) throw InputError("matrix entry is not finite");
    auto key = std::minmax(e.i, e.j);
    auto [it, inserted] = seen.emplace(std::pair<int, int>(key.first, key.second), e.value);
    if (!inserted && it->second != e.value) {
      std::ostringstream msg;
      msg << "conflicting values for entry (" << key.first + 1 << ", " << key.second + 1
          << "): " << it->second << " vs " << e.value;
      throw AsymmetricInput(msg.str());
    }
  }

  SparseSymMatrix m;
  m.n_ = n;
  m.diag_.assign(idx(n), 0.0);
  m.rows_.assign(idx(n), {});
  std::vector<bool> has_diag(idx(n), false);
  for (const auto& [key, value] : seen) {
    auto [i, j] = key;
    if (i == j) {
      m.diag_[idx(i)] = value;
      has_diag[idx(i)] = true;
    } else if (value != 0.0) {
      m.rows_[idx(i)].push_back({j, value});
      m.rows_[idx(j)].push_back({i, value});
    }
  }
  for (int i = 0; i < n; ++i) {
    if (!has_diag[idx(i)]) {
      throw InputError("missing diagonal entry " + std::to_string(i + 1));
    }
    if (!(m.diag_[idx(i)] > 0.0)) {
      throw NotPositiveDefinite("nonpositive diagonal entry " + std::to_string(i + 1));
    }
    std::sort(m.rows_[idx(i)].begin(), m.rows_[idx(i)].end(),
              [](const Neighbor& a, const Neighbor& b) { return a.col < b.col; });
  }
  return m;
}

SparseSymMatrix SparseSymMatrix::from_dense(const Eigen::MatrixXd& d, double symmetry_tol) {
  if (d.rows() != d.cols()) throw InputError("matrix is not square");
  const int n = static_cast<int>(d.rows());
  std::vector<MatrixEntry> entries;
  for (int i = 0; i < n; ++i) {
    for (int j = i; j < n; ++j) {
      double a = d(i, j), b = d(j, i);
      if (std::abs(a - b) > symmetry_tol * std::max(1.0, std::max(std::abs(a), std::abs(b)))) {
        std::ostringstream msg;
        msg << "matrix is not symmetric at (" << i + 1 << ", " << j + 1 << ")";
        throw AsymmetricInput(msg.str());
      }
      if (i == j || a != 0.0) entries.push_back({i, j, a});
    }
  }
  return from_entries(n, entries);
}

SparseSymMatrix SparseSymMatrix::identity(int n) {
  std::vector<MatrixEntry> entries;
  for (int i = 0; i < n; ++i) entries.push_back({i, i, 1.0});
  return from_entries(n, entries);
}

double SparseSymMatrix::operator()(int i, int j) const {
  if (i == j) return diag_[idx(i)];
  const auto& r = rows_[idx(i)];
  auto it = std::lower_bound(r.begin(), r.end(), j,
                             [](const Neighbor& nb, int col) { return nb.col < col; });
  return (it != r.end() && it->col == j) ? it->value : 0.0;
}

std::size_t SparseSymMatrix::offdiag_count() const {
  std::size_t total = 0;
  for (const auto& r : rows_) total += r.size();
  return total / 2;
}

int SparseSymMatrix::bandwidth() const {
  int w = 0;
  for (int i = 0; i < n_; ++i)
    for (const auto& nb : rows_[idx(i)]) w = std::max(w, std::abs(nb.col - i));
  return w;
}

std::vector<MatrixEntry> SparseSymMatrix::upper_entries() const {
  std::vector<MatrixEntry> out;
  for (int i = 0; i < n_; ++i) {
    out.push_back({i, i, diag_[idx(i)]});
    for (const auto& nb : rows_[idx(i)])
      if (nb.col > i) out.push_back({i, nb.col, nb.value});
  }
  return out;
}

Eigen::MatrixXd SparseSymMatrix::to_dense() const {
  Eigen::MatrixXd d = Eigen::MatrixXd::Zero(n_, n_);
  for (int i = 0; i < n_; ++i) {
    d(i, i) = diag_[idx(i)];
    for (const auto& nb : rows_[idx(i)]) d(i, nb.col) = nb.value;
  }
  return d;
}

Eigen::SparseMatrix<double> SparseSymMatrix::to_eigen() const {
  std::vector<Eigen::Triplet<double>> trips;
  trips.reserve(idx(n_) + 2 * offdiag_count());
  for (int i = 0; i < n_; ++i) {
    trips.emplace_back(i, i, diag_[idx(i)]);
    for (const auto& nb : rows_[idx(i)]) trips.emplace_back(i, nb.col, nb.value);
  }
  Eigen::SparseMatrix<double> s(n_, n_);
  s.setFromTriplets(trips.begin(), trips.end());
  return s;
}

Eigen::MatrixXd SparseSymMatrix::principal_submatrix(std::span<const int> ids) const {
  const auto k = static_cast<Eigen::Index>(ids.size());
  Eigen::MatrixXd m(k, k);
  for (Eigen::Index a = 0; a < k; ++a)
    for (Eigen::Index b = a; b < k; ++b) {
      double v = (*this)(ids[static_cast<std::size_t>(a)], ids[static_cast<std::size_t>(b)]);
      m(a, b) = v;
      m(b, a) = v;
    }
  return m;
}

SparseSymMatrix SparseSymMatrix::permuted(std::span<const int> new_label) const {
  SparseSymMatrix m;
  m.n_ = n_;
  m.diag_.assign(idx(n_), 0.0);
  m.rows_.assign(idx(n_), {});
  for (int i = 0; i < n_; ++i) {
    int ni = new_label[idx(i)];
    m.diag_[idx(ni)] = diag_[idx(i)];
    auto& r = m.rows_[idx(ni)];
    for (const auto& nb : rows_[idx(i)]) r.push_back({new_label[idx(nb.col)], nb.value});
    std::sort(r.begin(), r.end(), [](const Neighbor& a, const Neighbor& b) { return a.col < b.col; });
  }
  return m;
}

SparseSymMatrix SparseSymMatrix::scaled(std::span<const double> s) const {
  SparseSymMatrix m = *this;
  for (int i = 0; i < n_; ++i) {
    m.diag_[idx(i)] *= s[idx(i)] * s[idx(i)];
    for (auto& nb : m.rows_[idx(i)]) nb.value *= s[idx(i)] * s[idx(nb.col)];
  }
  return m;
}

Eigen::VectorXd SparseSymMatrix::multiply(const Eigen::VectorXd& x) const {
  Eigen::VectorXd y(n_);
  for (int i = 0; i < n_; ++i) {
    double acc = diag_[idx(i)] * x(i);
    for (const auto& nb : rows_[idx(i)]) acc += nb.value * x(nb.col);
    y(i) = acc;
  }
  return y;
}

double SparseSymMatrix::quadratic_form(std::span<const double> x) const {
  double total = 0.0;
  for (int i = 0; i < n_; ++i) {
    double xi = x[idx(i)];
    if (xi == 0.0) continue;
    double acc = 0.5 * diag_[idx(i)] * xi;
    for (const auto& nb : rows_[idx(i)])
      if (nb.col > i) acc += nb.value * x[idx(nb.col)];
    total += acc * xi;
  }
  return total;
}

int Instance::indicator_count() const {
  return static_cast<int>(std::count(indicator.begin(), indicator.end(), true));
}

void Instance::check_shape() const {
  const auto n = idx(size());
  if (c.size() != n || lambda.size() != n || indicator.size() != n) {
    std::ostringstream msg;
    msg << "instance dimension mismatch: n=" << n << ", |c|=" << c.size()
        << ", |lambda|=" << lambda.size() << ", |indicator|=" << indicator.size();
    throw InputError(msg.str());
  }
  for (std::size_t i = 0; i < n; ++i) {
    if (!std::isfinite(c[i]) || !std::isfinite(lambda[i])) {
      throw InputError("non-finite coefficient at variable " + std::to_string(i + 1));
    }
  }
  if (!std::isfinite(offset)) throw InputError("non-finite offset");
}

Instance make_instance(SparseSymMatrix q, std::vector<double> c, std::vector<double> lambda,
                       double offset) {
  Instance inst;
  const auto n = idx(q.size());
  inst.q = std::move(q);
  inst.c = std::move(c);
  inst.lambda = std::move(lambda);
  inst.indicator.assign(n, true);
  inst.offset = offset;
  inst.check_shape();
  return inst;
}

double evaluate_objective(const Instance& inst, std::span<const double> x, const std::vector<bool>& z) {
  const auto n = idx(inst.size());
  if (x.size() != n || z.size() != n) {
    throw InputError("evaluate_objective: expected vectors of length " + std::to_string(n));
  }
  double value = inst.q.quadratic_form(x) + inst.offset;
  for (std::size_t i = 0; i < n; ++i) {
    if (!z[i] && x[i] != 0.0) {
      throw InputError("complementarity violated at variable " + std::to_string(i + 1));
    }
    value += inst.c[i] * x[i];
    if (inst.indicator[i] && z[i]) value += inst.lambda[i];
  }
  return value;
}

NormalizedInstance normalize_diagonal(const Instance& inst) {
  const int n = inst.size();
  NormalizedInstance out;
  out.scale.resize(idx(n));
  std::vector<double> inv(idx(n));
  for (int i = 0; i < n; ++i) {
    double d = inst.q.diag(i);
    if (!(d > 0.0)) throw NotPositiveDefinite("nonpositive diagonal entry " + std::to_string(i + 1));
    out.scale[idx(i)] = std::sqrt(d);
    inv[idx(i)] = 1.0 / out.scale[idx(i)];
  }
  out.instance = inst;
  out.instance.q = inst.q.scaled(inv);
  for (int i = 0; i < n; ++i) out.instance.c[idx(i)] = inst.c[idx(i)] * inv[idx(i)];
  return out;
}

Instance fix_nonpositive_lambda(const Instance& inst) {
  Instance out = inst;
  for (std::size_t i = 0; i < out.indicator.size(); ++i) {
    if (out.indicator[i] && out.lambda[i] <= 0.0) {
      out.indicator[i] = false;
      out.offset += out.lambda[i];
    }
  }
  return out;
}

Graph support_graph(const SparseSymMatrix& q) {
  Graph g(q.size());
  for (int i = 0; i < q.size(); ++i)
    for (const auto& nb : q.row(i))
      if (nb.col > i) g.add_edge(i, nb.col);
  return g;
}

Diagnostics validate(const Instance& inst) {
  inst.check_shape();
  return analyze_spectrum(inst.q);
}

Instance permute_instance(const Instance& inst, std::span<const int> new_label) {
  Instance out;
  const auto n = idx(inst.size());
  out.q = inst.q.permuted(new_label);
  out.c.resize(n);
  out.lambda.resize(n);
  out.indicator.resize(n);
  out.offset = inst.offset;
  for (std::size_t i = 0; i < n; ++i) {
    auto j = idx(new_label[i]);
    out.c[j] = inst.c[i];
    out.lambda[j] = inst.lambda[i];
    out.indicator[j] = inst.indicator[i];
  }
  return out;
}

}  // namespace twqp
