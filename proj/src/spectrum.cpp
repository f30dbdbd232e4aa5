#include <Eigen/Dense>
#include <Eigen/SparseCholesky>
#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "twqp/error.hpp"
#include "twqp/instance.hpp"

namespace twqp {

namespace {

constexpr int kDenseLimit = 4096;

double inf_norm(const SparseSymMatrix& q) {
  double best = 0.0;
  for (int i = 0; i < q.size(); ++i) {
    double row = std::abs(q.diag(i));
    for (const auto& nb : q.row(i)) row += std::abs(nb.value);
    best = std::max(best, row);
  }
  return best;
}

Diagnostics dense_spectrum(const SparseSymMatrix& q) {
  Eigen::MatrixXd d = q.to_dense();
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(d, Eigen::EigenvaluesOnly);
  if (eig.info() != Eigen::Success) throw NumericalError("eigensolver did not converge");
  Diagnostics out;
  out.mu_min = eig.eigenvalues()(0);
  out.mu_max = eig.eigenvalues()(eig.eigenvalues().size() - 1);
  if (!(out.mu_min > 0.0)) {
    std::ostringstream msg;
    msg << "Q is not positive definite (smallest eigenvalue " << out.mu_min << ")";
    throw NotPositiveDefinite(msg.str());
  }
  out.kappa2 = out.mu_max / out.mu_min;
  Eigen::LLT<Eigen::MatrixXd> llt(d);
  Eigen::MatrixXd inv = llt.solve(Eigen::MatrixXd::Identity(d.rows(), d.cols()));
  out.kappa_inf = inv.cwiseAbs().rowwise().sum().maxCoeff() * inf_norm(q);
  out.exact = true;
  return out;
}

// Hager's estimator of the 1-norm of Q⁻¹ (equal to the ∞-norm by symmetry).
double inverse_norm_estimate(const Eigen::SimplicialLLT<Eigen::SparseMatrix<double>>& llt, int n) {
  Eigen::VectorXd x = Eigen::VectorXd::Constant(n, 1.0 / n);
  double estimate = 0.0;
  for (int iter = 0; iter < 5; ++iter) {
    Eigen::VectorXd y = llt.solve(x);
    estimate = y.lpNorm<1>();
    Eigen::VectorXd xi = y.unaryExpr([](double v) { return v >= 0.0 ? 1.0 : -1.0; });
    Eigen::VectorXd w = llt.solve(xi);
    Eigen::Index j = 0;
    double wmax = w.cwiseAbs().maxCoeff(&j);
    if (wmax <= w.dot(x)) break;
    x.setZero();
    x(j) = 1.0;
  }
  return estimate;
}

Diagnostics sparse_spectrum(const SparseSymMatrix& q) {
  const int n = q.size();
  double lo = std::numeric_limits<double>::infinity();
  double hi = -lo;
  for (int i = 0; i < n; ++i) {
    double r = 0.0;
    for (const auto& nb : q.row(i)) r += std::abs(nb.value);
    lo = std::min(lo, q.diag(i) - r);
    hi = std::max(hi, q.diag(i) + r);
  }

  Eigen::SparseMatrix<double> s = q.to_eigen();
  Eigen::SimplicialLLT<Eigen::SparseMatrix<double>> llt(s);
  if (llt.info() != Eigen::Success) throw NotPositiveDefinite("sparse Cholesky factorization failed");

  // Power iteration for the largest eigenvalue.
  Eigen::VectorXd v = Eigen::VectorXd::LinSpaced(n, 1.0, 2.0).normalized();
  double mu_max = 0.0;
  for (int iter = 0; iter < 500; ++iter) {
    Eigen::VectorXd w = q.multiply(v);
    double next = v.dot(w);
    v = w.normalized();
    if (std::abs(next - mu_max) <= 1e-10 * std::abs(next)) {
      mu_max = next;
      break;
    }
    mu_max = next;
  }

  Diagnostics out;
  out.exact = false;
  if (lo > 0.0) {
    out.mu_min = lo;
  } else {
    // Inverse iteration for the smallest eigenvalue.
    Eigen::VectorXd u = Eigen::VectorXd::LinSpaced(n, 2.0, 1.0).normalized();
    double inv_max = 0.0;
    for (int iter = 0; iter < 500; ++iter) {
      Eigen::VectorXd w = llt.solve(u);
      double next = u.dot(w);
      u = w.normalized();
      if (std::abs(next - inv_max) <= 1e-10 * std::abs(next)) {
        inv_max = next;
        break;
      }
      inv_max = next;
    }
    out.mu_min = 1.0 / inv_max;
  }
  out.mu_max = std::min(std::max(mu_max, out.mu_min), hi);
  out.kappa2 = out.mu_max / out.mu_min;
  out.kappa_inf = inverse_norm_estimate(llt, n) * inf_norm(q);
  return out;
}

}  // namespace

Diagnostics analyze_spectrum(const SparseSymMatrix& q) {
  return q.size() <= kDenseLimit ? dense_spectrum(q) : sparse_spectrum(q);
}

}  // namespace twqp
