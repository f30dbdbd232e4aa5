#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <vector>

#include "twqp/gen.hpp"
#include "twqp/instance.hpp"

namespace twqp::testing {

inline Instance dense_instance(const Eigen::MatrixXd& q, std::vector<double> c, std::vector<double> lambda,
                               double offset = 0.0) {
  return make_instance(SparseSymMatrix::from_dense(q), std::move(c), std::move(lambda), offset);
}

/// Which penalty range the random instances draw λ from.
enum class LambdaRegime { small, typical, large, mixed_sign };

/// Banded instance from the generator with λ rescaled per regime and, for
/// odd seeds, a few variables without indicators.
inline Instance random_banded(int n, int w, std::uint64_t seed, LambdaRegime regime, double nu = 1.0) {
  Instance inst = gen_banded(n, w, nu, seed).instance;
  Rng rng(seed ^ 0x9e3779b97f4a7c15ull);
  for (auto& l : inst.lambda) {
    switch (regime) {
      case LambdaRegime::small: l = rng.uniform(0.01, 0.5); break;
      case LambdaRegime::typical: break;
      case LambdaRegime::large: l = rng.uniform(20.0, 60.0); break;
      case LambdaRegime::mixed_sign: l = rng.uniform(-1.0, 6.0); break;
    }
  }
  if (seed % 2 == 1) {
    for (int i = 0; i < n; ++i)
      if (rng.uniform() < 0.15) inst.indicator[static_cast<std::size_t>(i)] = false;
  }
  inst.offset = rng.uniform(-2.0, 2.0);
  return inst;
}

/// PD instance on an Erdős–Rényi support graph.
inline Instance random_sparse(int n, double density, std::uint64_t seed) {
  Rng rng(seed);
  Eigen::MatrixXd m = Eigen::MatrixXd::Zero(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j)
      if (rng.uniform() < density) m(i, j) = m(j, i) = rng.uniform(-1.0, 1.0);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(m, Eigen::EigenvaluesOnly);
  const double shift = -es.eigenvalues().minCoeff() + rng.uniform(0.2, 1.5);
  for (int i = 0; i < n; ++i) m(i, i) += shift;
  std::vector<double> c(static_cast<std::size_t>(n)), l(static_cast<std::size_t>(n));
  for (auto& v : c) v = rng.uniform(-10.0, 10.0);
  for (auto& v : l) v = rng.uniform(0.0, 6.0);
  return dense_instance(m, c, l);
}

inline double rel_tol(double scale, double value) { return scale * (1.0 + std::abs(value)); }

}  // namespace twqp::testing
