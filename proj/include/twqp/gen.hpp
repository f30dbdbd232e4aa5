#pragma once

#include <cstdint>
#include <random>
#include <vector>

#include "twqp/esoc.hpp"
#include "twqp/instance.hpp"
#include "twqp/treedec.hpp"

namespace twqp {

/// mt19937_64 with hand-rolled uniform and normal draws, so a seed yields the
/// same stream under every standard library.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}
  /// Uniform on [0, 1) with 53 random bits.
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
  /// Uniform integer in [0, bound).
  std::uint64_t below(std::uint64_t bound);
  double normal();

 private:
  std::mt19937_64 engine_;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

struct GenSpec {
  int n = 100;
  /// Bandwidth of the upper-triangular factor Y.
  int w = 2;
  /// Treewidth of the zeroed pattern; equal to w means plain banded.
  int omega = -1;
  /// Diagonal shift; ignored when target_kappa > 0.
  double nu = 1.0;
  /// When positive, the shift is chosen so that κ₂(Q) hits this value.
  double target_kappa = 0.0;
  std::uint64_t seed = 0;
  double lambda_lo = 3.5;
  double lambda_hi = 4.5;
  double c_bound = 10.0;
};

struct GeneratedInstance {
  Instance instance;
  /// The shift actually added to the diagonal.
  double nu = 0.0;
  double kappa2 = 0.0;
  std::uint64_t seed = 0;
  /// A decomposition of width omega (the banded path when omega == w).
  TreeDecomposition decomposition;
};

/// Q = YᵀY + νI with Y upper triangular and Y_ij ~ U(-1, 1) for i <= j <= i + w,
/// c ~ U(-c_bound, c_bound), λ ~ U(lambda_lo, lambda_hi). With omega < w the
/// off-diagonal pattern of YᵀY is cut down to the periodic low-treewidth
/// pattern and the shift is raised by the magnitude of any negative
/// eigenvalue this creates.
GeneratedInstance generate(const GenSpec& spec);

GeneratedInstance gen_banded(int n, int w, double nu, std::uint64_t seed);
GeneratedInstance gen_low_treewidth(int n, int w, int omega, double nu, std::uint64_t seed);

/// The periodic pattern on n nodes: blocks of w consecutive nodes, the first
/// omega of each a clique (the spine) with every other block node attached to
/// the whole spine, and spine node i linked to spine node i of the next block.
struct LowTreewidthPattern {
  std::vector<std::pair<int, int>> edges;  // i < j
  TreeDecomposition decomposition;         // balanced, width omega
};
LowTreewidthPattern low_treewidth_pattern(int n, int w, int omega);

struct SyntheticSignal {
  TimeSeries series;
  std::vector<int> spikes;  // sorted positions of injected spikes
  double noise_sigma = 0.0;
};

/// Local-level signal: level_t = level_{t-1} + N(0, level_sigma²),
/// y_t = level_t + N(0, noise_sigma²), then round(spike_fraction·T) distinct
/// positions (never t = 0) get ±spike_sigmas·noise_sigma added.
SyntheticSignal gen_ses_signal(int T, double level_sigma, double noise_sigma, double spike_fraction,
                               double spike_sigmas, std::uint64_t seed);

}  // namespace twqp
