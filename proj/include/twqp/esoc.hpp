#pragma once

#include <cstddef>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "twqp/instance.hpp"
#include "twqp/solver.hpp"

namespace twqp {

struct TimeSeries {
  std::vector<std::string> timestamps;  // may be empty
  std::vector<double> y;

  int size() const { return static_cast<int>(y.size()); }
  /// First `count` observations.
  TimeSeries prefix(int count) const;
};

/// Exponential smoothing with outlier correction:
///   Σ(y_t − x_t − o_t)² + μ₁Σ_{t≥2}(β(y_t − o_t) + (1−β)x_{t−1} − x_t)² + μ₂‖o‖² + Σλ_t·1(o_t ≠ 0).
struct EsocConfig {
  double beta = 0.5;
  /// One value (broadcast) or one per time step.
  std::vector<double> lambda{1e-3};
  double mu1 = 1.2;
  double mu2 = 0.001;

  double lambda_at(int t) const { return lambda.size() == 1 ? lambda.front() : lambda[static_cast<std::size_t>(t)]; }
};

/// Variables are interleaved o_1, x_1, o_2, x_2, ... so Q has bandwidth 2.
struct EsocProblem {
  Instance instance;
  int T = 0;
  static int o_index(int t) { return 2 * t; }
  static int x_index(int t) { return 2 * t + 1; }
};

EsocProblem build_esoc_instance(const TimeSeries& ts, const EsocConfig& cfg);

/// The ESOC objective evaluated term by term (no quadratic-form expansion).
double esoc_objective_direct(const TimeSeries& ts, const EsocConfig& cfg, std::span<const double> x,
                             std::span<const double> o);

struct EsocResult {
  std::vector<double> x;
  std::vector<double> o;
  std::vector<bool> outlier;
  /// forecast[t] = x[t-1]; forecast[0] is NaN.
  std::vector<double> forecast;
  double objective = 0.0;
  SolveStats stats;
};

/// Solves ESOC on the banded path decomposition with U = 2·max|y| unless
/// `opts` carries its own bound.
EsocResult solve_esoc(const TimeSeries& ts, const EsocConfig& cfg, const SolveOptions& opts = {});

/// x_1 = y_1, x_t = βy_t + (1−β)x_{t−1}.
std::vector<double> ses(const TimeSeries& ts, double beta);

/// Mean of (x_{t−1} − y_t)² over t in [max(begin, 1), end), skipping t where
/// skip[t] is true. Throws AllFlagged when no term remains.
double forecast_mse(const TimeSeries& ts, std::span<const double> x, const std::vector<bool>& skip, int begin,
                    int end);
double mse_ses(const TimeSeries& ts, std::span<const double> x);
double mse_esoc(const TimeSeries& ts, const EsocResult& result);

struct TuneGrid {
  std::vector<double> betas{0.01, 0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9, 0.99};
  std::vector<double> lambdas{1e-5, 5e-5, 1e-4, 5e-4, 1e-3, 5e-3, 1e-2, 5e-2};
  double mu1 = 1.2;
  double mu2 = 0.001;
  double max_flag_fraction = 0.1;
};

struct TuneCell {
  double beta = 0.0;
  double lambda = 0.0;
  double train_mse = 0.0;
  double flagged_fraction = 0.0;
  bool discarded = false;
  std::string reason;
  double seconds = 0.0;
};

struct TuneResult {
  EsocConfig best;
  double train_mse = 0.0;
  int train_size = 0;
  std::vector<TuneCell> cells;  // beta-major, grid order
};

/// Grid search on the first floor(split·T) points. Configurations flagging at
/// least max_flag_fraction of the training points are discarded; the lowest
/// training MSE wins, ties going to smaller λ and then smaller β.
TuneResult tune(const TimeSeries& ts, double split, const TuneGrid& grid = {}, int workers = 0,
                const SolveOptions& opts = {});

/// β with the lowest training SES MSE (ties: smaller β).
double tune_ses(const TimeSeries& ts, double split, std::span<const double> betas);

int train_size(int T, double split);

/// Tuning, one full-series solve, and SES on the same split.
struct EsocReport {
  TuneResult tuning;
  double ses_beta = 0.0;
  EsocResult esoc;
  std::vector<double> ses_x;
  int train_size = 0;
  double train_mse_esoc = 0.0;
  double test_mse_esoc = 0.0;
  double train_mse_ses = 0.0;
  double test_mse_ses = 0.0;
  double outlier_fraction = 0.0;
};

EsocReport run_esoc(const TimeSeries& ts, double split, const TuneGrid& grid = {}, int workers = 0,
                    const SolveOptions& opts = {});

/// Reads "timestamp,value" CSV. Malformed rows raise InputError naming the line.
TimeSeries read_csv(std::istream& in);
TimeSeries ingest_csv(const std::string& path);

/// Columns: t, y, x, o, flagged, forecast.
void write_result_csv(std::ostream& out, const TimeSeries& ts, const EsocResult& result);

}  // namespace twqp
