#include "twqp/esoc.hpp"

#include <omp.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <limits>
#include <map>
#include <sstream>

#include "twqp/error.hpp"

namespace twqp {

namespace {

std::size_t idx(int i) { return static_cast<std::size_t>(i); }

struct Term {
  int var;
  double coef;
};

class QuadraticBuilder {
 public:
  explicit QuadraticBuilder(int n) : n_(n), c_(idx(n), 0.0) {}

  // Adds weight·(Σ coef·v_var − r)².
  void add_square(double weight, std::initializer_list<Term> terms, double r) {
    if (weight == 0.0) return;
    for (const auto& a : terms) {
      for (const auto& b : terms) {
        if (a.var <= b.var) q_[{a.var, b.var}] += 2.0 * weight * a.coef * b.coef;
      }
      c_[idx(a.var)] += -2.0 * weight * r * a.coef;
    }
    offset_ += weight * r * r;
  }

  void add_diagonal(int var, double value) { q_[{var, var}] += value; }

  SparseSymMatrix matrix() const {
    std::vector<MatrixEntry> entries;
    for (const auto& [key, value] : q_) entries.push_back({key.first, key.second, value});
    return SparseSymMatrix::from_entries(n_, entries);
  }
  const std::vector<double>& c() const { return c_; }
  double offset() const { return offset_; }

 private:
  int n_;
  std::map<std::pair<int, int>, double> q_;
  std::vector<double> c_;
  double offset_ = 0.0;
};

void check_config(const TimeSeries& ts, const EsocConfig& cfg) {
  if (ts.size() < 2) throw InputError("time series needs at least 2 observations");
  if (!(cfg.beta > 0.0 && cfg.beta < 1.0)) throw InputError("beta must lie in (0, 1)");
  if (!(cfg.mu2 > 0.0)) throw InputError("mu2 must be positive");
  if (!(cfg.mu1 >= 0.0)) throw InputError("mu1 must be nonnegative");
  if (cfg.lambda.size() != 1 && cfg.lambda.size() != ts.y.size()) {
    throw InputError("lambda must be a scalar or have one entry per observation");
  }
}

}  // namespace

TimeSeries TimeSeries::prefix(int count) const {
  TimeSeries out;
  out.y.assign(y.begin(), y.begin() + count);
  if (!timestamps.empty()) out.timestamps.assign(timestamps.begin(), timestamps.begin() + count);
  return out;
}

EsocProblem build_esoc_instance(const TimeSeries& ts, const EsocConfig& cfg) {
  check_config(ts, cfg);
  const int T = ts.size();
  QuadraticBuilder qb(2 * T);
  const double beta = cfg.beta;
  for (int t = 0; t < T; ++t) {
    const int o = EsocProblem::o_index(t);
    const int x = EsocProblem::x_index(t);
    const double y = ts.y[idx(t)];
    qb.add_square(1.0, {{o, 1.0}, {x, 1.0}}, y);
    if (t > 0) {
      const int x_prev = EsocProblem::x_index(t - 1);
      qb.add_square(cfg.mu1, {{o, -beta}, {x_prev, 1.0 - beta}, {x, -1.0}}, -beta * y);
    }
    qb.add_diagonal(o, 2.0 * cfg.mu2);
  }
  EsocProblem p;
  p.T = T;
  p.instance.q = qb.matrix();
  p.instance.c = qb.c();
  p.instance.offset = qb.offset();
  p.instance.lambda.assign(idx(2 * T), 0.0);
  p.instance.indicator.assign(idx(2 * T), false);
  for (int t = 0; t < T; ++t) {
    p.instance.lambda[idx(EsocProblem::o_index(t))] = cfg.lambda_at(t);
    p.instance.indicator[idx(EsocProblem::o_index(t))] = true;
  }
  return p;
}

double esoc_objective_direct(const TimeSeries& ts, const EsocConfig& cfg, std::span<const double> x,
                             std::span<const double> o) {
  double value = 0.0;
  for (int t = 0; t < ts.size(); ++t) {
    const double y = ts.y[idx(t)];
    const double fit = y - x[idx(t)] - o[idx(t)];
    value += fit * fit + cfg.mu2 * o[idx(t)] * o[idx(t)];
    if (t > 0) {
      const double dyn = cfg.beta * (y - o[idx(t)]) + (1.0 - cfg.beta) * x[idx(t - 1)] - x[idx(t)];
      value += cfg.mu1 * dyn * dyn;
    }
    if (o[idx(t)] != 0.0) value += cfg.lambda_at(t);
  }
  return value;
}

EsocResult solve_esoc(const TimeSeries& ts, const EsocConfig& cfg, const SolveOptions& opts) {
  EsocProblem p = build_esoc_instance(ts, cfg);
  SolveOptions o = opts;
  double ymax = 0.0;
  for (double v : ts.y) ymax = std::max(ymax, std::abs(v));
  if (o.data_bound <= 0.0) o.data_bound = ymax > 0.0 ? 2.0 * ymax : 1.0;
  DecompositionChoice decomp;
  decomp.kind = DecompositionChoice::Kind::banded;
  decomp.bandwidth = 2;
  Solution sol = solve_instance(p.instance, decomp, o);

  EsocResult r;
  const int T = ts.size();
  r.x.resize(idx(T));
  r.o.resize(idx(T));
  r.outlier.resize(idx(T));
  r.forecast.assign(idx(T), std::numeric_limits<double>::quiet_NaN());
  for (int t = 0; t < T; ++t) {
    r.x[idx(t)] = sol.x[idx(EsocProblem::x_index(t))];
    r.o[idx(t)] = sol.x[idx(EsocProblem::o_index(t))];
    r.outlier[idx(t)] = sol.z[idx(EsocProblem::o_index(t))];
    if (t > 0) r.forecast[idx(t)] = r.x[idx(t - 1)];
  }
  r.objective = sol.objective;
  r.stats = std::move(sol.stats);
  return r;
}

std::vector<double> ses(const TimeSeries& ts, double beta) {
  if (!(beta > 0.0 && beta < 1.0)) throw InputError("beta must lie in (0, 1)");
  std::vector<double> x(ts.y.size());
  if (x.empty()) return x;
  x[0] = ts.y[0];
  for (std::size_t t = 1; t < x.size(); ++t) x[t] = beta * ts.y[t] + (1.0 - beta) * x[t - 1];
  return x;
}

double forecast_mse(const TimeSeries& ts, std::span<const double> x, const std::vector<bool>& skip, int begin,
                    int end) {
  if (x.size() != ts.y.size()) throw InputError("smoothed signal length differs from the series length");
  double sum = 0.0;
  int count = 0;
  for (int t = std::max(begin, 1); t < end; ++t) {
    if (!skip.empty() && skip[idx(t)]) continue;
    const double e = x[idx(t - 1)] - ts.y[idx(t)];
    sum += e * e;
    ++count;
  }
  if (count == 0) throw AllFlagged("no unflagged forecast terms in the evaluation range");
  return sum / count;
}

double mse_ses(const TimeSeries& ts, std::span<const double> x) { return forecast_mse(ts, x, {}, 1, ts.size()); }

double mse_esoc(const TimeSeries& ts, const EsocResult& result) {
  return forecast_mse(ts, result.x, result.outlier, 1, ts.size());
}

int train_size(int T, double split) {
  if (!(split > 0.0 && split <= 1.0)) throw InputError("split must lie in (0, 1]");
  return static_cast<int>(std::floor(split * T));
}

TuneResult tune(const TimeSeries& ts, double split, const TuneGrid& grid, int workers, const SolveOptions& opts) {
  if (grid.betas.empty() || grid.lambdas.empty()) throw InputError("tuning grids must be nonempty");
  TuneResult out;
  out.train_size = train_size(ts.size(), split);
  if (out.train_size < 2) throw InputError("training prefix needs at least 2 observations");
  const TimeSeries train = ts.prefix(out.train_size);

  for (double b : grid.betas)
    for (double l : grid.lambdas) out.cells.push_back({b, l, 0.0, 0.0, false, "", 0.0});

  const int threads = workers > 0 ? workers : omp_get_num_procs();
  SolveOptions inner = opts;
  if (threads > 1) inner.exec = Exec::serial;

#pragma omp parallel for schedule(dynamic) num_threads(threads)
  for (std::size_t k = 0; k < out.cells.size(); ++k) {
    auto& cell = out.cells[k];
    const auto start = std::chrono::steady_clock::now();
    try {
      EsocConfig cfg{cell.beta, {cell.lambda}, grid.mu1, grid.mu2};
      EsocResult r = solve_esoc(train, cfg, inner);
      const auto flagged = std::count(r.outlier.begin(), r.outlier.end(), true);
      cell.flagged_fraction = static_cast<double>(flagged) / train.size();
      if (cell.flagged_fraction >= grid.max_flag_fraction) {
        cell.discarded = true;
        cell.reason = "flagged fraction above limit";
      } else {
        cell.train_mse = mse_esoc(train, r);
      }
    } catch (const Error& e) {
      cell.discarded = true;
      cell.reason = std::string(e.kind()) + ": " + e.what();
    }
    cell.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  }

  std::vector<std::size_t> order(out.cells.size());
  for (std::size_t k = 0; k < order.size(); ++k) order[k] = k;
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    const auto& ca = out.cells[a];
    const auto& cb = out.cells[b];
    return ca.lambda != cb.lambda ? ca.lambda < cb.lambda : ca.beta < cb.beta;
  });
  const TuneCell* best = nullptr;
  for (std::size_t k : order) {
    const auto& cell = out.cells[k];
    if (cell.discarded) continue;
    if (best == nullptr || cell.train_mse < best->train_mse) best = &cell;
  }
  if (best == nullptr) throw AllConfigsDiscarded("every tuning configuration was discarded");
  out.best = EsocConfig{best->beta, {best->lambda}, grid.mu1, grid.mu2};
  out.train_mse = best->train_mse;
  return out;
}

double tune_ses(const TimeSeries& ts, double split, std::span<const double> betas) {
  if (betas.empty()) throw InputError("beta grid must be nonempty");
  const TimeSeries train = ts.prefix(train_size(ts.size(), split));
  double best_beta = 0.0;
  double best_mse = std::numeric_limits<double>::infinity();
  std::vector<double> sorted(betas.begin(), betas.end());
  std::sort(sorted.begin(), sorted.end());
  for (double b : sorted) {
    const double m = mse_ses(train, ses(train, b));
    if (m < best_mse) {
      best_mse = m;
      best_beta = b;
    }
  }
  return best_beta;
}

EsocReport run_esoc(const TimeSeries& ts, double split, const TuneGrid& grid, int workers, const SolveOptions& opts) {
  EsocReport rep;
  rep.tuning = tune(ts, split, grid, workers, opts);
  rep.train_size = rep.tuning.train_size;
  rep.esoc = solve_esoc(ts, rep.tuning.best, opts);
  rep.ses_beta = tune_ses(ts, split, grid.betas);
  rep.ses_x = ses(ts, rep.ses_beta);

  const int T = ts.size();
  rep.train_mse_esoc = forecast_mse(ts, rep.esoc.x, rep.esoc.outlier, 1, rep.train_size);
  rep.test_mse_esoc = forecast_mse(ts, rep.esoc.x, rep.esoc.outlier, rep.train_size, T);
  rep.train_mse_ses = forecast_mse(ts, rep.ses_x, {}, 1, rep.train_size);
  rep.test_mse_ses = forecast_mse(ts, rep.ses_x, {}, rep.train_size, T);
  rep.outlier_fraction =
      static_cast<double>(std::count(rep.esoc.outlier.begin(), rep.esoc.outlier.end(), true)) / T;
  return rep;
}

TimeSeries read_csv(std::istream& in) {
  std::string line;
  int line_no = 0;
  if (!std::getline(in, line)) throw InputError("CSV is empty");
  ++line_no;
  if (!line.empty() && line.back() == '\r') line.pop_back();
  std::vector<std::string> header;
  {
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) header.push_back(cell);
  }
  auto find = [&](const std::string& name) {
    auto it = std::find(header.begin(), header.end(), name);
    if (it == header.end()) throw InputError("CSV header lacks a '" + name + "' column");
    return static_cast<std::size_t>(it - header.begin());
  };
  const std::size_t ts_col = find("timestamp");
  const std::size_t val_col = find("value");

  TimeSeries out;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) throw InputError("blank line at line " + std::to_string(line_no));
    std::vector<std::string> cells;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) cells.push_back(cell);
    if (cells.size() != header.size()) {
      throw InputError("expected " + std::to_string(header.size()) + " columns at line " + std::to_string(line_no));
    }
    const std::string& text = cells[val_col];
    char* end = nullptr;
    const double v = std::strtod(text.c_str(), &end);
    if (text.empty() || end != text.c_str() + text.size() || !std::isfinite(v)) {
      throw InputError("unparseable value '" + text + "' at line " + std::to_string(line_no));
    }
    out.timestamps.push_back(cells[ts_col]);
    out.y.push_back(v);
  }
  if (out.size() < 2) throw InputError("time series needs at least 2 observations");
  return out;
}

TimeSeries ingest_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open " + path);
  return read_csv(in);
}

void write_result_csv(std::ostream& out, const TimeSeries& ts, const EsocResult& result) {
  out << "t,y,x,o,flagged,forecast\n";
  out << std::setprecision(17);
  for (int t = 0; t < ts.size(); ++t) {
    out << (ts.timestamps.empty() ? std::to_string(t + 1) : ts.timestamps[idx(t)]) << ',' << ts.y[idx(t)] << ','
        << result.x[idx(t)] << ',' << result.o[idx(t)] << ',' << (result.outlier[idx(t)] ? 1 : 0) << ',';
    if (t > 0) out << result.forecast[idx(t)];
    out << '\n';
  }
}

}  // namespace twqp
