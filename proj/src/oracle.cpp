#include "twqp/oracle.hpp"

#include <omp.h>

#include <chrono>
#include <cstdint>
#include <limits>

#include "twqp/error.hpp"

namespace twqp {

namespace {

struct Candidate {
  double objective = std::numeric_limits<double>::infinity();
  std::uint64_t mask = 0;  // bit k set: k-th indicator variable is free
  bool valid = false;
};

// z is compared lexicographically by variable index; bit k of the mask maps to
// the k-th indicator variable, so reverse the bit order before comparing.
std::uint64_t lex_key(std::uint64_t mask, int bits) {
  std::uint64_t key = 0;
  for (int k = 0; k < bits; ++k)
    if (mask >> k & 1u) key |= std::uint64_t{1} << (bits - 1 - k);
  return key;
}

bool better(const Candidate& a, const Candidate& b, int bits) {
  if (!b.valid) return a.valid;
  if (!a.valid) return false;
  if (a.objective != b.objective) return a.objective < b.objective;
  return lex_key(a.mask, bits) < lex_key(b.mask, bits);
}

Candidate evaluate_pattern(const Instance& inst, const Eigen::MatrixXd& q, const std::vector<int>& ind_vars,
                           const std::vector<int>& free_vars, std::uint64_t mask) {
  std::vector<int> j = free_vars;
  double penalty = 0.0;
  for (std::size_t k = 0; k < ind_vars.size(); ++k) {
    if (mask >> k & 1u) {
      j.push_back(ind_vars[k]);
      penalty += inst.lambda[static_cast<std::size_t>(ind_vars[k])];
    }
  }
  Candidate cand;
  cand.mask = mask;
  cand.valid = true;
  if (j.empty()) {
    cand.objective = inst.offset;
    return cand;
  }
  const auto m = static_cast<Eigen::Index>(j.size());
  Eigen::MatrixXd qjj(m, m);
  Eigen::VectorXd cj(m);
  for (Eigen::Index a = 0; a < m; ++a) {
    cj(a) = inst.c[static_cast<std::size_t>(j[static_cast<std::size_t>(a)])];
    for (Eigen::Index b = 0; b < m; ++b) qjj(a, b) = q(j[static_cast<std::size_t>(a)], j[static_cast<std::size_t>(b)]);
  }
  Eigen::LLT<Eigen::MatrixXd> llt(qjj);
  if (llt.info() != Eigen::Success) {
    cand.valid = false;
    return cand;
  }
  Eigen::VectorXd x = -llt.solve(cj);
  cand.objective = 0.5 * cj.dot(x) + penalty + inst.offset;
  return cand;
}

}  // namespace

Solution brute_force(const Instance& inst, Exec exec) {
  const auto start = std::chrono::steady_clock::now();
  inst.check_shape();
  const int n = inst.size();
  std::vector<int> ind_vars, free_vars;
  for (int i = 0; i < n; ++i) (inst.indicator[static_cast<std::size_t>(i)] ? ind_vars : free_vars).push_back(i);
  const int bits = static_cast<int>(ind_vars.size());
  if (bits > kMaxOracleIndicators) {
    throw InputError("brute force supports at most " + std::to_string(kMaxOracleIndicators) +
                     " indicator variables, got " + std::to_string(bits));
  }
  const Eigen::MatrixXd q = inst.q.to_dense();
  const std::int64_t patterns = std::int64_t{1} << bits;

  Candidate best;
  if (exec == Exec::serial) {
    for (std::int64_t p = 0; p < patterns; ++p) {
      Candidate c = evaluate_pattern(inst, q, ind_vars, free_vars, static_cast<std::uint64_t>(p));
      if (better(c, best, bits)) best = c;
    }
  } else {
    std::vector<Candidate> local(static_cast<std::size_t>(omp_get_max_threads()));
#pragma omp parallel
    {
      Candidate mine;
#pragma omp for schedule(static)
      for (std::int64_t p = 0; p < patterns; ++p) {
        Candidate c = evaluate_pattern(inst, q, ind_vars, free_vars, static_cast<std::uint64_t>(p));
        if (better(c, mine, bits)) mine = c;
      }
      local[static_cast<std::size_t>(omp_get_thread_num())] = mine;
    }
    for (const auto& c : local)
      if (better(c, best, bits)) best = c;
  }
  if (!best.valid) throw NumericalError("every free-set subsystem was singular");

  Solution sol;
  sol.z.assign(static_cast<std::size_t>(n), true);
  for (int k = 0; k < bits; ++k) sol.z[static_cast<std::size_t>(ind_vars[static_cast<std::size_t>(k)])] = best.mask >> k & 1u;
  sol.x.assign(static_cast<std::size_t>(n), 0.0);
  std::vector<int> j;
  for (int i = 0; i < n; ++i)
    if (sol.z[static_cast<std::size_t>(i)]) j.push_back(i);
  if (!j.empty()) {
    const auto m = static_cast<Eigen::Index>(j.size());
    Eigen::MatrixXd qjj(m, m);
    Eigen::VectorXd cj(m);
    for (Eigen::Index a = 0; a < m; ++a) {
      cj(a) = inst.c[static_cast<std::size_t>(j[static_cast<std::size_t>(a)])];
      for (Eigen::Index b = 0; b < m; ++b) qjj(a, b) = q(j[static_cast<std::size_t>(a)], j[static_cast<std::size_t>(b)]);
    }
    Eigen::VectorXd x = -qjj.llt().solve(cj);
    for (Eigen::Index a = 0; a < m; ++a) sol.x[static_cast<std::size_t>(j[static_cast<std::size_t>(a)])] = x(a);
  }
  sol.objective = best.objective;
  sol.stats.recovered_objective = evaluate_objective(inst, sol.x, sol.z);
  sol.stats.prune_mode = "oracle";
  sol.stats.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return sol;
}

}  // namespace twqp
