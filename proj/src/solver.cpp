#include "twqp/solver.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <sstream>

#include "twqp/error.hpp"
#include "twqp/pruning.hpp"

namespace twqp {

namespace {

std::size_t idx(int i) { return static_cast<std::size_t>(i); }

double c_inf_norm(const Instance& inst) {
  double m = 0.0;
  for (double v : inst.c) m = std::max(m, std::abs(v));
  return m;
}

}  // namespace

std::string to_string(PruneMode mode) {
  switch (mode) {
    case PruneMode::exact:
      return "exact";
    case PruneMode::path_heuristic:
      return "path";
    case PruneMode::automatic:
      return "auto";
    case PruneMode::none:
      return "none";
  }
  return "auto";
}

PruneMode parse_prune_mode(const std::string& text) {
  if (text == "exact") return PruneMode::exact;
  if (text == "path") return PruneMode::path_heuristic;
  if (text == "auto") return PruneMode::automatic;
  if (text == "none") return PruneMode::none;
  throw InputError("unknown prune mode '" + text + "' (expected exact, path, auto or none)");
}

DecayConstants decay_constants(double mu_min, double kappa2) {
  if (!(mu_min > 0.0) || !(kappa2 >= 1.0) || !std::isfinite(kappa2)) {
    throw NumericalError("condition number is unavailable");
  }
  const double sk = std::sqrt(kappa2);
  DecayConstants k;
  k.c1 = std::max(1.0, (1.0 + sk) * (1.0 + sk) / (2.0 * kappa2)) / mu_min;
  k.rho = (sk - 1.0) / (sk + 1.0);
  return k;
}

double compute_U_theory(const Instance& inst, const BoundStructure& structure, const Diagnostics& diag) {
  const auto k = decay_constants(diag.mu_min, diag.kappa2);
  const double cn = c_inf_norm(inst);
  if (structure.kind == BoundStructure::Kind::banded) {
    const int w = structure.bandwidth > 0 ? structure.bandwidth : std::max(1, inst.q.bandwidth());
    return 2.0 * w * k.c1 * cn / (1.0 - k.rho);
  }
  const double g = structure.gamma;
  return structure.delta * std::tgamma(g + 1.0) * k.c1 * cn / std::pow(1.0 - k.rho, g + 1.0);
}

double compute_U_theory(const Instance& inst, const BoundStructure& structure) {
  return compute_U_theory(inst, structure, validate(inst));
}

Solution solve(const Instance& inst, const LabeledDecomposition& ld, double U, const SolveOptions& opts) {
  const auto start = std::chrono::steady_clock::now();
  const int n = inst.size();
  if (ld.n != n) throw InputError("decomposition size differs from the instance size");
  if (opts.prune != PruneMode::none && !(U > 0.0)) throw InputError("solution bound U must be positive");

  PruneMode mode = opts.prune;
  if (mode == PruneMode::automatic) mode = ld.is_path() ? PruneMode::path_heuristic : PruneMode::exact;

  Solution sol;
  sol.stats.prune_mode = to_string(mode);
  sol.stats.u_used = U;
  sol.stats.width = ld.width;
  sol.stats.pieces_before_prune.assign(idx(n), 0);
  sol.stats.pieces_after_prune.assign(idx(n), 0);

  std::vector<PiecewiseQuad> f(idx(n));
  std::vector<PiecewiseQuad> g(idx(n));
  std::size_t stored_bytes = 0;

  auto bag_of = [&](int u) {
    auto bag = ld.bag(u);
    if (bag.front() != u) {
      throw InputError("labeling violates the bag order at node " + std::to_string(u + 1));
    }
    return bag;
  };

  f[0] = PiecewiseQuad(h_phi(inst.q, inst.c, bag_of(0)));
  sol.stats.pieces_before_prune[0] = 1;
  sol.stats.pieces_after_prune[0] = 1;
  stored_bytes += f[0].bytes();

  for (int u = 0; u + 1 < n; ++u) {
    g[idx(u)] = eliminate_with_indicator(f[idx(u)], u, inst.lambda[idx(u)], inst.indicator[idx(u)], opts.exec);
    if (!opts.store_parametric_costs) {
      stored_bytes -= f[idx(u)].bytes();
      f[idx(u)] = PiecewiseQuad();
    }

    const int t = u + 1;
    const auto bag = bag_of(t);
    QuadPiece h = h_phi(inst.q, inst.c, bag);
    std::vector<QuadPiece> phis;
    phis.reserve(ld.par[idx(t)].size());
    std::vector<ParentTerm> terms;
    for (int v : ld.par[idx(t)]) phis.push_back(h_phi(inst.q, inst.c, g[idx(v)].coords()));
    for (std::size_t k = 0; k < phis.size(); ++k) terms.push_back({&g[idx(ld.par[idx(t)][k])], &phis[k]});

    PiecewiseQuad next = combine(h, terms, opts.exec, opts.max_pieces_per_bag);
    for (int v : ld.par[idx(t)]) g[idx(v)] = PiecewiseQuad();
    sol.stats.pieces_before_prune[idx(t)] = next.size();

    if (mode == PruneMode::exact) {
      PiecewiseQuad pruned = prune_exact(next, U, opts.exec);
      if (opts.on_prune) opts.on_prune(t, next, pruned);
      next = std::move(pruned);
    } else if (mode == PruneMode::path_heuristic) {
      PiecewiseQuad pruned = prune_path_heuristic(next, U);
      if (opts.on_prune) opts.on_prune(t, next, pruned);
      next = std::move(pruned);
    }
    sol.stats.pieces_after_prune[idx(t)] = next.size();
    stored_bytes += next.bytes();
    if (stored_bytes > opts.max_total_bytes) {
      std::ostringstream msg;
      msg << "stored parametric costs exceed " << opts.max_total_bytes << " bytes at bag " << t + 1 << " of "
          << n << " (" << next.size() << " pieces in this bag)";
      throw ResourceCapExceeded(msg.str());
    }
    f[idx(t)] = std::move(next);
  }

  // Root step, then recover x from the stored functions in reverse label order.
  const int last = n - 1;
  const auto root =
      opts.exec == Exec::serial
          ? kernels::minimize_first_serial(f[idx(last)], {}, inst.lambda[idx(last)], inst.indicator[idx(last)])
          : kernels::minimize_first_parallel(f[idx(last)], {}, inst.lambda[idx(last)], inst.indicator[idx(last)]);
  sol.objective = root.value + inst.offset;

  if (opts.store_parametric_costs) {
    sol.x.assign(idx(n), 0.0);
    sol.z.assign(idx(n), false);
    sol.x[idx(last)] = root.free ? root.x : 0.0;
    sol.z[idx(last)] = root.free;
    std::vector<double> rest;
    for (int u = n - 2; u >= 0; --u) {
      const auto& coords = f[idx(u)].coords();
      rest.clear();
      for (std::size_t k = 1; k < coords.size(); ++k) rest.push_back(sol.x[idx(coords[k])]);
      auto r = opts.exec == Exec::serial
                   ? kernels::minimize_first_serial(f[idx(u)], rest, inst.lambda[idx(u)], inst.indicator[idx(u)])
                   : kernels::minimize_first_parallel(f[idx(u)], rest, inst.lambda[idx(u)], inst.indicator[idx(u)]);
      sol.x[idx(u)] = r.free ? r.x : 0.0;
      sol.z[idx(u)] = r.free;
    }
    sol.stats.recovered_objective = evaluate_objective(inst, sol.x, sol.z);
  } else {
    sol.stats.recovered_objective = std::numeric_limits<double>::quiet_NaN();
  }

  std::size_t total = 0;
  for (auto c : sol.stats.pieces_after_prune) {
    total += c;
    sol.stats.max_retained = std::max(sol.stats.max_retained, c);
  }
  sol.stats.mean_retained = static_cast<double>(total) / static_cast<double>(n);
  sol.stats.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return sol;
}

PreparedProblem prepare(const Instance& inst, const DecompositionChoice& decomp, const SolveOptions& opts) {
  inst.check_shape();
  PreparedProblem prep;
  NormalizedInstance norm = normalize_diagonal(fix_nonpositive_lambda(inst));
  prep.scale = norm.scale;
  prep.diagnostics = validate(norm.instance);

  const int n = inst.size();
  const Graph graph = support_graph(norm.instance.q);
  const int bw = graph.bandwidth();
  TreeDecomposition tree;
  std::vector<int> root_order;
  switch (decomp.kind) {
    case DecompositionChoice::Kind::automatic: {
      TreeDecomposition heuristic = heuristic_decomposition(graph);
      if (bw <= heuristic.width()) {
        tree = path_decomposition_banded(n, bw);
      } else {
        tree = balance(heuristic, n);
      }
      break;
    }
    case DecompositionChoice::Kind::banded:
      tree = path_decomposition_banded(n, decomp.bandwidth);
      break;
    case DecompositionChoice::Kind::given:
      tree = decomp.tree;
      root_order = decomp.root_order;
      break;
  }
  if (auto err = check_decomposition(graph, tree)) throw InputError("invalid tree decomposition: " + *err);
  if (check_balanced(tree)) {
    tree = balance(tree, n);
    root_order.clear();
  }
  prep.ld = label(tree, n, root_order);
  prep.instance = permute_instance(norm.instance, prep.ld.node_label);
  prep.bandwidth = std::min(bw, prep.instance.q.bandwidth());

  const double max_scale = *std::max_element(prep.scale.begin(), prep.scale.end());
  BoundMode bound = opts.bound_mode;
  if (bound == BoundMode::automatic) {
    bound = opts.user_bound > 0.0 ? BoundMode::user : opts.data_bound > 0.0 ? BoundMode::data : BoundMode::theory;
  }
  switch (bound) {
    case BoundMode::user:
      if (!(opts.user_bound > 0.0)) throw InputError("user bound U must be positive");
      prep.U = opts.user_bound * max_scale;
      break;
    case BoundMode::data:
      if (!(opts.data_bound > 0.0)) throw InputError("data bound U must be positive");
      prep.U = opts.data_bound * max_scale;
      break;
    default: {
      BoundStructure s = opts.structure;
      if (s.kind == BoundStructure::Kind::banded) {
        if (s.bandwidth <= 0) s.bandwidth = std::max(1, prep.bandwidth);
      } else if (s.delta <= 0.0) {
        const Graph labeled = support_graph(prep.instance.q);
        auto delta = neighborhood_sizes(prep.ld, labeled, std::min(n, 32));
        auto fit = fit_volume_growth(delta);
        s.delta = std::max(fit.delta, 1.0);
        s.gamma = fit.gamma;
      }
      prep.U = compute_U_theory(prep.instance, s, prep.diagnostics);
      break;
    }
  }
  if (prep.U == 0.0) prep.U = 1.0;  // c = 0: x* = 0 and any positive bound is valid
  return prep;
}

Solution restore_solution(const PreparedProblem& prep, const Instance& original, Solution labeled) {
  if (labeled.x.empty()) return labeled;
  const auto n = prep.scale.size();
  Solution out = std::move(labeled);
  std::vector<double> x(n);
  std::vector<bool> z(n);
  for (std::size_t i = 0; i < n; ++i) {
    const auto l = idx(prep.ld.node_label[i]);
    x[i] = out.x[l] / prep.scale[i];
    z[i] = out.z[l];
  }
  out.x = std::move(x);
  out.z = std::move(z);
  out.stats.recovered_objective = evaluate_objective(original, out.x, out.z);
  return out;
}

Solution solve_instance(const Instance& inst, const DecompositionChoice& decomp, const SolveOptions& opts) {
  PreparedProblem prep = prepare(inst, decomp, opts);
  return restore_solution(prep, inst, solve(prep.instance, prep.ld, prep.U, opts));
}

double decay_diagnostic(const SparseSymMatrix& q, std::span<const int> subset) {
  if (subset.empty()) return -std::numeric_limits<double>::infinity();
  if (subset.size() > 2000) throw InputError("decay diagnostic supports at most 2000 indices");
  const Diagnostics diag = analyze_spectrum(q);
  const auto k = decay_constants(diag.mu_min, diag.kappa2);
  Eigen::MatrixXd sub = q.principal_submatrix(subset);
  Eigen::LLT<Eigen::MatrixXd> llt(sub);
  if (llt.info() != Eigen::Success) throw NumericalError("principal submatrix is singular");
  Eigen::MatrixXd inv = llt.solve(Eigen::MatrixXd::Identity(sub.rows(), sub.cols()));

  const Graph g = support_graph(q);
  double worst = -std::numeric_limits<double>::infinity();
  for (std::size_t a = 0; a < subset.size(); ++a) {
    const int src = subset[a];
    auto dist = bfs_distances(g, std::span<const int>(&src, 1));
    for (std::size_t b = 0; b < subset.size(); ++b) {
      const int d = dist[idx(subset[b])];
      const double bound = d == kUnreachable ? 0.0 : k.c1 * std::pow(k.rho, d);
      worst = std::max(worst, std::abs(inv(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(b))) - bound);
    }
  }
  return worst;
}

}  // namespace twqp
