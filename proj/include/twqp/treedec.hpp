#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "twqp/graph.hpp"

namespace twqp {

/// Bags arranged in a rooted tree. child[b] points one step toward the root
/// (-1 at the root); the bags whose child is b are its parents.
struct TreeDecomposition {
  std::vector<std::vector<int>> bags;  // each sorted ascending
  std::vector<int> child;

  std::size_t bag_count() const { return bags.size(); }
  int width() const;
  int root() const;
  std::vector<std::vector<int>> parents() const;
  /// True when no bag has more than one parent.
  bool is_path() const;
};

/// Balanced decomposition with topological bag labels and matching node labels.
///
/// Node and bag labels are 0-based: bag u (u < n - width) is the real bag whose
/// new node is u; for u >= n - width, B_u = {u, ..., n-1} is auxiliary.
struct LabeledDecomposition {
  int n = 0;
  int width = 0;
  /// Real bags indexed by label, holding new node labels.
  TreeDecomposition tree;
  std::vector<int> node_label;  // original node -> new label
  std::vector<int> original;    // new label -> original node
  /// J_u is the label range [subtree_lo[u], u).
  std::vector<int> subtree_lo;
  /// par[u]: bags feeding bag u (auxiliary bags get {u - 1}).
  std::vector<std::vector<int>> par;

  int real_bag_count() const { return n - width; }
  std::vector<int> bag(int u) const;
  int n_u(int u) const { return u - subtree_lo[static_cast<std::size_t>(u)]; }
  bool is_path() const { return tree.is_path(); }
};

/// Bags {i, ..., i+w} for i = 0 .. n-w-1, rooted at the last bag.
TreeDecomposition path_decomposition_banded(int n, int w);

/// Min-fill elimination ordering (ties: min degree, then smallest node).
TreeDecomposition heuristic_decomposition(const Graph& g);

/// Pads and splits bags so every bag has width+1 nodes and adjacent bags
/// share width nodes. Disconnected inputs are chained into one tree.
TreeDecomposition balance(const TreeDecomposition& t, int n);

/// Labels a balanced decomposition. Root-bag nodes receive the top labels in
/// ascending original order unless root_order lists them explicitly.
LabeledDecomposition label(const TreeDecomposition& t, int n, std::span<const int> root_order = {});

/// Checks coverage, edge coverage, and connectivity of every node's bags.
/// Returns a description of the first failure.
std::optional<std::string> check_decomposition(const Graph& g, const TreeDecomposition& t);
std::optional<std::string> check_balanced(const TreeDecomposition& t);

/// delta[m] = max_u |{ i in J_u : dist(i, B_u) <= m }| for m = 0..m_max,
/// distances taken inside supp_u. `g` must use the new labels.
std::vector<int> neighborhood_sizes(const LabeledDecomposition& ld, const Graph& g, int m_max);

/// Least-squares fit of log delta_m = log delta + gamma log m over m >= 1 with
/// delta_m > 0, then delta raised so that delta * m^gamma covers every sample.
struct VolumeGrowth {
  double delta = 0.0;
  double gamma = 0.0;
};
VolumeGrowth fit_volume_growth(std::span<const int> delta_m);

}  // namespace twqp
