#pragma once

#include <cstddef>
#include <limits>
#include <span>
#include <vector>

namespace twqp {

/// Simple undirected graph on nodes 0..n-1 with sorted adjacency lists.
class Graph {
 public:
  Graph() = default;
  explicit Graph(int n) : adj_(static_cast<std::size_t>(n)) {}

  int size() const { return static_cast<int>(adj_.size()); }

  /// Adds {i, j}; self-loops and repeated edges are ignored.
  void add_edge(int i, int j);

  std::span<const int> neighbors(int i) const { return adj_[static_cast<std::size_t>(i)]; }
  int degree(int i) const { return static_cast<int>(adj_[static_cast<std::size_t>(i)].size()); }
  bool has_edge(int i, int j) const;
  std::size_t edge_count() const;
  int max_degree() const;

  /// Graph with node i renamed to new_label[i].
  Graph relabeled(std::span<const int> new_label) const;

  /// Largest |i - j| over edges; 0 for an edgeless graph.
  int bandwidth() const;

  /// Component id per node, ids assigned in order of smallest member.
  std::vector<int> components() const;

 private:
  std::vector<std::vector<int>> adj_;
};

inline constexpr int kUnreachable = std::numeric_limits<int>::max();

/// Multi-source BFS distances. Nodes with allowed[i] == false are never
/// entered; an empty mask allows every node. Search stops past max_depth.
std::vector<int> bfs_distances(const Graph& g, std::span<const int> sources,
                               int max_depth = kUnreachable,
                               std::span<const char> allowed = {});

}  // namespace twqp
