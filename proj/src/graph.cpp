#include "twqp/graph.hpp"

#include <algorithm>
#include <cstdlib>
#include <deque>

namespace twqp {

void Graph::add_edge(int i, int j) {
  if (i == j) return;
  auto insert_sorted = [](std::vector<int>& list, int v) {
    auto it = std::lower_bound(list.begin(), list.end(), v);
    if (it == list.end() || *it != v) list.insert(it, v);
  };
  insert_sorted(adj_[static_cast<std::size_t>(i)], j);
  insert_sorted(adj_[static_cast<std::size_t>(j)], i);
}

bool Graph::has_edge(int i, int j) const {
  const auto& list = adj_[static_cast<std::size_t>(i)];
  return std::binary_search(list.begin(), list.end(), j);
}

std::size_t Graph::edge_count() const {
  std::size_t twice = 0;
  for (const auto& list : adj_) twice += list.size();
  return twice / 2;
}

int Graph::max_degree() const {
  int best = 0;
  for (const auto& list : adj_) best = std::max(best, static_cast<int>(list.size()));
  return best;
}

Graph Graph::relabeled(std::span<const int> new_label) const {
  Graph out(size());
  for (int i = 0; i < size(); ++i) {
    auto& list = out.adj_[static_cast<std::size_t>(new_label[static_cast<std::size_t>(i)])];
    for (int j : neighbors(i)) list.push_back(new_label[static_cast<std::size_t>(j)]);
  }
  for (auto& list : out.adj_) std::sort(list.begin(), list.end());
  return out;
}

int Graph::bandwidth() const {
  int w = 0;
  for (int i = 0; i < size(); ++i)
    for (int j : neighbors(i)) w = std::max(w, std::abs(i - j));
  return w;
}

std::vector<int> Graph::components() const {
  std::vector<int> comp(static_cast<std::size_t>(size()), -1);
  int next = 0;
  std::vector<int> stack;
  for (int s = 0; s < size(); ++s) {
    if (comp[static_cast<std::size_t>(s)] >= 0) continue;
    comp[static_cast<std::size_t>(s)] = next;
    stack.push_back(s);
    while (!stack.empty()) {
      int v = stack.back();
      stack.pop_back();
      for (int nb : neighbors(v)) {
        if (comp[static_cast<std::size_t>(nb)] < 0) {
          comp[static_cast<std::size_t>(nb)] = next;
          stack.push_back(nb);
        }
      }
    }
    ++next;
  }
  return comp;
}

std::vector<int> bfs_distances(const Graph& g, std::span<const int> sources, int max_depth,
                               std::span<const char> allowed) {
  std::vector<int> dist(static_cast<std::size_t>(g.size()), kUnreachable);
  auto ok = [&](int v) { return allowed.empty() || allowed[static_cast<std::size_t>(v)]; };
  std::deque<int> queue;
  for (int s : sources) {
    if (!ok(s) || dist[static_cast<std::size_t>(s)] == 0) continue;
    dist[static_cast<std::size_t>(s)] = 0;
    queue.push_back(s);
  }
  while (!queue.empty()) {
    int v = queue.front();
    queue.pop_front();
    int dv = dist[static_cast<std::size_t>(v)];
    if (dv >= max_depth) continue;
    for (int nb : g.neighbors(v)) {
      if (!ok(nb) || dist[static_cast<std::size_t>(nb)] != kUnreachable) continue;
      dist[static_cast<std::size_t>(nb)] = dv + 1;
      queue.push_back(nb);
    }
  }
  return dist;
}

}  // namespace twqp
