#include "twqp/treedec.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <set>
#include <sstream>
#include <tuple>

#include "twqp/error.hpp"

namespace twqp {

namespace {

std::size_t idx(int i) { return static_cast<std::size_t>(i); }

std::vector<int> set_difference(const std::vector<int>& a, const std::vector<int>& b) {
  std::vector<int> out;
  std::set_difference(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(out));
  return out;
}

std::size_t intersection_size(const std::vector<int>& a, const std::vector<int>& b) {
  std::size_t count = 0;
  auto i = a.begin();
  auto j = b.begin();
  while (i != a.end() && j != b.end()) {
    if (*i < *j) {
      ++i;
    } else if (*j < *i) {
      ++j;
    } else {
      ++count;
      ++i;
      ++j;
    }
  }
  return count;
}

void insert_sorted(std::vector<int>& v, int x) {
  auto it = std::lower_bound(v.begin(), v.end(), x);
  if (it == v.end() || *it != x) v.insert(it, x);
}

void erase_sorted(std::vector<int>& v, int x) {
  auto it = std::lower_bound(v.begin(), v.end(), x);
  if (it != v.end() && *it == x) v.erase(it);
}

}  // namespace

int TreeDecomposition::width() const {
  std::size_t best = 0;
  for (const auto& b : bags) best = std::max(best, b.size());
  return static_cast<int>(best) - 1;
}

int TreeDecomposition::root() const {
  for (std::size_t b = 0; b < child.size(); ++b)
    if (child[b] < 0) return static_cast<int>(b);
  return -1;
}

std::vector<std::vector<int>> TreeDecomposition::parents() const {
  std::vector<std::vector<int>> par(bags.size());
  for (std::size_t b = 0; b < child.size(); ++b)
    if (child[b] >= 0) par[idx(child[b])].push_back(static_cast<int>(b));
  return par;
}

bool TreeDecomposition::is_path() const {
  std::vector<int> count(bags.size(), 0);
  for (int c : child)
    if (c >= 0 && ++count[idx(c)] > 1) return false;
  return true;
}

std::vector<int> LabeledDecomposition::bag(int u) const {
  if (u < real_bag_count()) return tree.bags[idx(u)];
  std::vector<int> out;
  for (int v = u; v < n; ++v) out.push_back(v);
  return out;
}

TreeDecomposition path_decomposition_banded(int n, int w) {
  if (w < 0 || w >= n) {
    std::ostringstream msg;
    msg << "bandwidth " << w << " must satisfy 0 <= w < n = " << n;
    throw InputError(msg.str());
  }
  TreeDecomposition t;
  const int count = n - w;
  for (int i = 0; i < count; ++i) {
    std::vector<int> bag;
    for (int k = i; k <= i + w; ++k) bag.push_back(k);
    t.bags.push_back(std::move(bag));
    t.child.push_back(i + 1 < count ? i + 1 : -1);
  }
  return t;
}

TreeDecomposition heuristic_decomposition(const Graph& g) {
  const int n = g.size();
  std::vector<std::vector<int>> nbr(idx(n));
  for (int v = 0; v < n; ++v) nbr[idx(v)].assign(g.neighbors(v).begin(), g.neighbors(v).end());

  auto fill_of = [&](int v) {
    const auto& nv = nbr[idx(v)];
    int missing = 0;
    for (std::size_t a = 0; a < nv.size(); ++a)
      for (std::size_t b = a + 1; b < nv.size(); ++b)
        if (!std::binary_search(nbr[idx(nv[a])].begin(), nbr[idx(nv[a])].end(), nv[b])) ++missing;
    return missing;
  };

  using Key = std::tuple<int, int, int>;  // fill, degree, node
  std::set<Key> queue;
  std::vector<Key> key(idx(n));
  for (int v = 0; v < n; ++v) {
    key[idx(v)] = {fill_of(v), static_cast<int>(nbr[idx(v)].size()), v};
    queue.insert(key[idx(v)]);
  }

  std::vector<int> position(idx(n), -1);
  std::vector<int> order;
  std::vector<std::vector<int>> bag_nodes;
  std::vector<std::vector<int>> later_nbrs;
  order.reserve(idx(n));
  while (!queue.empty()) {
    int v = std::get<2>(*queue.begin());
    queue.erase(queue.begin());
    position[idx(v)] = static_cast<int>(order.size());
    order.push_back(v);

    std::vector<int> nv = nbr[idx(v)];
    std::vector<int> bag = nv;
    insert_sorted(bag, v);
    bag_nodes.push_back(bag);
    later_nbrs.push_back(nv);

    for (std::size_t a = 0; a < nv.size(); ++a) {
      erase_sorted(nbr[idx(nv[a])], v);
      for (std::size_t b = a + 1; b < nv.size(); ++b) {
        insert_sorted(nbr[idx(nv[a])], nv[b]);
        insert_sorted(nbr[idx(nv[b])], nv[a]);
      }
    }
    std::set<int> affected(nv.begin(), nv.end());
    for (int x : nv)
      for (int y : nbr[idx(x)]) affected.insert(y);
    for (int x : affected) {
      if (position[idx(x)] >= 0) continue;
      queue.erase(key[idx(x)]);
      key[idx(x)] = {fill_of(x), static_cast<int>(nbr[idx(x)].size()), x};
      queue.insert(key[idx(x)]);
    }
  }

  TreeDecomposition t;
  t.bags = std::move(bag_nodes);
  t.child.assign(idx(n), -1);
  int previous_root = -1;
  for (int step = 0; step < n; ++step) {
    const auto& nv = later_nbrs[idx(step)];
    if (nv.empty()) {
      // Last vertex of a component: chain component roots in elimination order.
      if (previous_root >= 0) t.child[idx(previous_root)] = step;
      previous_root = step;
      continue;
    }
    int best = n;
    for (int x : nv) best = std::min(best, position[idx(x)]);
    t.child[idx(step)] = best;
  }
  return t;
}

TreeDecomposition balance(const TreeDecomposition& input, int n) {
  // Undirected working copy.
  std::vector<std::vector<int>> bags = input.bags;
  for (auto& b : bags) {
    std::sort(b.begin(), b.end());
    b.erase(std::unique(b.begin(), b.end()), b.end());
  }
  std::vector<int> child = input.child;

  std::vector<bool> covered(idx(n), false);
  for (const auto& b : bags)
    for (int v : b) {
      if (v < 0 || v >= n) throw InputError("bag node outside 1..n");
      covered[idx(v)] = true;
    }
  for (int v = 0; v < n; ++v) {
    if (!covered[idx(v)]) {
      bags.push_back({v});
      child.push_back(-1);
    }
  }
  if (bags.empty()) throw InputError("empty decomposition");

  std::vector<int> roots;
  for (std::size_t b = 0; b < bags.size(); ++b)
    if (child[b] < 0) roots.push_back(static_cast<int>(b));
  for (std::size_t k = 0; k + 1 < roots.size(); ++k) child[idx(roots[k])] = roots[k + 1];
  int root = roots.back();

  std::vector<std::vector<int>> adj(bags.size());
  for (std::size_t b = 0; b < bags.size(); ++b) {
    if (child[b] >= 0) {
      adj[b].push_back(child[b]);
      adj[idx(child[b])].push_back(static_cast<int>(b));
    }
  }
  for (auto& a : adj) std::sort(a.begin(), a.end());

  const int width = [&] {
    std::size_t w = 0;
    for (const auto& b : bags) w = std::max(w, b.size());
    return static_cast<int>(w) - 1;
  }();
  const auto full = idx(width + 1);

  // Pad bags to width+1 nodes, walking outward from a largest bag and
  // borrowing the largest missing labels from the already padded neighbor.
  int start = 0;
  for (std::size_t b = 0; b < bags.size(); ++b)
    if (bags[b].size() == full) {
      start = static_cast<int>(b);
      break;
    }
  std::vector<bool> seen(bags.size(), false);
  std::deque<int> queue{start};
  seen[idx(start)] = true;
  while (!queue.empty()) {
    int a = queue.front();
    queue.pop_front();
    for (int b : adj[idx(a)]) {
      if (seen[idx(b)]) continue;
      seen[idx(b)] = true;
      auto extra = set_difference(bags[idx(a)], bags[idx(b)]);
      while (bags[idx(b)].size() < full) {
        insert_sorted(bags[idx(b)], extra.back());
        extra.pop_back();
      }
      queue.push_back(b);
    }
  }

  // Contract adjacent equal bags.
  std::vector<bool> alive(bags.size(), true);
  bool changed = true;
  while (changed) {
    changed = false;
    for (std::size_t a = 0; a < bags.size(); ++a) {
      if (!alive[a]) continue;
      for (std::size_t k = 0; k < adj[a].size(); ++k) {
        int b = adj[a][k];
        if (bags[idx(b)] != bags[a]) continue;
        alive[idx(b)] = false;
        for (int c : adj[idx(b)]) {
          if (c == static_cast<int>(a)) continue;
          erase_sorted(adj[idx(c)], b);
          insert_sorted(adj[idx(c)], static_cast<int>(a));
          insert_sorted(adj[a], c);
        }
        erase_sorted(adj[a], b);
        adj[idx(b)].clear();
        if (root == b) root = static_cast<int>(a);
        changed = true;
        break;
      }
      if (changed) break;
    }
  }

  // Replace edges whose bags share fewer than width nodes by a chain that
  // swaps one node per step.
  const std::size_t original_count = bags.size();
  for (std::size_t a = 0; a < original_count; ++a) {
    if (!alive[a]) continue;
    std::vector<int> targets = adj[a];
    for (int b : targets) {
      if (b < static_cast<int>(a) && b < static_cast<int>(original_count)) continue;
      if (intersection_size(bags[a], bags[idx(b)]) + 1 >= full) continue;
      auto drop = set_difference(bags[a], bags[idx(b)]);
      auto add = set_difference(bags[idx(b)], bags[a]);
      erase_sorted(adj[a], b);
      erase_sorted(adj[idx(b)], static_cast<int>(a));
      int prev = static_cast<int>(a);
      std::vector<int> current = bags[a];
      for (std::size_t step = 0; step + 1 < drop.size(); ++step) {
        erase_sorted(current, drop[step]);
        insert_sorted(current, add[step]);
        int id = static_cast<int>(bags.size());
        bags.push_back(current);
        alive.push_back(true);
        adj.push_back({});
        insert_sorted(adj[idx(prev)], id);
        insert_sorted(adj[idx(id)], prev);
        prev = id;
      }
      insert_sorted(adj[idx(prev)], b);
      insert_sorted(adj[idx(b)], prev);
    }
  }

  // Orient toward the root and compact.
  std::vector<int> new_id(bags.size(), -1);
  TreeDecomposition out;
  for (std::size_t b = 0; b < bags.size(); ++b) {
    if (!alive[b]) continue;
    new_id[b] = static_cast<int>(out.bags.size());
    out.bags.push_back(bags[b]);
  }
  out.child.assign(out.bags.size(), -1);
  std::vector<bool> visited(bags.size(), false);
  queue = {root};
  visited[idx(root)] = true;
  while (!queue.empty()) {
    int a = queue.front();
    queue.pop_front();
    for (int b : adj[idx(a)]) {
      if (visited[idx(b)]) continue;
      visited[idx(b)] = true;
      out.child[idx(new_id[idx(b)])] = new_id[idx(a)];
      queue.push_back(b);
    }
  }
  return out;
}

LabeledDecomposition label(const TreeDecomposition& t, int n, std::span<const int> root_order) {
  if (auto err = check_balanced(t)) throw InputError("decomposition is not balanced: " + *err);
  const int width = t.width();
  const int bag_count = static_cast<int>(t.bag_count());
  if (bag_count != n - width) {
    std::ostringstream msg;
    msg << "balanced decomposition has " << bag_count << " bags, expected n - width = " << n - width;
    throw InputError(msg.str());
  }
  const int root = t.root();
  auto par = t.parents();

  // Iterative post-order over parents in index order.
  std::vector<int> bag_label(idx(bag_count), -1);
  int next = 0;
  std::vector<std::pair<int, std::size_t>> stack{{root, 0}};
  while (!stack.empty()) {
    auto& [b, k] = stack.back();
    if (k < par[idx(b)].size()) {
      int p = par[idx(b)][k++];
      stack.push_back({p, 0});
      continue;
    }
    bag_label[idx(b)] = next;
    ++next;
    stack.pop_back();
  }
  if (next != bag_count) throw InputError("decomposition is not a connected tree");

  LabeledDecomposition ld;
  ld.n = n;
  ld.width = width;
  ld.node_label.assign(idx(n), -1);
  for (int b = 0; b < bag_count; ++b) {
    if (b == root) continue;
    auto fresh = set_difference(t.bags[idx(b)], t.bags[idx(t.child[idx(b)])]);
    ld.node_label[idx(fresh.front())] = bag_label[idx(b)];
  }
  std::vector<int> root_nodes = t.bags[idx(root)];
  if (!root_order.empty()) {
    std::vector<int> given(root_order.begin(), root_order.end());
    std::vector<int> sorted_given = given;
    std::sort(sorted_given.begin(), sorted_given.end());
    if (sorted_given != root_nodes) throw InputError("root order does not match the root bag");
    root_nodes = given;
  }
  for (std::size_t k = 0; k < root_nodes.size(); ++k)
    ld.node_label[idx(root_nodes[k])] = n - width - 1 + static_cast<int>(k);

  ld.original.assign(idx(n), -1);
  for (int v = 0; v < n; ++v) {
    int l = ld.node_label[idx(v)];
    if (l < 0 || ld.original[idx(l)] >= 0) throw InputError("decomposition does not induce a node labeling");
    ld.original[idx(l)] = v;
  }

  ld.tree.bags.assign(idx(bag_count), {});
  ld.tree.child.assign(idx(bag_count), -1);
  for (int b = 0; b < bag_count; ++b) {
    int u = bag_label[idx(b)];
    auto& nb = ld.tree.bags[idx(u)];
    for (int v : t.bags[idx(b)]) nb.push_back(ld.node_label[idx(v)]);
    std::sort(nb.begin(), nb.end());
    if (b != root) ld.tree.child[idx(u)] = bag_label[idx(t.child[idx(b)])];
  }

  ld.subtree_lo.assign(idx(n), 0);
  ld.par.assign(idx(n), {});
  auto new_par = ld.tree.parents();
  for (int u = 0; u < bag_count; ++u) {
    int low = u;
    for (int p : new_par[idx(u)]) low = std::min(low, ld.subtree_lo[idx(p)]);
    ld.subtree_lo[idx(u)] = low;
    ld.par[idx(u)] = new_par[idx(u)];
  }
  for (int u = bag_count; u < n; ++u) {
    ld.subtree_lo[idx(u)] = 0;
    ld.par[idx(u)] = {u - 1};
  }
  return ld;
}

std::optional<std::string> check_decomposition(const Graph& g, const TreeDecomposition& t) {
  const int n = g.size();
  const auto count = t.bag_count();
  if (t.child.size() != count) return "child array length differs from bag count";
  int roots = 0;
  for (std::size_t b = 0; b < count; ++b) {
    int c = t.child[b];
    if (c < -1 || c >= static_cast<int>(count) || c == static_cast<int>(b)) return "invalid child pointer";
    if (c < 0) ++roots;
  }
  if (count > 0 && roots != 1) return "decomposition must have exactly one root";
  // Every bag must reach the root without revisiting a bag.
  std::vector<int> state(count, 0);  // 0 unknown, 1 in progress, 2 reaches root
  for (std::size_t b = 0; b < count; ++b) {
    std::vector<int> path;
    int cur = static_cast<int>(b);
    while (cur >= 0 && state[idx(cur)] == 0) {
      state[idx(cur)] = 1;
      path.push_back(cur);
      cur = t.child[idx(cur)];
    }
    if (cur >= 0 && state[idx(cur)] == 1) return "child pointers contain a cycle";
    for (int p : path) state[idx(p)] = 2;
  }

  std::vector<std::vector<int>> holders(idx(n));
  for (std::size_t b = 0; b < count; ++b) {
    const auto& bag = t.bags[b];
    for (std::size_t k = 0; k < bag.size(); ++k) {
      if (bag[k] < 0 || bag[k] >= n) return "bag contains a node outside the graph";
      if (k > 0 && bag[k] <= bag[k - 1]) return "bag is not sorted and duplicate-free";
      holders[idx(bag[k])].push_back(static_cast<int>(b));
    }
  }
  for (int v = 0; v < n; ++v)
    if (holders[idx(v)].empty()) return "node " + std::to_string(v + 1) + " is in no bag";
  for (int v = 0; v < n; ++v) {
    for (int w : g.neighbors(v)) {
      if (w < v) continue;
      if (intersection_size(holders[idx(v)], holders[idx(w)]) == 0)
        return "edge (" + std::to_string(v + 1) + ", " + std::to_string(w + 1) + ") is in no bag";
    }
  }
  for (int v = 0; v < n; ++v) {
    std::size_t links = 0;
    for (int b : holders[idx(v)]) {
      int c = t.child[idx(b)];
      if (c >= 0 && std::binary_search(t.bags[idx(c)].begin(), t.bags[idx(c)].end(), v)) ++links;
    }
    if (links + 1 != holders[idx(v)].size())
      return "bags containing node " + std::to_string(v + 1) + " are not connected";
  }
  return std::nullopt;
}

std::optional<std::string> check_balanced(const TreeDecomposition& t) {
  if (t.bags.empty()) return "no bags";
  const auto full = t.bags.front().size();
  for (std::size_t b = 0; b < t.bag_count(); ++b) {
    if (t.bags[b].size() != full) return "bags have different sizes";
    int c = t.child[b];
    if (c >= 0 && intersection_size(t.bags[b], t.bags[idx(c)]) + 1 != full)
      return "adjacent bags do not share exactly width nodes";
  }
  if (t.root() < 0) return "no root bag";
  return std::nullopt;
}

std::vector<int> neighborhood_sizes(const LabeledDecomposition& ld, const Graph& g, int m_max) {
  if (m_max < 1) throw InputError("m_max must be at least 1");
  const int n = ld.n;
  std::vector<int> delta(idx(m_max) + 1, 0);
  std::vector<int> dist(idx(n), kUnreachable);
  std::vector<char> in_bag(idx(n), 0);
  std::vector<int> touched;
  std::vector<int> counts(idx(m_max) + 1, 0);
  for (int u = 0; u < n; ++u) {
    const int lo = ld.subtree_lo[idx(u)];
    auto bag = ld.bag(u);
    for (int v : bag) in_bag[idx(v)] = 1;
    auto allowed = [&](int v) { return (v >= lo && v < u) || in_bag[idx(v)]; };
    std::fill(counts.begin(), counts.end(), 0);
    std::deque<int> queue;
    for (int v : bag) {
      dist[idx(v)] = 0;
      touched.push_back(v);
      queue.push_back(v);
    }
    while (!queue.empty()) {
      int v = queue.front();
      queue.pop_front();
      int dv = dist[idx(v)];
      if (dv >= m_max) continue;
      for (int w : g.neighbors(v)) {
        if (!allowed(w) || dist[idx(w)] != kUnreachable) continue;
        dist[idx(w)] = dv + 1;
        touched.push_back(w);
        ++counts[idx(dv + 1)];
        queue.push_back(w);
      }
    }
    int running = 0;
    for (int m = 1; m <= m_max; ++m) {
      running += counts[idx(m)];
      delta[idx(m)] = std::max(delta[idx(m)], running);
    }
    for (int v : touched) dist[idx(v)] = kUnreachable;
    touched.clear();
    for (int v : bag) in_bag[idx(v)] = 0;
  }
  return delta;
}

VolumeGrowth fit_volume_growth(std::span<const int> delta_m) {
  std::vector<std::pair<double, double>> pts;
  for (std::size_t m = 1; m < delta_m.size(); ++m)
    if (delta_m[m] > 0) pts.emplace_back(std::log(static_cast<double>(m)), std::log(static_cast<double>(delta_m[m])));
  VolumeGrowth fit;
  if (pts.size() >= 2) {
    double mx = 0, my = 0;
    for (auto [x, y] : pts) {
      mx += x;
      my += y;
    }
    mx /= static_cast<double>(pts.size());
    my /= static_cast<double>(pts.size());
    double sxy = 0, sxx = 0;
    for (auto [x, y] : pts) {
      sxy += (x - mx) * (y - my);
      sxx += (x - mx) * (x - mx);
    }
    fit.gamma = sxx > 0 ? std::max(0.0, sxy / sxx) : 0.0;
  }
  for (std::size_t m = 1; m < delta_m.size(); ++m) {
    double bound = static_cast<double>(delta_m[m]) / std::pow(static_cast<double>(m), fit.gamma);
    fit.delta = std::max(fit.delta, bound);
  }
  return fit;
}

}  // namespace twqp
