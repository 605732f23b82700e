#pragma once

// Ring perception over a plain adjacency structure: bridge detection for
// ring-bond flags and a minimum cycle basis (Horton candidates reduced by
// GF(2) elimination) for the SSSR-sized ring set.

#include <algorithm>
#include <cstdint>
#include <functional>
#include <queue>
#include <set>
#include <utility>
#include <vector>

namespace attrilens::chem {

struct GraphEdge {
  std::size_t a;
  std::size_t b;
};

namespace detail {

struct Incidence {
  std::size_t neighbor;
  std::size_t edge;
};

inline std::vector<std::vector<Incidence>> build_incidence(std::size_t n,
                                                           const std::vector<GraphEdge>& edges) {
  std::vector<std::vector<Incidence>> inc(n);
  for (std::size_t e = 0; e < edges.size(); ++e) {
    inc[edges[e].a].push_back({edges[e].b, e});
    inc[edges[e].b].push_back({edges[e].a, e});
  }
  return inc;
}

class EdgeSet {
 public:
  explicit EdgeSet(std::size_t n) : words_((n + 63) / 64, 0) {}
  void flip(std::size_t i) { words_[i / 64] ^= (std::uint64_t{1} << (i % 64)); }
  bool test(std::size_t i) const { return (words_[i / 64] >> (i % 64)) & 1U; }
  void xor_with(const EdgeSet& o) {
    for (std::size_t i = 0; i < words_.size(); ++i) words_[i] ^= o.words_[i];
  }
  bool empty() const {
    return std::all_of(words_.begin(), words_.end(), [](std::uint64_t w) { return w == 0; });
  }
  std::size_t lowest() const {
    for (std::size_t i = 0; i < words_.size(); ++i) {
      if (words_[i] != 0) return i * 64 + static_cast<std::size_t>(__builtin_ctzll(words_[i]));
    }
    return static_cast<std::size_t>(-1);
  }
  bool operator==(const EdgeSet&) const = default;
  bool operator<(const EdgeSet& o) const { return words_ < o.words_; }

 private:
  std::vector<std::uint64_t> words_;
};

}  // namespace detail

/// Flags every edge that lies on at least one cycle (i.e. is not a bridge).
inline std::vector<bool> find_ring_edges(std::size_t n, const std::vector<GraphEdge>& edges) {
  auto inc = detail::build_incidence(n, edges);
  std::vector<int> disc(n, -1);
  std::vector<int> low(n, 0);
  std::vector<bool> ring(edges.size(), true);
  int timer = 0;

  // Iterative DFS; recursion depth would follow chain length otherwise.
  struct Frame {
    std::size_t v;
    std::size_t parent_edge;
    std::size_t next;
  };
  constexpr auto kNone = static_cast<std::size_t>(-1);
  for (std::size_t root = 0; root < n; ++root) {
    if (disc[root] != -1) continue;
    std::vector<Frame> stack{{root, kNone, 0}};
    disc[root] = low[root] = timer++;
    while (!stack.empty()) {
      auto& f = stack.back();
      if (f.next < inc[f.v].size()) {
        const auto [w, e] = inc[f.v][f.next++];
        if (e == f.parent_edge) continue;
        if (disc[w] == -1) {
          disc[w] = low[w] = timer++;
          stack.push_back({w, e, 0});
        } else {
          low[f.v] = std::min(low[f.v], disc[w]);
        }
      } else {
        const Frame done = f;
        stack.pop_back();
        if (!stack.empty()) {
          auto& parent = stack.back();
          low[parent.v] = std::min(low[parent.v], low[done.v]);
          if (low[done.v] > disc[parent.v]) ring[done.parent_edge] = false;
        }
      }
    }
  }
  return ring;
}

/// Connected-component id per vertex; returns the number of components.
inline std::size_t label_components(std::size_t n, const std::vector<GraphEdge>& edges,
                                    std::vector<std::size_t>& component) {
  auto inc = detail::build_incidence(n, edges);
  component.assign(n, static_cast<std::size_t>(-1));
  std::size_t count = 0;
  for (std::size_t s = 0; s < n; ++s) {
    if (component[s] != static_cast<std::size_t>(-1)) continue;
    std::vector<std::size_t> stack{s};
    component[s] = count;
    while (!stack.empty()) {
      const auto v = stack.back();
      stack.pop_back();
      for (const auto& [w, e] : inc[v]) {
        if (component[w] == static_cast<std::size_t>(-1)) {
          component[w] = count;
          stack.push_back(w);
        }
      }
    }
    ++count;
  }
  return count;
}

/// Minimum cycle basis as ordered vertex cycles. The basis size equals the
/// cyclomatic number |E| - |V| + components.
inline std::vector<std::vector<std::size_t>> minimum_cycle_basis(
    std::size_t n, const std::vector<GraphEdge>& edges) {
  std::vector<std::size_t> component;
  const std::size_t n_components = label_components(n, edges, component);
  const auto target = edges.size() + n_components - n;
  if (target == 0) return {};

  const auto ring_edge = find_ring_edges(n, edges);
  std::vector<std::vector<detail::Incidence>> inc(n);
  for (std::size_t e = 0; e < edges.size(); ++e) {
    if (!ring_edge[e]) continue;
    inc[edges[e].a].push_back({edges[e].b, e});
    inc[edges[e].b].push_back({edges[e].a, e});
  }

  struct Candidate {
    std::vector<std::size_t> cycle;
    detail::EdgeSet edges;
  };
  std::vector<Candidate> candidates;
  constexpr auto kNone = static_cast<std::size_t>(-1);

  for (std::size_t root = 0; root < n; ++root) {
    if (inc[root].empty()) continue;
    std::vector<std::size_t> parent(n, kNone);
    std::vector<std::size_t> parent_edge(n, kNone);
    std::vector<int> dist(n, -1);
    std::queue<std::size_t> queue;
    dist[root] = 0;
    queue.push(root);
    while (!queue.empty()) {
      const auto v = queue.front();
      queue.pop();
      for (const auto& [w, e] : inc[v]) {
        if (dist[w] == -1) {
          dist[w] = dist[v] + 1;
          parent[w] = v;
          parent_edge[w] = e;
          queue.push(w);
        }
      }
    }
    auto path_to_root = [&](std::size_t v) {
      std::vector<std::size_t> path{v};
      while (v != root) {
        v = parent[v];
        path.push_back(v);
      }
      return path;
    };
    for (std::size_t e = 0; e < edges.size(); ++e) {
      if (!ring_edge[e]) continue;
      const auto x = edges[e].a;
      const auto y = edges[e].b;
      if (dist[x] < 0 || dist[y] < 0) continue;
      if (parent_edge[x] == e || parent_edge[y] == e) continue;
      auto px = path_to_root(x);
      auto py = path_to_root(y);
      // Paths must only share the root.
      std::vector<std::size_t> sx(px.begin(), px.end() - 1);
      std::vector<std::size_t> sy(py.begin(), py.end() - 1);
      std::sort(sx.begin(), sx.end());
      std::sort(sy.begin(), sy.end());
      std::vector<std::size_t> common;
      std::set_intersection(sx.begin(), sx.end(), sy.begin(), sy.end(),
                            std::back_inserter(common));
      if (!common.empty()) continue;

      Candidate c{{}, detail::EdgeSet(edges.size())};
      // root ... x, then y ... (root excluded)
      c.cycle.assign(px.rbegin(), px.rend());
      for (std::size_t i = 0; i + 1 < py.size(); ++i) c.cycle.push_back(py[i]);
      for (std::size_t i = 0; i + 1 < px.size(); ++i) c.edges.flip(parent_edge[px[i]]);
      for (std::size_t i = 0; i + 1 < py.size(); ++i) c.edges.flip(parent_edge[py[i]]);
      c.edges.flip(e);
      candidates.push_back(std::move(c));
    }
  }

  std::stable_sort(candidates.begin(), candidates.end(), [](const Candidate& l, const Candidate& r) {
    return l.cycle.size() < r.cycle.size();
  });

  std::vector<std::vector<std::size_t>> basis;
  std::vector<std::pair<std::size_t, detail::EdgeSet>> reduced;  // pivot, row
  std::set<detail::EdgeSet> seen;
  for (auto& c : candidates) {
    if (basis.size() == target) break;
    if (!seen.insert(c.edges).second) continue;
    auto row = c.edges;
    bool changed = true;
    while (changed && !row.empty()) {
      changed = false;
      const auto pivot = row.lowest();
      for (const auto& [p, r] : reduced) {
        if (p == pivot) {
          row.xor_with(r);
          changed = true;
          break;
        }
      }
    }
    if (row.empty()) continue;
    reduced.emplace_back(row.lowest(), row);
    basis.push_back(std::move(c.cycle));
  }
  return basis;
}

}  // namespace attrilens::chem
