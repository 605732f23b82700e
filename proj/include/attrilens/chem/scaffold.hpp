#pragma once

#include <algorithm>
#include <cstdlib>
#include <map>
#include <string>
#include <tuple>
#include <vector>

#include "attrilens/chem/molecule.hpp"

namespace attrilens::chem {

inline constexpr std::string_view kEmptyScaffoldKey = "<empty>";

/// Bemis-Murcko framework: ring systems plus the acyclic linkers joining
/// them. Non-ring atoms of degree <= 1 are stripped until none remain.
inline Molecule murcko_scaffold(const Molecule& mol) {
  const auto n = mol.atom_count();
  std::vector<bool> keep(n, true);
  std::vector<std::size_t> degree(n);
  std::vector<std::size_t> queue;
  for (std::size_t i = 0; i < n; ++i) {
    degree[i] = mol.degree(i);
    if (!mol.atom_in_ring(i) && degree[i] <= 1) queue.push_back(i);
  }
  while (!queue.empty()) {
    const auto v = queue.back();
    queue.pop_back();
    if (!keep[v]) continue;
    keep[v] = false;
    for (const auto& nb : mol.neighbors(v)) {
      if (!keep[nb.atom]) continue;
      if (--degree[nb.atom] <= 1 && !mol.atom_in_ring(nb.atom)) queue.push_back(nb.atom);
    }
  }
  return mol.subgraph(keep);
}

namespace detail {

class CanonicalKeyBuilder {
 public:
  explicit CanonicalKeyBuilder(const Molecule& mol) : mol_(mol) {}

  std::string build() {
    std::vector<long> classes(mol_.atom_count());
    std::vector<std::tuple<int, bool, int, int, std::size_t, bool>> inv(mol_.atom_count());
    for (std::size_t i = 0; i < mol_.atom_count(); ++i) {
      const auto& a = mol_.atom(i);
      inv[i] = {a.element, a.aromatic, a.formal_charge, a.total_h(), mol_.degree(i), mol_.atom_in_ring(i)};
    }
    auto sorted = inv;
    std::sort(sorted.begin(), sorted.end());
    sorted.erase(std::unique(sorted.begin(), sorted.end()), sorted.end());
    for (std::size_t i = 0; i < inv.size(); ++i) {
      classes[i] = std::lower_bound(sorted.begin(), sorted.end(), inv[i]) - sorted.begin();
    }
    std::string best;
    search(refine(classes), best);
    return best;
  }

 private:
  // Iterated neighbourhood refinement until the partition is stable.
  std::vector<long> refine(std::vector<long> classes) const {
    const auto n = mol_.atom_count();
    std::size_t distinct = count_distinct(classes);
    while (true) {
      std::vector<std::pair<long, std::vector<std::pair<int, long>>>> sig(n);
      for (std::size_t i = 0; i < n; ++i) {
        sig[i].first = classes[i];
        for (const auto& nb : mol_.neighbors(i)) {
          sig[i].second.emplace_back(static_cast<int>(mol_.bond(nb.bond).order), classes[nb.atom]);
        }
        std::sort(sig[i].second.begin(), sig[i].second.end());
      }
      auto uniq = sig;
      std::sort(uniq.begin(), uniq.end());
      uniq.erase(std::unique(uniq.begin(), uniq.end()), uniq.end());
      for (std::size_t i = 0; i < n; ++i) {
        classes[i] = std::lower_bound(uniq.begin(), uniq.end(), sig[i]) - uniq.begin();
      }
      const auto now = uniq.size();
      if (now == distinct) return classes;
      distinct = now;
    }
  }

  static std::size_t count_distinct(std::vector<long> v) {
    std::sort(v.begin(), v.end());
    return static_cast<std::size_t>(std::unique(v.begin(), v.end()) - v.begin());
  }

  void search(const std::vector<long>& classes, std::string& best) {
    const auto n = classes.size();
    if (count_distinct(classes) == n) {
      ++leaves_;
      auto s = emit(classes);
      if (best.empty() || s < best) best = std::move(s);
      return;
    }
    // Smallest class value that is shared by several atoms.
    std::map<long, std::vector<std::size_t>> cells;
    for (std::size_t i = 0; i < n; ++i) cells[classes[i]].push_back(i);
    const std::vector<std::size_t>* cell = nullptr;
    for (const auto& [c, members] : cells) {
      if (members.size() > 1) {
        cell = &members;
        break;
      }
    }
    for (const auto chosen : *cell) {
      std::vector<long> split(n);
      for (std::size_t i = 0; i < n; ++i) {
        split[i] = classes[i] * 2 + ((classes[i] == classes[chosen] && i != chosen) ? 1 : 0);
      }
      search(refine(split), best);
      if (leaves_ >= kLeafBudget) return;
    }
  }

  std::string atom_token(std::size_t i) const {
    const auto& a = mol_.atom(i);
    std::string sym(element_symbol(a.element));
    if (a.aromatic) {
      for (auto& ch : sym) ch = static_cast<char>(std::tolower(static_cast<unsigned char>(ch)));
    }
    std::string out = "[" + sym;
    if (a.total_h() > 0) out += "H" + (a.total_h() > 1 ? std::to_string(a.total_h()) : "");
    if (a.formal_charge != 0) {
      out += a.formal_charge > 0 ? "+" : "-";
      if (std::abs(a.formal_charge) > 1) out += std::to_string(std::abs(a.formal_charge));
    }
    return out + "]";
  }

  static std::string bond_token(BondOrder order) {
    switch (order) {
      case BondOrder::Double: return "=";
      case BondOrder::Triple: return "#";
      case BondOrder::Aromatic: return ":";
      default: return "";
    }
  }

  static std::string ring_label(int label) {
    return label < 10 ? std::to_string(label) : "%" + std::to_string(label);
  }

  // DFS string with neighbours visited in class order; one string per
  // component, components sorted and joined with '.'.
  std::string emit(const std::vector<long>& rank) const {
    const auto n = mol_.atom_count();
    std::vector<std::vector<Neighbor>> ordered(n);
    for (std::size_t i = 0; i < n; ++i) {
      ordered[i].assign(mol_.neighbors(i).begin(), mol_.neighbors(i).end());
      std::sort(ordered[i].begin(), ordered[i].end(),
                [&](const Neighbor& l, const Neighbor& r) { return rank[l.atom] < rank[r.atom]; });
    }
    std::vector<std::size_t> by_rank(n);
    for (std::size_t i = 0; i < n; ++i) by_rank[static_cast<std::size_t>(rank[i])] = i;

    // Pass 1: DFS order, tree edges and ring-closure edges.
    std::vector<int> order(n, -1);
    std::vector<bool> tree_edge(mol_.bond_count(), false);
    int counter = 0;
    std::vector<std::size_t> roots;
    for (auto start : by_rank) {
      if (order[start] != -1) continue;
      roots.push_back(start);
      visit(start, ordered, order, tree_edge, counter);
    }

    // Pass 2: write.
    std::vector<std::string> parts;
    std::map<std::size_t, int> open_label;  // bond -> label
    std::vector<bool> used_label(100, false);
    std::vector<bool> written(n, false);
    for (auto root : roots) {
      std::string out;
      write(root, static_cast<std::size_t>(-1), ordered, order, tree_edge, open_label, used_label, written, out);
      parts.push_back(std::move(out));
    }
    std::sort(parts.begin(), parts.end());
    std::string key;
    for (std::size_t i = 0; i < parts.size(); ++i) {
      if (i) key += '.';
      key += parts[i];
    }
    return key;
  }

  void visit(std::size_t v, const std::vector<std::vector<Neighbor>>& ordered, std::vector<int>& order,
             std::vector<bool>& tree_edge, int& counter) const {
    order[v] = counter++;
    for (const auto& nb : ordered[v]) {
      if (order[nb.atom] != -1) continue;
      tree_edge[nb.bond] = true;
      visit(nb.atom, ordered, order, tree_edge, counter);
    }
  }

  void write(std::size_t v, std::size_t parent_bond, const std::vector<std::vector<Neighbor>>& ordered,
             const std::vector<int>& order, const std::vector<bool>& tree_edge,
             std::map<std::size_t, int>& open_label, std::vector<bool>& used_label,
             std::vector<bool>& written, std::string& out) const {
    written[v] = true;
    out += atom_token(v);
    for (const auto& nb : ordered[v]) {
      if (nb.bond == parent_bond || tree_edge[nb.bond]) continue;
      if (auto it = open_label.find(nb.bond); it != open_label.end()) {
        out += bond_token(mol_.bond(nb.bond).order) + ring_label(it->second);
        used_label[static_cast<std::size_t>(it->second)] = false;
        open_label.erase(it);
      } else {
        int label = 1;
        while (used_label[static_cast<std::size_t>(label)]) ++label;
        used_label[static_cast<std::size_t>(label)] = true;
        open_label[nb.bond] = label;
        out += bond_token(mol_.bond(nb.bond).order) + ring_label(label);
      }
    }
    std::vector<Neighbor> children;
    for (const auto& nb : ordered[v]) {
      if (tree_edge[nb.bond] && nb.bond != parent_bond && order[nb.atom] > order[v]) children.push_back(nb);
    }
    for (std::size_t c = 0; c < children.size(); ++c) {
      const bool branch = c + 1 < children.size();
      if (branch) out += '(';
      out += bond_token(mol_.bond(children[c].bond).order);
      write(children[c].atom, children[c].bond, ordered, order, tree_edge, open_label, used_label, written, out);
      if (branch) out += ')';
    }
  }

  static constexpr std::size_t kLeafBudget = 20000;
  const Molecule& mol_;
  std::size_t leaves_ = 0;
};

}  // namespace detail

/// Canonical text for a molecular graph: equal graphs give equal strings
/// regardless of input atom order. The result is itself valid SMILES.
inline std::string canonical_key(const Molecule& mol) {
  if (mol.empty()) return std::string(kEmptyScaffoldKey);
  return detail::CanonicalKeyBuilder(mol).build();
}

/// Canonical key of the Murcko scaffold; acyclic molecules share one sentinel.
inline std::string scaffold_key(const Molecule& mol) { return canonical_key(murcko_scaffold(mol)); }

}  // namespace attrilens::chem
