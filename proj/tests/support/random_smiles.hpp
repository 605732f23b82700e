#pragma once

#include <algorithm>
#include <map>
#include <random>
#include <string>
#include <vector>

#include "attrilens/chem/elements.hpp"
#include "attrilens/chem/molecule.hpp"

namespace attrilens::testing {

/// Writes a random valid SMILES for the same graph: random start atom per
/// component, random neighbour order, every atom bracketed with its total
/// hydrogen count so no valence defaults are involved.
class RandomSmilesWriter {
 public:
  RandomSmilesWriter(const chem::Molecule& mol, std::mt19937_64& rng) : mol_(mol), rng_(rng) {}

  std::string write() {
    const auto n = mol_.atom_count();
    visited_.assign(n, false);
    tree_parent_bond_.assign(n, kNone);
    order_.clear();
    closures_.clear();

    std::vector<std::size_t> starts(n);
    for (std::size_t i = 0; i < n; ++i) starts[i] = i;
    std::shuffle(starts.begin(), starts.end(), rng_);

    std::vector<std::size_t> roots;
    for (auto s : starts) {
      if (visited_[s]) continue;
      roots.push_back(s);
      plan(s);
    }

    std::string out;
    labels_.clear();
    free_labels_.clear();
    next_label_ = 1;
    for (std::size_t r = 0; r < roots.size(); ++r) {
      if (r) out += '.';
      emit(roots[r], out);
    }
    return out;
  }

 private:
  static constexpr std::size_t kNone = static_cast<std::size_t>(-1);

  void plan(std::size_t root) {
    std::vector<std::pair<std::size_t, std::size_t>> stack{{root, kNone}};
    while (!stack.empty()) {
      const auto [v, via] = stack.back();
      stack.pop_back();
      if (visited_[v]) {
        if (via != kNone && !is_closure(via)) closures_.push_back(via);
        continue;
      }
      visited_[v] = true;
      tree_parent_bond_[v] = via;
      order_.push_back(v);
      std::vector<chem::Neighbor> nbs(mol_.neighbors(v).begin(), mol_.neighbors(v).end());
      std::shuffle(nbs.begin(), nbs.end(), rng_);
      for (const auto& nb : nbs) {
        if (nb.bond == via) continue;
        stack.emplace_back(nb.atom, nb.bond);
      }
    }
    // A bond pushed twice can land in both roles; tree edges win.
    std::erase_if(closures_, [&](std::size_t b) {
      const auto& bond = mol_.bond(b);
      return tree_parent_bond_[bond.a] == b || tree_parent_bond_[bond.b] == b;
    });
  }

  bool is_closure(std::size_t b) const { return std::find(closures_.begin(), closures_.end(), b) != closures_.end(); }

  std::string atom_token(std::size_t i) const {
    const auto& a = mol_.atom(i);
    std::string s = "[";
    if (a.isotope) s += std::to_string(*a.isotope);
    std::string sym(chem::element_symbol(a.element));
    if (a.aromatic) sym[0] = static_cast<char>(std::tolower(static_cast<unsigned char>(sym[0])));
    s += sym;
    if (a.total_h() > 0) {
      s += 'H';
      if (a.total_h() > 1) s += std::to_string(a.total_h());
    }
    if (a.formal_charge > 0) s += '+' + std::to_string(a.formal_charge);
    if (a.formal_charge < 0) s += '-' + std::to_string(-a.formal_charge);
    s += ']';
    return s;
  }

  std::string bond_token(std::size_t b) const {
    switch (mol_.bond(b).order) {
      case chem::BondOrder::Single: return "-";
      case chem::BondOrder::Double: return "=";
      case chem::BondOrder::Triple: return "#";
      case chem::BondOrder::Aromatic: return ":";
    }
    return "";
  }

  std::string label_text(int label) const {
    return label < 10 ? std::to_string(label) : "%" + std::to_string(label);
  }

  void emit(std::size_t v, std::string& out) {
    // Each DFS frame emits one atom, its ring-closure digits and then its
    // tree children, the last one outside parentheses.
    out += atom_token(v);
    std::vector<std::size_t> here;
    for (auto b : closures_) {
      const auto& bond = mol_.bond(b);
      if (bond.a == v || bond.b == v) here.push_back(b);
    }
    for (auto b : here) {
      if (const auto it = labels_.find(b); it != labels_.end()) {
        out += bond_token(b) + label_text(it->second);
        free_labels_.push_back(it->second);
        labels_.erase(it);
      } else {
        int label;
        if (!free_labels_.empty()) {
          label = free_labels_.back();
          free_labels_.pop_back();
        } else {
          label = next_label_++;
        }
        labels_[b] = label;
        out += label_text(label);
      }
    }
    std::vector<std::pair<std::size_t, std::size_t>> children;
    for (const auto& nb : mol_.neighbors(v)) {
      if (tree_parent_bond_[nb.atom] == nb.bond && nb.bond != tree_parent_bond_[v]) children.emplace_back(nb.atom, nb.bond);
    }
    std::sort(children.begin(), children.end(), [&](const auto& x, const auto& y) { return rank(x.first) < rank(y.first); });
    for (std::size_t c = 0; c < children.size(); ++c) {
      const bool last = c + 1 == children.size();
      if (!last) out += '(';
      out += bond_token(children[c].second);
      emit(children[c].first, out);
      if (!last) out += ')';
    }
  }

  std::size_t rank(std::size_t atom) const {
    return static_cast<std::size_t>(std::find(order_.begin(), order_.end(), atom) - order_.begin());
  }

  const chem::Molecule& mol_;
  std::mt19937_64& rng_;
  std::vector<bool> visited_;
  std::vector<std::size_t> tree_parent_bond_;
  std::vector<std::size_t> order_;
  std::vector<std::size_t> closures_;
  std::map<std::size_t, int> labels_;
  std::vector<int> free_labels_;
  int next_label_ = 1;
};

inline std::string random_smiles(const chem::Molecule& mol, std::mt19937_64& rng) {
  return RandomSmilesWriter(mol, rng).write();
}

}  // namespace attrilens::testing
