#pragma once

// Tree-shaped SMARTS patterns, enough for atom-typing tables: bracket atom
// expressions with ! & , ; operators, the primitives #n, element symbols,
// A, a, H<n>, X<n>, D<n>, charge, and the bonds - = # : ~. Ring closures and
// recursive SMARTS are rejected.

#include <cctype>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "attrilens/chem/elements.hpp"
#include "attrilens/chem/molecule.hpp"

namespace attrilens::chem {

class SmartsError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Molecule with every hydrogen as its own node, the view SMARTS H and X
/// primitives are evaluated against.
class ExpandedGraph {
 public:
  struct Node {
    int element;
    bool aromatic;
    int charge;
    std::size_t source;  // atom index in the molecule, or the parent for added H
    bool added_h;
  };
  struct Edge {
    std::size_t to;
    BondOrder order;
  };

  explicit ExpandedGraph(const Molecule& mol) {
    for (const auto& a : mol.atoms()) nodes_.push_back({a.element, a.aromatic, a.formal_charge, a.index, false});
    adj_.resize(nodes_.size());
    for (const auto& b : mol.bonds()) {
      adj_[b.a].push_back({b.b, b.order});
      adj_[b.b].push_back({b.a, b.order});
    }
    for (const auto& a : mol.atoms()) {
      for (int k = 0; k < a.total_h(); ++k) {
        const auto h = nodes_.size();
        nodes_.push_back({1, false, 0, a.index, true});
        adj_.push_back({{a.index, BondOrder::Single}});
        adj_[a.index].push_back({h, BondOrder::Single});
      }
    }
  }

  std::size_t size() const { return nodes_.size(); }
  const Node& node(std::size_t i) const { return nodes_[i]; }
  const std::vector<Edge>& edges(std::size_t i) const { return adj_[i]; }

  int h_count(std::size_t i) const {
    int h = 0;
    for (const auto& e : adj_[i]) h += nodes_[e.to].element == 1;
    return h;
  }
  int heavy_degree(std::size_t i) const {
    int d = 0;
    for (const auto& e : adj_[i]) d += nodes_[e.to].element != 1;
    return d;
  }

 private:
  std::vector<Node> nodes_;
  std::vector<std::vector<Edge>> adj_;
};

namespace detail {

struct AtomExpr {
  enum class Kind { And, Or, Not, Element, AtomicNumber, Aliphatic, Aromatic, HCount, Connectivity, Degree, Charge, Any };
  Kind kind = Kind::Any;
  int value = 0;
  bool aromatic = false;  // for Element
  std::vector<AtomExpr> children;

  bool matches(const ExpandedGraph& g, std::size_t i) const {
    const auto& n = g.node(i);
    switch (kind) {
      case Kind::And:
        for (const auto& c : children) {
          if (!c.matches(g, i)) return false;
        }
        return true;
      case Kind::Or:
        for (const auto& c : children) {
          if (c.matches(g, i)) return true;
        }
        return false;
      case Kind::Not: return !children.front().matches(g, i);
      case Kind::Element: return n.element == value && n.aromatic == aromatic;
      case Kind::AtomicNumber: return n.element == value;
      case Kind::Aliphatic: return !n.aromatic;
      case Kind::Aromatic: return n.aromatic;
      case Kind::HCount: return g.h_count(i) == value;
      case Kind::Connectivity: return static_cast<int>(g.edges(i).size()) == value;
      case Kind::Degree: return static_cast<int>(g.edges(i).size()) == value;
      case Kind::Charge: return n.charge == value;
      case Kind::Any: return true;
    }
    return false;
  }
};

enum class BondQuery { Default, Single, Double, Triple, Aromatic, Any };

inline bool bond_matches(BondQuery q, BondOrder order) {
  switch (q) {
    case BondQuery::Default: return order == BondOrder::Single || order == BondOrder::Aromatic;
    case BondQuery::Single: return order == BondOrder::Single;
    case BondQuery::Double: return order == BondOrder::Double;
    case BondQuery::Triple: return order == BondOrder::Triple;
    case BondQuery::Aromatic: return order == BondOrder::Aromatic;
    case BondQuery::Any: return true;
  }
  return false;
}

class SmartsReader {
 public:
  explicit SmartsReader(std::string_view text) : s_(text) {}

  struct Parsed {
    std::vector<AtomExpr> atoms;
    std::vector<std::size_t> parent;  // SIZE_MAX for the root
    std::vector<BondQuery> bond_to_parent;
  };

  Parsed read() {
    Parsed out;
    std::vector<std::size_t> stack;
    std::optional<std::size_t> prev;
    BondQuery pending = BondQuery::Default;
    bool has_pending = false;
    while (pos_ < s_.size()) {
      const char c = s_[pos_];
      if (c == '(') {
        if (!prev) error("branch without atom");
        stack.push_back(*prev);
        ++pos_;
      } else if (c == ')') {
        if (stack.empty()) error("unbalanced ')'");
        prev = stack.back();
        stack.pop_back();
        ++pos_;
      } else if (c == '-' || c == '=' || c == '#' || c == ':' || c == '~') {
        pending = c == '-' ? BondQuery::Single
                : c == '=' ? BondQuery::Double
                : c == '#' ? BondQuery::Triple
                : c == ':' ? BondQuery::Aromatic
                           : BondQuery::Any;
        has_pending = true;
        ++pos_;
      } else if (std::isdigit(static_cast<unsigned char>(c)) || c == '%' || c == '.') {
        error("ring closures and disconnected patterns are not supported");
      } else {
        AtomExpr atom = c == '[' ? bracket() : bare();
        out.atoms.push_back(std::move(atom));
        out.parent.push_back(prev ? *prev : static_cast<std::size_t>(-1));
        out.bond_to_parent.push_back(has_pending ? pending : BondQuery::Default);
        has_pending = false;
        prev = out.atoms.size() - 1;
      }
    }
    if (!stack.empty()) error("unbalanced '('");
    if (out.atoms.empty()) error("empty pattern");
    return out;
  }

 private:
  [[noreturn]] void error(const std::string& what) const {
    throw SmartsError("SMARTS '" + std::string(s_) + "' at " + std::to_string(pos_) + ": " + what);
  }

  static AtomExpr prim(AtomExpr::Kind k, int v = 0) {
    AtomExpr e;
    e.kind = k;
    e.value = v;
    return e;
  }

  static AtomExpr element(int z, bool aromatic) {
    AtomExpr e = prim(AtomExpr::Kind::Element, z);
    e.aromatic = aromatic;
    return e;
  }

  AtomExpr bare() {
    const char c = s_[pos_];
    if (c == '*') {
      ++pos_;
      return prim(AtomExpr::Kind::Any);
    }
    if (c == 'A' || c == 'a') {
      ++pos_;
      return prim(c == 'A' ? AtomExpr::Kind::Aliphatic : AtomExpr::Kind::Aromatic);
    }
    if (s_.substr(pos_, 2) == "Cl" || s_.substr(pos_, 2) == "Br") {
      const auto z = *element_by_symbol(s_.substr(pos_, 2));
      pos_ += 2;
      return element(z, false);
    }
    static constexpr std::string_view kAliphatic = "BCNOPSFI";
    static constexpr std::string_view kAromatic = "bcnops";
    if (kAliphatic.find(c) != std::string_view::npos) {
      ++pos_;
      return element(*element_by_symbol(std::string(1, c)), false);
    }
    if (kAromatic.find(c) != std::string_view::npos) {
      ++pos_;
      return element(*element_by_symbol(std::string(1, static_cast<char>(std::toupper(c)))), true);
    }
    error(std::string("unexpected character '") + c + "'");
  }

  AtomExpr bracket() {
    ++pos_;  // '['
    auto e = low_and();
    if (pos_ >= s_.size() || s_[pos_] != ']') error("expected ']'");
    ++pos_;
    return e;
  }

  static AtomExpr combine(AtomExpr::Kind kind, std::vector<AtomExpr> parts) {
    if (parts.size() == 1) return std::move(parts.front());
    AtomExpr e;
    e.kind = kind;
    e.children = std::move(parts);
    return e;
  }

  AtomExpr low_and() {
    std::vector<AtomExpr> parts{or_expr()};
    while (pos_ < s_.size() && s_[pos_] == ';') {
      ++pos_;
      parts.push_back(or_expr());
    }
    return combine(AtomExpr::Kind::And, std::move(parts));
  }

  AtomExpr or_expr() {
    std::vector<AtomExpr> parts{high_and()};
    while (pos_ < s_.size() && s_[pos_] == ',') {
      ++pos_;
      parts.push_back(high_and());
    }
    return combine(AtomExpr::Kind::Or, std::move(parts));
  }

  AtomExpr high_and() {
    std::vector<AtomExpr> parts;
    while (pos_ < s_.size()) {
      const char c = s_[pos_];
      if (c == ']' || c == ',' || c == ';') break;
      if (c == '&') {
        ++pos_;
        continue;
      }
      parts.push_back(negation());
    }
    if (parts.empty()) error("empty atom expression");
    return combine(AtomExpr::Kind::And, std::move(parts));
  }

  AtomExpr negation() {
    if (s_[pos_] == '!') {
      ++pos_;
      AtomExpr e;
      e.kind = AtomExpr::Kind::Not;
      e.children.push_back(negation());
      return e;
    }
    return primitive();
  }

  std::optional<int> number() {
    if (pos_ >= s_.size() || !std::isdigit(static_cast<unsigned char>(s_[pos_]))) return std::nullopt;
    int v = 0;
    while (pos_ < s_.size() && std::isdigit(static_cast<unsigned char>(s_[pos_]))) v = v * 10 + (s_[pos_++] - '0');
    return v;
  }

  AtomExpr primitive() {
    const char c = s_[pos_];
    switch (c) {
      case '#': {
        ++pos_;
        const auto z = number();
        if (!z) error("'#' needs an atomic number");
        return prim(AtomExpr::Kind::AtomicNumber, *z);
      }
      case 'H': ++pos_; return prim(AtomExpr::Kind::HCount, number().value_or(1));
      case 'X': ++pos_; return prim(AtomExpr::Kind::Connectivity, number().value_or(1));
      case 'D': ++pos_; return prim(AtomExpr::Kind::Degree, number().value_or(1));
      case '*': ++pos_; return prim(AtomExpr::Kind::Any);
      case 'A': ++pos_; return prim(AtomExpr::Kind::Aliphatic);
      case 'a': ++pos_; return prim(AtomExpr::Kind::Aromatic);
      case '+':
      case '-': {
        ++pos_;
        int magnitude = 1;
        if (auto n = number()) {
          magnitude = *n;
        } else {
          while (pos_ < s_.size() && s_[pos_] == c) {
            ++magnitude;
            ++pos_;
          }
        }
        return prim(AtomExpr::Kind::Charge, c == '+' ? magnitude : -magnitude);
      }
      default: break;
    }
    if (std::isupper(static_cast<unsigned char>(c))) {
      if (pos_ + 1 < s_.size() && std::islower(static_cast<unsigned char>(s_[pos_ + 1]))) {
        if (auto z = element_by_symbol(s_.substr(pos_, 2))) {
          pos_ += 2;
          return element(*z, false);
        }
      }
      if (auto z = element_by_symbol(s_.substr(pos_, 1))) {
        ++pos_;
        return element(*z, false);
      }
    }
    if (std::islower(static_cast<unsigned char>(c))) {
      if (s_.substr(pos_, 2) == "se" || s_.substr(pos_, 2) == "as") {
        const auto z = s_[pos_] == 's' ? 34 : 33;
        pos_ += 2;
        return element(z, true);
      }
      static constexpr std::string_view kAromatic = "bcnops";
      if (kAromatic.find(c) != std::string_view::npos) {
        ++pos_;
        return element(*element_by_symbol(std::string(1, static_cast<char>(std::toupper(c)))), true);
      }
    }
    error(std::string("unsupported primitive '") + c + "'");
  }

  std::string_view s_;
  std::size_t pos_ = 0;
};

}  // namespace detail

/// A compiled tree pattern. Matching asks whether some injective embedding
/// maps the first pattern atom onto a given graph node.
class SmartsPattern {
 public:
  explicit SmartsPattern(std::string_view text) : text_(text) {
    auto parsed = detail::SmartsReader(text).read();
    atoms_ = std::move(parsed.atoms);
    bond_to_parent_ = std::move(parsed.bond_to_parent);
    children_.resize(atoms_.size());
    for (std::size_t i = 1; i < atoms_.size(); ++i) children_[parsed.parent[i]].push_back(i);
  }

  const std::string& text() const { return text_; }

  bool matches_at(const ExpandedGraph& g, std::size_t node) const {
    std::vector<std::size_t> assigned(atoms_.size(), static_cast<std::size_t>(-1));
    std::vector<bool> used(g.size(), false);
    if (!atoms_[0].matches(g, node)) return false;
    assigned[0] = node;
    used[node] = true;
    return extend(g, order(), 1, assigned, used);
  }

 private:
  // Pattern atoms in parent-before-child order.
  std::vector<std::size_t> order() const {
    std::vector<std::size_t> out{0};
    for (std::size_t k = 0; k < out.size(); ++k) {
      for (auto c : children_[out[k]]) out.push_back(c);
    }
    return out;
  }

  std::size_t parent_of(std::size_t p) const {
    for (std::size_t i = 0; i < children_.size(); ++i) {
      for (auto c : children_[i]) {
        if (c == p) return i;
      }
    }
    return static_cast<std::size_t>(-1);
  }

  bool extend(const ExpandedGraph& g, const std::vector<std::size_t>& seq, std::size_t k,
              std::vector<std::size_t>& assigned, std::vector<bool>& used) const {
    if (k == seq.size()) return true;
    const auto p = seq[k];
    const auto anchor = assigned[parent_of(p)];
    for (const auto& e : g.edges(anchor)) {
      if (used[e.to] || !detail::bond_matches(bond_to_parent_[p], e.order)) continue;
      if (!atoms_[p].matches(g, e.to)) continue;
      assigned[p] = e.to;
      used[e.to] = true;
      if (extend(g, seq, k + 1, assigned, used)) return true;
      used[e.to] = false;
      assigned[p] = static_cast<std::size_t>(-1);
    }
    return false;
  }

  std::string text_;
  std::vector<detail::AtomExpr> atoms_;
  std::vector<detail::BondQuery> bond_to_parent_;
  std::vector<std::vector<std::size_t>> children_;
};

}  // namespace attrilens::chem
