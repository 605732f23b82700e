#pragma once

#include <cctype>
#include <map>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "attrilens/chem/elements.hpp"
#include "attrilens/chem/molecule.hpp"

namespace attrilens::chem {

enum class SmilesErrorKind { Syntax, UnbalancedRing, UnbalancedBranch, UnknownElement, ValenceError };

inline std::string_view to_string(SmilesErrorKind kind) {
  switch (kind) {
    case SmilesErrorKind::Syntax: return "Syntax";
    case SmilesErrorKind::UnbalancedRing: return "UnbalancedRing";
    case SmilesErrorKind::UnbalancedBranch: return "UnbalancedBranch";
    case SmilesErrorKind::UnknownElement: return "UnknownElement";
    case SmilesErrorKind::ValenceError: return "ValenceError";
  }
  return "Unknown";
}

class SmilesError : public std::runtime_error {
 public:
  SmilesError(SmilesErrorKind kind, std::size_t position, const std::string& detail)
      : std::runtime_error(std::string(to_string(kind)) + " at position " +
                           std::to_string(position) + ": " + detail),
        kind_(kind),
        position_(position) {}

  SmilesErrorKind kind() const { return kind_; }
  std::size_t position() const { return position_; }

 private:
  SmilesErrorKind kind_;
  std::size_t position_;
};

/// Valences allowed for an atom after shifting by its formal charge to the
/// isoelectronic neighbour (N+ behaves like C, O- like F). Empty when the
/// element is outside the organic subset, which disables valence checks.
inline std::span<const int> charged_valences(int z, int charge) {
  if (charge == 0) return organic_valences(z);
  const int shifted = z - charge;
  const bool same_period = (z <= 10 && shifted >= 5 && shifted <= 10) ||
                           (z > 10 && z <= 18 && shifted >= 13 && shifted <= 18);
  if (!same_period) return {};
  return organic_valences(shifted);
}

class SmilesParser {
 public:
  explicit SmilesParser(std::string_view text) : text_(text) {}

  Molecule parse() {
    const auto begin = text_.find_first_not_of(" \t\r\n");
    if (begin == std::string_view::npos) fail(SmilesErrorKind::Syntax, 0, "empty SMILES");
    pos_ = begin;
    run();
    std::string source(text_.substr(begin, end_ - begin));
    assign_implicit_hydrogens();
    check_valences();
    fold_hydrogens();
    auto mol = Molecule::assemble(std::move(atoms_), std::move(bonds_), std::move(source));
    perceive_aromaticity(mol);
    return mol;
  }

 private:
  struct RingOpen {
    std::size_t atom;
    char bond;
    std::size_t position;
  };

  [[noreturn]] static void fail(SmilesErrorKind kind, std::size_t pos, const std::string& what) {
    throw SmilesError(kind, pos, what);
  }

  bool at_end() const { return pos_ >= text_.size() || std::isspace(static_cast<unsigned char>(text_[pos_])); }
  char peek() const { return at_end() ? '\0' : text_[pos_]; }

  void run() {
    std::vector<std::size_t> branch_stack;
    std::vector<std::size_t> branch_pos;
    std::optional<std::size_t> prev;
    char pending_bond = 0;
    std::size_t pending_pos = 0;
    bool expect_atom = true;  // start, after '(' or '.'

    while (!at_end()) {
      const char c = peek();
      const auto here = pos_;
      if (c == '(') {
        if (!prev || expect_atom) fail(SmilesErrorKind::Syntax, here, "branch without a preceding atom");
        branch_stack.push_back(*prev);
        branch_pos.push_back(here);
        ++pos_;
        expect_atom = true;
      } else if (c == ')') {
        if (branch_stack.empty()) fail(SmilesErrorKind::UnbalancedBranch, here, "unmatched ')'");
        if (expect_atom || pending_bond) fail(SmilesErrorKind::Syntax, here, "empty branch or dangling bond");
        prev = branch_stack.back();
        branch_stack.pop_back();
        branch_pos.pop_back();
        ++pos_;
      } else if (c == '.') {
        if (pending_bond || expect_atom) fail(SmilesErrorKind::Syntax, here, "misplaced '.'");
        prev.reset();
        ++pos_;
        expect_atom = true;
      } else if (c == '-' || c == '=' || c == '#' || c == '$' || c == ':' || c == '/' || c == '\\') {
        if (pending_bond || !prev) fail(SmilesErrorKind::Syntax, here, "misplaced bond symbol");
        pending_bond = c;
        pending_pos = here;
        ++pos_;
      } else if (std::isdigit(static_cast<unsigned char>(c)) || c == '%') {
        if (!prev || expect_atom) fail(SmilesErrorKind::Syntax, here, "ring closure without an atom");
        const int label = read_ring_label();
        close_or_open_ring(label, *prev, pending_bond, here);
        pending_bond = 0;
      } else {
        const auto atom = read_atom();
        if (prev) {
          add_bond(*prev, atom, pending_bond, pending_bond ? pending_pos : here);
        } else if (pending_bond) {
          fail(SmilesErrorKind::Syntax, pending_pos, "bond without a preceding atom");
        }
        pending_bond = 0;
        prev = atom;
        expect_atom = false;
      }
    }
    end_ = pos_;
    if (pending_bond) fail(SmilesErrorKind::Syntax, pending_pos, "dangling bond");
    if (!branch_stack.empty()) fail(SmilesErrorKind::UnbalancedBranch, branch_pos.back(), "unclosed '('");
    if (!open_rings_.empty()) {
      fail(SmilesErrorKind::UnbalancedRing, open_rings_.begin()->second.position,
           "unclosed ring " + std::to_string(open_rings_.begin()->first));
    }
    if (expect_atom) fail(SmilesErrorKind::Syntax, pos_, "SMILES ends without an atom");
  }

  int read_ring_label() {
    if (peek() == '%') {
      ++pos_;
      if (pos_ + 1 >= text_.size() || !std::isdigit(static_cast<unsigned char>(text_[pos_])) ||
          !std::isdigit(static_cast<unsigned char>(text_[pos_ + 1]))) {
        fail(SmilesErrorKind::Syntax, pos_ - 1, "'%' must be followed by two digits");
      }
      const int label = (text_[pos_] - '0') * 10 + (text_[pos_ + 1] - '0');
      pos_ += 2;
      return label;
    }
    return text_[pos_++] - '0';
  }

  void close_or_open_ring(int label, std::size_t atom, char bond, std::size_t here) {
    auto it = open_rings_.find(label);
    if (it == open_rings_.end()) {
      open_rings_[label] = {atom, bond, here};
      return;
    }
    const auto open = it->second;
    open_rings_.erase(it);
    if (open.bond && bond && bond_order_of(open.bond) != bond_order_of(bond)) {
      fail(SmilesErrorKind::Syntax, here, "conflicting ring-closure bond orders");
    }
    add_bond(open.atom, atom, bond ? bond : open.bond, here);
  }

  static BondOrder bond_order_of(char symbol) {
    switch (symbol) {
      case '=': return BondOrder::Double;
      case '#': return BondOrder::Triple;
      case ':': return BondOrder::Aromatic;
      case '$': return BondOrder::Triple;  // quadruple bonds are not modelled
      default: return BondOrder::Single;
    }
  }

  void add_bond(std::size_t a, std::size_t b, char symbol, std::size_t here) {
    if (a == b) fail(SmilesErrorKind::Syntax, here, "atom bonded to itself");
    for (const auto& bond : bonds_) {
      if ((bond.a == a && bond.b == b) || (bond.a == b && bond.b == a)) {
        fail(SmilesErrorKind::Syntax, here, "duplicate bond");
      }
    }
    if (symbol == '$') fail(SmilesErrorKind::Syntax, here, "quadruple bonds are not supported");
    Bond bond{a, b, BondOrder::Single, 0};
    const bool directional = symbol == '/' || symbol == '\\';
    if (directional) bond.stereo = symbol;
    if (symbol && !directional) {
      bond.order = bond_order_of(symbol);
    } else if (atoms_[a].aromatic && atoms_[b].aromatic) {
      bond.order = BondOrder::Aromatic;
    }
    bonds_.push_back(bond);
  }

  std::size_t read_atom() {
    const auto here = pos_;
    Atom atom;
    if (peek() == '[') {
      read_bracket_atom(atom);
    } else {
      read_organic_atom(atom);
    }
    atom.index = atoms_.size();
    atoms_.push_back(std::move(atom));
    atom_pos_.push_back(here);
    return atoms_.size() - 1;
  }

  void read_organic_atom(Atom& atom) {
    const auto here = pos_;
    const char c = text_[pos_];
    auto two = [&](char second) { return pos_ + 1 < text_.size() && text_[pos_ + 1] == second; };
    std::string_view symbol;
    if (c == 'C' && two('l')) {
      symbol = "Cl";
    } else if (c == 'B' && two('r')) {
      symbol = "Br";
    } else {
      switch (c) {
        case 'B': case 'C': case 'N': case 'O': case 'P': case 'S': case 'F': case 'I':
          symbol = text_.substr(pos_, 1);
          break;
        case 'b': case 'c': case 'n': case 'o': case 'p': case 's':
          atom.aromatic = true;
          symbol = text_.substr(pos_, 1);
          break;
        default:
          if (std::isalpha(static_cast<unsigned char>(c)) || c == '*') {
            fail(SmilesErrorKind::UnknownElement, here, std::string("unsupported atom '") + c + "'");
          }
          fail(SmilesErrorKind::Syntax, here, std::string("unexpected character '") + c + "'");
      }
    }
    pos_ += symbol.size();
    std::string upper(symbol);
    upper[0] = static_cast<char>(std::toupper(static_cast<unsigned char>(upper[0])));
    atom.element = *element_by_symbol(upper);
  }

  void read_bracket_atom(Atom& atom) {
    const auto open = pos_;
    ++pos_;  // '['
    atom.bracket = true;
    auto digit = [&] { return pos_ < text_.size() && std::isdigit(static_cast<unsigned char>(text_[pos_])); };
    auto read_int = [&] {
      int v = 0;
      while (digit()) v = v * 10 + (text_[pos_++] - '0');
      return v;
    };
    if (digit()) atom.isotope = read_int();

    if (pos_ >= text_.size()) fail(SmilesErrorKind::Syntax, open, "unterminated bracket atom");
    const auto sym_pos = pos_;
    const char c = text_[pos_];
    std::string symbol;
    if (std::islower(static_cast<unsigned char>(c))) {
      // aromatic symbols: b c n o p s se as te
      if (text_.substr(pos_, 2) == "se" || text_.substr(pos_, 2) == "as" || text_.substr(pos_, 2) == "te") {
        symbol = std::string(text_.substr(pos_, 2));
        pos_ += 2;
      } else if (c == 'b' || c == 'c' || c == 'n' || c == 'o' || c == 'p' || c == 's') {
        symbol = std::string(1, c);
        ++pos_;
      } else {
        fail(SmilesErrorKind::UnknownElement, sym_pos, "unsupported aromatic symbol");
      }
      atom.aromatic = true;
      symbol[0] = static_cast<char>(std::toupper(static_cast<unsigned char>(symbol[0])));
    } else if (std::isupper(static_cast<unsigned char>(c))) {
      symbol = std::string(1, c);
      ++pos_;
      if (pos_ < text_.size() && std::islower(static_cast<unsigned char>(text_[pos_]))) {
        std::string two = symbol + text_[pos_];
        if (element_by_symbol(two)) {
          symbol = two;
          ++pos_;
        }
      }
    } else {
      fail(c == '*' ? SmilesErrorKind::UnknownElement : SmilesErrorKind::Syntax, sym_pos,
           "expected element symbol in bracket atom");
    }
    const auto z = element_by_symbol(symbol);
    if (!z) fail(SmilesErrorKind::UnknownElement, sym_pos, "unknown element '" + symbol + "'");
    atom.element = *z;

    if (pos_ < text_.size() && text_[pos_] == '@') {
      const auto start = pos_;
      ++pos_;
      if (pos_ < text_.size() && text_[pos_] == '@') {
        ++pos_;
      } else if (pos_ + 1 < text_.size() && std::isupper(static_cast<unsigned char>(text_[pos_])) &&
                 std::isupper(static_cast<unsigned char>(text_[pos_ + 1]))) {
        pos_ += 2;  // @TH1, @AL2, @SP3, @TB10, @OH20
        read_int();
      }
      atom.chirality = std::string(text_.substr(start, pos_ - start));
    }
    if (pos_ < text_.size() && text_[pos_] == 'H') {
      ++pos_;
      atom.explicit_h = digit() ? read_int() : 1;
    }
    if (pos_ < text_.size() && (text_[pos_] == '+' || text_[pos_] == '-')) {
      const char sign = text_[pos_++];
      int magnitude = 1;
      if (digit()) {
        magnitude = read_int();
      } else {
        while (pos_ < text_.size() && text_[pos_] == sign) {
          ++magnitude;
          ++pos_;
        }
      }
      atom.formal_charge = sign == '+' ? magnitude : -magnitude;
    }
    if (pos_ < text_.size() && text_[pos_] == ':') {
      ++pos_;
      if (!digit()) fail(SmilesErrorKind::Syntax, pos_, "atom class needs digits");
      read_int();
    }
    if (pos_ >= text_.size() || text_[pos_] != ']') {
      fail(SmilesErrorKind::Syntax, pos_ < text_.size() ? pos_ : open, "unterminated bracket atom");
    }
    ++pos_;
  }

  int bond_sum(std::size_t atom) const {
    int sum = 0;
    for (const auto& b : bonds_) {
      if (b.a == atom || b.b == atom) sum += valence_contribution(b.order);
    }
    return sum;
  }

  void assign_implicit_hydrogens() {
    for (std::size_t i = 0; i < atoms_.size(); ++i) {
      auto& atom = atoms_[i];
      if (atom.bracket) continue;
      const auto valences = organic_valences(atom.element);
      int sum = bond_sum(i);
      if (atom.aromatic) {
        const int z = atom.element;
        if (z == 5 || z == 6 || z == 7 || z == 15) sum += 1;
        atom.implicit_h = std::max(0, valences.front() - sum);
        continue;
      }
      atom.implicit_h = 0;
      for (int v : valences) {
        if (v >= sum) {
          atom.implicit_h = v - sum;
          break;
        }
      }
    }
  }

  void check_valences() const {
    for (std::size_t i = 0; i < atoms_.size(); ++i) {
      const auto& atom = atoms_[i];
      const auto allowed = charged_valences(atom.element, atom.formal_charge);
      if (allowed.empty()) continue;
      const int used = bond_sum(i) + atom.explicit_h + atom.implicit_h;
      if (used > allowed.back()) {
        fail(SmilesErrorKind::ValenceError, atom_pos_[i],
             "explicit valence " + std::to_string(used) + " exceeds " +
                 std::to_string(allowed.back()) + " for " + std::string(element_symbol(atom.element)));
      }
    }
  }

  // Plain [H] atoms with a single heavy neighbour become hydrogen counts.
  void fold_hydrogens() {
    std::vector<bool> drop(atoms_.size(), false);
    for (std::size_t i = 0; i < atoms_.size(); ++i) {
      const auto& h = atoms_[i];
      if (h.element != 1 || h.isotope || h.formal_charge != 0 || h.explicit_h != 0) continue;
      std::optional<std::size_t> neighbor;
      int count = 0;
      for (const auto& b : bonds_) {
        if (b.a == i || b.b == i) {
          ++count;
          neighbor = b.other(i);
        }
      }
      if (count != 1 || atoms_[*neighbor].element == 1) continue;
      drop[i] = true;
      atoms_[*neighbor].explicit_h += 1;
    }
    if (std::none_of(drop.begin(), drop.end(), [](bool d) { return d; })) return;
    std::vector<std::size_t> remap(atoms_.size());
    std::vector<Atom> kept;
    for (std::size_t i = 0; i < atoms_.size(); ++i) {
      remap[i] = kept.size();
      if (!drop[i]) kept.push_back(atoms_[i]);
    }
    std::vector<Bond> bonds;
    for (const auto& b : bonds_) {
      if (drop[b.a] || drop[b.b]) continue;
      bonds.push_back({remap[b.a], remap[b.b], b.order, b.stereo});
    }
    atoms_ = std::move(kept);
    bonds_ = std::move(bonds);
  }

  // Electrons an atom donates to a ring pi system, or -1 when it cannot be
  // part of one.
  static int pi_electrons(const Molecule& mol, std::size_t i) {
    const auto& atom = mol.atom(i);
    const int z = atom.element;
    if (z != 5 && z != 6 && z != 7 && z != 8 && z != 15 && z != 16 && z != 33 && z != 34 && z != 52) {
      return -1;
    }
    int ring_double = 0;
    int exo_double = 0;
    bool exo_hetero_double = true;
    for (const auto& n : mol.neighbors(i)) {
      const auto& bond = mol.bond(n.bond);
      if (bond.order == BondOrder::Triple) return -1;
      if (bond.order == BondOrder::Aromatic) return -1;
      if (bond.order != BondOrder::Double) continue;
      if (mol.bond_in_ring(n.bond)) {
        ++ring_double;
      } else {
        ++exo_double;
        const int oz = mol.atom(n.atom).element;
        if (oz != 7 && oz != 8 && oz != 16) exo_hetero_double = false;
      }
    }
    if (ring_double + exo_double > 1) return -1;
    if (ring_double == 1) return 1;
    if (exo_double == 1) return exo_hetero_double ? 0 : -1;
    const int connections = static_cast<int>(mol.degree(i)) + atom.total_h();
    const int q = atom.formal_charge;
    if ((z == 7 || z == 15 || z == 33) && q == 0 && connections == 3) return 2;
    if ((z == 7 || z == 15) && q == -1 && connections == 2) return 2;
    if ((z == 8 || z == 16 || z == 34 || z == 52) && q == 0 && connections == 2) return 2;
    if (z == 6 && q == -1 && connections == 3) return 2;
    if (z == 6 && q == 1 && connections == 3) return 0;
    return -1;
  }

  static bool huckel(int electrons) { return electrons >= 2 && (electrons - 2) % 4 == 0; }

  static void perceive_aromaticity(Molecule& mol) {
    const auto& rings = mol.rings();
    std::vector<int> electrons(mol.atom_count(), -1);
    for (std::size_t i = 0; i < mol.atom_count(); ++i) {
      if (mol.atom_in_ring(i) && !mol.atom(i).aromatic) electrons[i] = pi_electrons(mol, i);
    }
    auto candidate_ring = [&](const std::vector<std::size_t>& ring) {
      return std::all_of(ring.begin(), ring.end(), [&](std::size_t a) { return electrons[a] >= 0; });
    };
    auto ring_electrons = [&](const std::vector<std::size_t>& atoms) {
      int sum = 0;
      for (auto a : atoms) sum += electrons[a];
      return sum;
    };

    std::vector<bool> aromatic_ring(rings.size(), false);
    std::vector<bool> aromatic_bond(mol.bond_count(), false);
    std::vector<bool> aromatic_atom(mol.atom_count(), false);
    auto mark_ring = [&](const std::vector<std::size_t>& ring, const std::vector<std::size_t>& skip) {
      for (auto a : ring) aromatic_atom[a] = true;
      for (auto b : ring_bonds(mol, ring)) {
        if (std::find(skip.begin(), skip.end(), b) == skip.end()) aromatic_bond[b] = true;
      }
    };
    for (std::size_t r = 0; r < rings.size(); ++r) {
      if (candidate_ring(rings[r]) && huckel(ring_electrons(rings[r]))) {
        aromatic_ring[r] = true;
        mark_ring(rings[r], {});
      }
    }
    // Fused pairs whose combined perimeter satisfies the rule (azulene-like).
    for (std::size_t r = 0; r < rings.size(); ++r) {
      if (aromatic_ring[r] || !candidate_ring(rings[r])) continue;
      for (std::size_t s = 0; s < rings.size(); ++s) {
        if (s == r || !candidate_ring(rings[s])) continue;
        std::vector<std::size_t> merged = rings[r];
        merged.insert(merged.end(), rings[s].begin(), rings[s].end());
        std::sort(merged.begin(), merged.end());
        const auto total = merged.size();
        merged.erase(std::unique(merged.begin(), merged.end()), merged.end());
        if (total - merged.size() != 2) continue;
        if (huckel(ring_electrons(merged))) {
          // Only the perimeter of the pair becomes aromatic; the fusion bond
          // stays as written unless another aromatic ring claims it.
          const auto rb = ring_bonds(mol, rings[r]);
          const auto sb = ring_bonds(mol, rings[s]);
          std::vector<std::size_t> shared_bonds;
          for (auto b : rb) {
            if (std::find(sb.begin(), sb.end(), b) != sb.end()) shared_bonds.push_back(b);
          }
          aromatic_ring[r] = true;
          mark_ring(rings[r], shared_bonds);
          mark_ring(rings[s], shared_bonds);
        }
      }
    }

    for (std::size_t a = 0; a < mol.atom_count(); ++a) {
      if (aromatic_atom[a]) mol.atoms_[a].aromatic = true;
    }
    for (std::size_t b = 0; b < mol.bond_count(); ++b) {
      if (aromatic_bond[b]) mol.bonds_[b].order = BondOrder::Aromatic;
    }
    // Aromatic bonds outside rings (e.g. implicit biaryl links) are single.
    for (std::size_t b = 0; b < mol.bond_count(); ++b) {
      auto& bond = mol.bonds_[b];
      if (bond.order == BondOrder::Aromatic &&
          (!mol.bond_in_ring(b) || !mol.atoms_[bond.a].aromatic || !mol.atoms_[bond.b].aromatic)) {
        bond.order = BondOrder::Single;
      }
    }
  }

  std::string_view text_;
  std::size_t pos_ = 0;
  std::size_t end_ = 0;
  std::vector<Atom> atoms_;
  std::vector<Bond> bonds_;
  std::vector<std::size_t> atom_pos_;
  std::map<int, RingOpen> open_rings_;
};

/// Parses a SMILES string. Throws SmilesError on malformed input.
inline Molecule parse_smiles(std::string_view text) { return SmilesParser(text).parse(); }

}  // namespace attrilens::chem
