#pragma once

#include <algorithm>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "attrilens/chem/elements.hpp"
#include "attrilens/chem/rings.hpp"

namespace attrilens::chem {

enum class BondOrder : std::uint8_t { Single = 1, Double = 2, Triple = 3, Aromatic = 4 };

/// Integer contribution of a bond to the valence of either endpoint; aromatic
/// bonds count as one here and the pi electron is accounted for separately.
inline int valence_contribution(BondOrder order) {
  return order == BondOrder::Aromatic ? 1 : static_cast<int>(order);
}

struct Atom {
  int element = 6;  // atomic number
  int formal_charge = 0;
  bool aromatic = false;
  int explicit_h = 0;  // written in a bracket atom or folded from [H] neighbours
  int implicit_h = 0;  // derived from default valence for organic-subset atoms
  std::optional<int> isotope;
  std::size_t index = 0;
  bool bracket = false;
  std::string chirality;  // recorded, unused by descriptors

  int total_h() const { return explicit_h + implicit_h; }
};

struct Bond {
  std::size_t a = 0;
  std::size_t b = 0;
  BondOrder order = BondOrder::Single;
  char stereo = 0;  // '/' or '\\' when written, unused by descriptors

  std::size_t other(std::size_t atom) const { return atom == a ? b : a; }
};

struct Neighbor {
  std::size_t atom;
  std::size_t bond;
};

/// Immutable molecular graph. Rings hold ordered atom cycles of a minimum
/// cycle basis, so |rings| = |bonds| - |atoms| + |components|.
class Molecule {
 public:
  Molecule() = default;

  /// Assembles topology (adjacency, components, ring flags, ring set) for the
  /// given atoms and bonds. Atom indices are rewritten to match positions.
  static Molecule assemble(std::vector<Atom> atoms, std::vector<Bond> bonds, std::string source) {
    Molecule m;
    m.atoms_ = std::move(atoms);
    m.bonds_ = std::move(bonds);
    m.source_ = std::move(source);
    for (std::size_t i = 0; i < m.atoms_.size(); ++i) m.atoms_[i].index = i;
    m.rebuild_topology();
    return m;
  }

  std::span<const Atom> atoms() const { return atoms_; }
  std::span<const Bond> bonds() const { return bonds_; }
  const Atom& atom(std::size_t i) const { return atoms_[i]; }
  const Bond& bond(std::size_t i) const { return bonds_[i]; }
  std::size_t atom_count() const { return atoms_.size(); }
  std::size_t bond_count() const { return bonds_.size(); }
  bool empty() const { return atoms_.empty(); }
  const std::string& source() const { return source_; }

  const std::vector<std::vector<std::size_t>>& rings() const { return rings_; }
  std::span<const Neighbor> neighbors(std::size_t i) const { return adjacency_[i]; }
  std::size_t degree(std::size_t i) const { return adjacency_[i].size(); }

  std::size_t heavy_degree(std::size_t i) const {
    return static_cast<std::size_t>(std::count_if(
        adjacency_[i].begin(), adjacency_[i].end(),
        [&](const Neighbor& n) { return atoms_[n.atom].element != 1; }));
  }

  std::size_t component_count() const { return component_count_; }
  std::size_t component_of(std::size_t atom) const { return component_[atom]; }

  bool atom_in_ring(std::size_t i) const { return atom_ring_[i]; }
  bool bond_in_ring(std::size_t b) const { return bond_ring_[b]; }

  std::optional<std::size_t> bond_between(std::size_t a, std::size_t b) const {
    for (const auto& n : adjacency_[a]) {
      if (n.atom == b) return n.bond;
    }
    return std::nullopt;
  }

  std::size_t heavy_atom_count() const {
    return static_cast<std::size_t>(std::count_if(
        atoms_.begin(), atoms_.end(), [](const Atom& a) { return a.element != 1; }));
  }

  /// Sum of bond valence contributions (aromatic = 1) plus hydrogens.
  int explicit_valence(std::size_t i) const {
    int v = atoms_[i].total_h();
    for (const auto& n : adjacency_[i]) v += valence_contribution(bonds_[n.bond].order);
    return v;
  }

  /// Sub-molecule made of the atoms flagged in keep. Hydrogens are added to
  /// kept atoms for every dropped bond so valences stay saturated.
  Molecule subgraph(const std::vector<bool>& keep) const {
    std::vector<std::size_t> remap(atoms_.size(), static_cast<std::size_t>(-1));
    std::vector<Atom> atoms;
    for (std::size_t i = 0; i < atoms_.size(); ++i) {
      if (!keep[i]) continue;
      remap[i] = atoms.size();
      atoms.push_back(atoms_[i]);
    }
    std::vector<Bond> bonds;
    for (const auto& b : bonds_) {
      const bool ka = keep[b.a];
      const bool kb = keep[b.b];
      if (ka && kb) {
        bonds.push_back({remap[b.a], remap[b.b], b.order, b.stereo});
      } else if (ka != kb) {
        auto& kept = atoms[remap[ka ? b.a : b.b]];
        kept.explicit_h += valence_contribution(b.order);
      }
    }
    return assemble(std::move(atoms), std::move(bonds), source_);
  }

  /// Component with the most heavy atoms (first one on ties).
  Molecule largest_component() const {
    if (component_count_ <= 1) return *this;
    std::vector<std::size_t> heavy(component_count_, 0);
    for (std::size_t i = 0; i < atoms_.size(); ++i) {
      if (atoms_[i].element != 1) ++heavy[component_[i]];
    }
    const auto best = static_cast<std::size_t>(
        std::distance(heavy.begin(), std::max_element(heavy.begin(), heavy.end())));
    std::vector<bool> keep(atoms_.size());
    for (std::size_t i = 0; i < atoms_.size(); ++i) keep[i] = component_[i] == best;
    return subgraph(keep);
  }

 private:
  void rebuild_topology() {
    const auto n = atoms_.size();
    adjacency_.assign(n, {});
    std::vector<GraphEdge> edges;
    edges.reserve(bonds_.size());
    for (std::size_t b = 0; b < bonds_.size(); ++b) {
      adjacency_[bonds_[b].a].push_back({bonds_[b].b, b});
      adjacency_[bonds_[b].b].push_back({bonds_[b].a, b});
      edges.push_back({bonds_[b].a, bonds_[b].b});
    }
    component_count_ = label_components(n, edges, component_);
    bond_ring_ = find_ring_edges(n, edges);
    atom_ring_.assign(n, false);
    for (std::size_t b = 0; b < bonds_.size(); ++b) {
      if (bond_ring_[b]) atom_ring_[bonds_[b].a] = atom_ring_[bonds_[b].b] = true;
    }
    rings_ = minimum_cycle_basis(n, edges);
  }

  friend class SmilesParser;

  std::vector<Atom> atoms_;
  std::vector<Bond> bonds_;
  std::string source_;
  std::vector<std::vector<Neighbor>> adjacency_;
  std::vector<std::size_t> component_;
  std::size_t component_count_ = 0;
  std::vector<bool> atom_ring_;
  std::vector<bool> bond_ring_;
  std::vector<std::vector<std::size_t>> rings_;
};

/// Bond indices along an ordered ring cycle.
inline std::vector<std::size_t> ring_bonds(const Molecule& mol, std::span<const std::size_t> ring) {
  std::vector<std::size_t> out;
  out.reserve(ring.size());
  for (std::size_t i = 0; i < ring.size(); ++i) {
    const auto b = mol.bond_between(ring[i], ring[(i + 1) % ring.size()]);
    if (b) out.push_back(*b);
  }
  return out;
}

}  // namespace attrilens::chem
