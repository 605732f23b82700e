#pragma once

#include <cmath>
#include <functional>
#include <map>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "attrilens/chem/elements.hpp"
#include "attrilens/chem/molecule.hpp"
#include "attrilens/descriptors/crippen.hpp"
#include "attrilens/descriptors/registry.hpp"
#include "attrilens/descriptors/tpsa.hpp"

namespace attrilens::descriptors {

/// Raised for registry entries without a calculator.
class Unimplemented : public std::runtime_error {
 public:
  explicit Unimplemented(const std::string& name)
      : std::runtime_error("descriptor " + name + " has no calculator"), name_(name) {}
  const std::string& name() const { return name_; }

 private:
  std::string name_;
};

struct DescriptorValue {
  const DescriptorId* id = nullptr;
  double value = 0.0;
};

namespace detail {

using Calculator = std::function<double(const chem::Molecule&)>;

struct RingClass {
  bool aromatic;
  bool saturated;
  bool hetero;
};

inline std::vector<RingClass> classify_rings(const chem::Molecule& mol) {
  std::vector<RingClass> out;
  for (const auto& ring : mol.rings()) {
    RingClass c{true, true, false};
    for (auto b : chem::ring_bonds(mol, ring)) {
      const auto order = mol.bond(b).order;
      if (order != chem::BondOrder::Aromatic) c.aromatic = false;
      if (order != chem::BondOrder::Single) c.saturated = false;
    }
    for (auto a : ring) {
      if (mol.atom(a).element != 6) c.hetero = true;
    }
    out.push_back(c);
  }
  return out;
}

inline double count_rings(const chem::Molecule& mol, const std::function<bool(const RingClass&)>& pred) {
  double n = 0;
  for (const auto& c : classify_rings(mol)) n += pred(c) ? 1 : 0;
  return n;
}

inline double count_atoms(const chem::Molecule& mol, const std::function<bool(const chem::Atom&)>& pred) {
  double n = 0;
  for (const auto& a : mol.atoms()) n += pred(a) ? 1 : 0;
  return n;
}

inline double mol_wt(const chem::Molecule& mol, bool heavy_only) {
  const double h = chem::atomic_mass(1);
  double sum = 0.0;
  for (const auto& a : mol.atoms()) {
    if (a.element == 1 && heavy_only) continue;
    sum += chem::atomic_mass(a.element, a.isotope.value_or(0));
    if (!heavy_only) sum += h * a.total_h();
  }
  return sum;
}

inline bool is_amide_c_n(const chem::Molecule& mol, const chem::Bond& bond) {
  auto carbonyl_c = [&](std::size_t c) {
    if (mol.atom(c).element != 6) return false;
    for (const auto& nb : mol.neighbors(c)) {
      if (mol.bond(nb.bond).order == chem::BondOrder::Double && mol.atom(nb.atom).element == 8) return true;
    }
    return false;
  };
  const auto za = mol.atom(bond.a).element;
  const auto zb = mol.atom(bond.b).element;
  return (za == 7 && carbonyl_c(bond.b)) || (zb == 7 && carbonyl_c(bond.a));
}

inline double rotatable_bonds(const chem::Molecule& mol) {
  double n = 0;
  for (std::size_t b = 0; b < mol.bond_count(); ++b) {
    const auto& bond = mol.bond(b);
    if (bond.order != chem::BondOrder::Single || mol.bond_in_ring(b)) continue;
    if (mol.atom(bond.a).element == 1 || mol.atom(bond.b).element == 1) continue;
    if (mol.heavy_degree(bond.a) < 2 || mol.heavy_degree(bond.b) < 2) continue;
    if (is_amide_c_n(mol, bond)) continue;
    n += 1;
  }
  return n;
}

inline double fraction_csp3(const chem::Molecule& mol) {
  double carbons = 0;
  double sp3 = 0;
  for (std::size_t i = 0; i < mol.atom_count(); ++i) {
    if (mol.atom(i).element != 6) continue;
    carbons += 1;
    bool saturated = !mol.atom(i).aromatic;
    for (const auto& nb : mol.neighbors(i)) {
      if (mol.bond(nb.bond).order != chem::BondOrder::Single) saturated = false;
    }
    if (saturated) sp3 += 1;
  }
  return carbons == 0 ? 0.0 : sp3 / carbons;
}

inline const std::map<std::string, Calculator, std::less<>>& calculators() {
  using chem::Atom;
  static const std::map<std::string, Calculator, std::less<>> table = {
      {"MolWt", [](const chem::Molecule& m) { return mol_wt(m, false); }},
      {"HeavyAtomMolWt", [](const chem::Molecule& m) { return mol_wt(m, true); }},
      {"HeavyAtomCount", [](const chem::Molecule& m) { return static_cast<double>(m.heavy_atom_count()); }},
      {"MolLogP", [](const chem::Molecule& m) { return CrippenModel::bundled().logp(m); }},
      {"TPSA", [](const chem::Molecule& m) { return TpsaModel::bundled().tpsa(m); }},
      {"NumHDonors",
       [](const chem::Molecule& m) {
         return count_atoms(m, [](const Atom& a) { return (a.element == 7 || a.element == 8) && a.total_h() > 0; });
       }},
      {"NumHAcceptors",
       [](const chem::Molecule& m) {
         return count_atoms(m, [](const Atom& a) { return a.element == 7 || a.element == 8; });
       }},
      {"NHOHCount",
       [](const chem::Molecule& m) {
         double n = 0;
         for (const auto& a : m.atoms()) {
           if (a.element == 7 || a.element == 8) n += a.total_h();
         }
         return n;
       }},
      {"NumNitrogenPlusOxygen",
       [](const chem::Molecule& m) {
         return count_atoms(m, [](const Atom& a) { return a.element == 7 || a.element == 8; });
       }},
      {"NumHeteroatoms",
       [](const chem::Molecule& m) {
         return count_atoms(m, [](const Atom& a) { return a.element != 6 && a.element != 1; });
       }},
      {"NumRotatableBonds", rotatable_bonds},
      {"RingCount", [](const chem::Molecule& m) { return static_cast<double>(m.rings().size()); }},
      {"NumAromaticRings", [](const chem::Molecule& m) { return count_rings(m, [](const RingClass& c) { return c.aromatic; }); }},
      {"NumAliphaticRings", [](const chem::Molecule& m) { return count_rings(m, [](const RingClass& c) { return !c.aromatic; }); }},
      {"NumSaturatedRings", [](const chem::Molecule& m) { return count_rings(m, [](const RingClass& c) { return c.saturated; }); }},
      {"NumAromaticCarbocycles",
       [](const chem::Molecule& m) { return count_rings(m, [](const RingClass& c) { return c.aromatic && !c.hetero; }); }},
      {"NumAromaticHeterocycles",
       [](const chem::Molecule& m) { return count_rings(m, [](const RingClass& c) { return c.aromatic && c.hetero; }); }},
      {"NumAliphaticCarbocycles",
       [](const chem::Molecule& m) { return count_rings(m, [](const RingClass& c) { return !c.aromatic && !c.hetero; }); }},
      {"NumAliphaticHeterocycles",
       [](const chem::Molecule& m) { return count_rings(m, [](const RingClass& c) { return !c.aromatic && c.hetero; }); }},
      {"NumSaturatedCarbocycles",
       [](const chem::Molecule& m) { return count_rings(m, [](const RingClass& c) { return c.saturated && !c.hetero; }); }},
      {"NumSaturatedHeterocycles",
       [](const chem::Molecule& m) { return count_rings(m, [](const RingClass& c) { return c.saturated && c.hetero; }); }},
      {"FractionCSP3", fraction_csp3},
      {"NumSulfurAtoms", [](const chem::Molecule& m) { return count_atoms(m, [](const Atom& a) { return a.element == 16; }); }},
      {"NumHalogenAtoms",
       [](const chem::Molecule& m) { return count_atoms(m, [](const Atom& a) { return chem::is_halogen(a.element); }); }},
      {"FormalCharge",
       [](const chem::Molecule& m) {
         double q = 0;
         for (const auto& a : m.atoms()) q += a.formal_charge;
         return q;
       }},
  };
  return table;
}

}  // namespace detail

/// True when a calculator exists for the canonical name.
inline bool has_calculator(std::string_view canonical_name) {
  return detail::calculators().find(canonical_name) != detail::calculators().end();
}

inline double compute_value(const chem::Molecule& mol, const DescriptorId& id) {
  const auto it = detail::calculators().find(id.canonical_name);
  if (!id.implemented || it == detail::calculators().end()) throw Unimplemented(id.canonical_name);
  return it->second(mol);
}

inline DescriptorValue compute(const chem::Molecule& mol, const DescriptorId& id) {
  return {&id, compute_value(mol, id)};
}

/// Values in the order of ids. Unimplemented ids abort the whole row.
inline std::vector<double> compute_features(const chem::Molecule& mol, std::span<const DescriptorId* const> ids) {
  std::vector<double> out;
  out.reserve(ids.size());
  for (const auto* id : ids) out.push_back(compute_value(mol, *id));
  return out;
}

/// Lazily computed, memoized descriptor values for one molecule.
class DescriptorProfile {
 public:
  explicit DescriptorProfile(const chem::Molecule& mol) : mol_(&mol) {}

  double get(const DescriptorId& id) {
    if (const auto it = cache_.find(id.canonical_name); it != cache_.end()) return it->second;
    const double v = compute_value(*mol_, id);
    cache_.emplace(id.canonical_name, v);
    return v;
  }

  const chem::Molecule& molecule() const { return *mol_; }

 private:
  const chem::Molecule* mol_;
  std::map<std::string, double, std::less<>> cache_;
};

}  // namespace attrilens::descriptors
