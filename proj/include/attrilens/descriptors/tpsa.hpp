#pragma once

#include <algorithm>
#include <array>
#include <filesystem>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "attrilens/chem/elements.hpp"
#include "attrilens/chem/molecule.hpp"
#include "attrilens/core/data_dir.hpp"
#include "attrilens/core/text.hpp"

namespace attrilens::descriptors {

/// Counts describing the bonding environment of one polar atom.
struct PolarEnvironment {
  int element = 0;
  int neighbors = 0;  // heavy atoms
  int hydrogens = 0;
  int charge = 0;
  int single = 0;
  int double_ = 0;
  int triple = 0;
  int aromatic = 0;
  bool ring3 = false;
};

inline PolarEnvironment polar_environment(const chem::Molecule& mol, std::size_t i) {
  PolarEnvironment env;
  const auto& atom = mol.atom(i);
  env.element = atom.element;
  env.charge = atom.formal_charge;
  env.hydrogens = atom.total_h();
  for (const auto& nb : mol.neighbors(i)) {
    if (mol.atom(nb.atom).element == 1) {
      ++env.hydrogens;
      continue;
    }
    ++env.neighbors;
    switch (mol.bond(nb.bond).order) {
      case chem::BondOrder::Single: ++env.single; break;
      case chem::BondOrder::Double: ++env.double_; break;
      case chem::BondOrder::Triple: ++env.triple; break;
      case chem::BondOrder::Aromatic: ++env.aromatic; break;
    }
  }
  for (const auto& ring : mol.rings()) {
    if (ring.size() == 3 && std::find(ring.begin(), ring.end(), i) != ring.end()) env.ring3 = true;
  }
  return env;
}

/// Ertl fragment-contribution topological polar surface area over N and O.
class TpsaModel {
 public:
  static TpsaModel parse(std::string_view content, const std::string& origin = "<memory>") {
    TpsaModel m;
    std::size_t line_no = 0;
    for (const auto& raw : text::split(content, '\n')) {
      ++line_no;
      const auto line = text::trim(raw);
      if (line.empty() || line.front() == '#') continue;
      const auto f = text::split(line, '\t');
      auto where = [&] { return origin + ":" + std::to_string(line_no) + ": "; };
      const auto z = chem::element_by_symbol(text::trim(f[0]));
      if (!z) throw std::runtime_error(where() + "unknown element " + f[0]);
      try {
        if (f.size() == 5 && text::trim(f[1]) == "fallback") {
          m.fallback_[*z] = {std::stod(f[2]), std::stod(f[3]), std::stod(f[4])};
          continue;
        }
        if (f.size() != 10) throw std::runtime_error("expected 10 columns");
        Row row;
        row.element = *z;
        for (std::size_t k = 0; k < 8; ++k) {
          const auto cell = text::trim(f[k + 1]);
          if (cell != "*") row.fields[k] = std::stoi(std::string(cell));
        }
        row.value = std::stod(f[9]);
        m.rows_.push_back(row);
      } catch (const std::exception& e) {
        throw std::runtime_error(where() + e.what());
      }
    }
    return m;
  }

  static TpsaModel load(const std::filesystem::path& path) { return parse(text::read_file(path), path.string()); }

  static const TpsaModel& bundled() {
    static const TpsaModel m = load(data_dir() / "descriptors" / "tpsa_ertl.tsv");
    return m;
  }

  /// Contribution of one environment; nullopt for elements without entries.
  std::optional<double> contribution(const PolarEnvironment& env) const {
    const std::array<int, 8> values{env.neighbors, env.hydrogens, env.charge, env.single,
                                    env.double_,   env.triple,    env.aromatic, env.ring3 ? 1 : 0};
    for (const auto& row : rows_) {
      if (row.element != env.element) continue;
      bool ok = true;
      for (std::size_t k = 0; k < values.size() && ok; ++k) {
        if (row.fields[k] && *row.fields[k] != values[k]) ok = false;
      }
      if (ok) return row.value;
    }
    const auto fb = fallback_.find(env.element);
    if (fb == fallback_.end()) return std::nullopt;
    const auto [base, per_neighbor, per_h] = fb->second;
    return std::max(0.0, base - per_neighbor * env.neighbors + per_h * env.hydrogens);
  }

  double tpsa(const chem::Molecule& mol) const {
    double sum = 0.0;
    for (std::size_t i = 0; i < mol.atom_count(); ++i) {
      if (const auto c = contribution(polar_environment(mol, i))) sum += *c;
    }
    return sum;
  }

 private:
  struct Row {
    int element = 0;
    std::array<std::optional<int>, 8> fields;
    double value = 0.0;
  };
  struct Fallback {
    double base;
    double per_neighbor;
    double per_h;
  };

  std::vector<Row> rows_;
  std::map<int, Fallback> fallback_;
};

}  // namespace attrilens::descriptors
