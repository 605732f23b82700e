#pragma once

#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "attrilens/chem/molecule.hpp"
#include "attrilens/chem/smarts.hpp"
#include "attrilens/core/data_dir.hpp"
#include "attrilens/core/text.hpp"

namespace attrilens::descriptors {

/// Wildman-Crippen atom-typed logP.
class CrippenModel {
 public:
  struct AtomType {
    std::string label;
    chem::SmartsPattern pattern;
    double logp;
  };

  static CrippenModel parse(std::string_view content, const std::string& origin = "<memory>") {
    CrippenModel m;
    std::size_t line_no = 0;
    for (const auto& raw : text::split(content, '\n')) {
      ++line_no;
      const auto line = text::trim(raw);
      if (line.empty() || line.front() == '#') continue;
      const auto f = text::split(line, '\t');
      if (f.size() < 3) throw std::runtime_error(origin + ":" + std::to_string(line_no) + ": expected 3 columns");
      try {
        m.types_.push_back({f[0], chem::SmartsPattern(f[1]), std::stod(f[2])});
      } catch (const std::exception& e) {
        throw std::runtime_error(origin + ":" + std::to_string(line_no) + ": " + e.what());
      }
    }
    return m;
  }

  static CrippenModel load(const std::filesystem::path& path) { return parse(text::read_file(path), path.string()); }

  static const CrippenModel& bundled() {
    static const CrippenModel m = load(data_dir() / "descriptors" / "crippen.tsv");
    return m;
  }

  /// Type label per node of the hydrogen-expanded graph (heavy atoms first,
  /// in molecule order, then hydrogens); empty when nothing matches.
  std::vector<std::string> assign_types(const chem::ExpandedGraph& g) const {
    std::vector<std::string> out(g.size());
    for (std::size_t i = 0; i < g.size(); ++i) {
      if (const auto* t = type_of(g, i)) out[i] = t->label;
    }
    return out;
  }

  double logp(const chem::Molecule& mol) const {
    const chem::ExpandedGraph g(mol);
    double sum = 0.0;
    for (std::size_t i = 0; i < g.size(); ++i) {
      if (const auto* t = type_of(g, i)) sum += t->logp;
    }
    return sum;
  }

 private:
  const AtomType* type_of(const chem::ExpandedGraph& g, std::size_t node) const {
    for (const auto& t : types_) {
      if (t.pattern.matches_at(g, node)) return &t;
    }
    return nullptr;
  }

  std::vector<AtomType> types_;
};

}  // namespace attrilens::descriptors
