#pragma once

#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "attrilens/core/data_dir.hpp"
#include "attrilens/core/text.hpp"

namespace attrilens::descriptors {

struct DescriptorId {
  std::size_t index = 0;  // position in the registry, used for tie-breaking
  std::string canonical_name;
  std::vector<std::string> aliases;
  bool implemented = false;

  bool operator==(const DescriptorId& o) const { return canonical_name == o.canonical_name; }
};

class RegistryError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class Registry {
 public:
  static constexpr double kSimilarityThreshold = 0.80;

  /// Parses the tab-separated registry format: name, yes|no, comma-separated aliases.
  static Registry parse(std::string_view content, const std::string& origin = "<memory>") {
    Registry r;
    std::size_t line_no = 0;
    for (const auto& raw : text::split(content, '\n')) {
      ++line_no;
      const auto line = text::trim(raw);
      if (line.empty() || line.front() == '#') continue;
      const auto fields = text::split(line, '\t');
      if (fields.size() < 2) {
        throw RegistryError(origin + ":" + std::to_string(line_no) + ": expected name<TAB>implemented<TAB>aliases");
      }
      DescriptorId id;
      id.index = r.entries_.size();
      id.canonical_name = std::string(text::trim(fields[0]));
      const auto flag = text::lower(text::trim(fields[1]));
      if (flag != "yes" && flag != "no") {
        throw RegistryError(origin + ":" + std::to_string(line_no) + ": implemented must be yes or no");
      }
      id.implemented = flag == "yes";
      if (fields.size() > 2) {
        for (const auto& alias : text::split(fields[2], ',')) {
          const auto a = text::trim(alias);
          if (!a.empty()) id.aliases.emplace_back(a);
        }
      }
      if (r.by_name_.count(id.canonical_name) != 0) {
        throw RegistryError(origin + ":" + std::to_string(line_no) + ": duplicate name " + id.canonical_name);
      }
      r.by_name_[id.canonical_name] = id.index;
      r.entries_.push_back(std::move(id));
    }
    r.index_keys();
    return r;
  }

  static Registry load(const std::filesystem::path& path) { return parse(text::read_file(path), path.string()); }

  /// Registry from the bundled data directory, loaded once.
  static const Registry& bundled() {
    static const Registry r = load(data_dir() / "descriptors" / "registry.tsv");
    return r;
  }

  const std::vector<DescriptorId>& entries() const { return entries_; }
  std::size_t size() const { return entries_.size(); }

  /// Exact lookup by canonical name.
  const DescriptorId* find(std::string_view canonical_name) const {
    const auto it = by_name_.find(std::string(canonical_name));
    return it == by_name_.end() ? nullptr : &entries_[it->second];
  }

  /// Maps a free-text attribute name to a registry entry: exact normalized
  /// match against names and aliases first, then the closest normalized
  /// edit-distance match at or above the similarity threshold. Ties go to
  /// the earlier registry entry. nullptr means no match.
  const DescriptorId* resolve(std::string_view raw_name) const {
    const auto key = text::normalize_name(raw_name);
    if (key.empty()) return nullptr;
    if (const auto it = exact_.find(key); it != exact_.end()) return &entries_[it->second];
    const DescriptorId* best = nullptr;
    double best_score = -1.0;
    for (const auto& [candidate, index] : keys_) {
      const auto longest = std::max(candidate.size(), key.size());
      const double score = 1.0 - static_cast<double>(text::levenshtein(candidate, key)) / static_cast<double>(longest);
      if (score < kSimilarityThreshold) continue;
      if (score > best_score || (score == best_score && index < best->index)) {
        best_score = score;
        best = &entries_[index];
      }
    }
    return best;
  }

 private:
  void index_keys() {
    // Canonical names take precedence over aliases of other entries.
    for (const auto& e : entries_) {
      const auto k = text::normalize_name(e.canonical_name);
      exact_.emplace(k, e.index);
      keys_.emplace_back(k, e.index);
    }
    for (const auto& e : entries_) {
      for (const auto& a : e.aliases) {
        const auto k = text::normalize_name(a);
        if (k.empty()) continue;
        exact_.emplace(k, e.index);
        keys_.emplace_back(k, e.index);
      }
    }
  }

  std::vector<DescriptorId> entries_;
  std::unordered_map<std::string, std::size_t> by_name_;
  std::unordered_map<std::string, std::size_t> exact_;
  std::vector<std::pair<std::string, std::size_t>> keys_;
};

/// resolve against the bundled registry.
inline const DescriptorId* resolve_attribute(std::string_view raw_name) {
  return Registry::bundled().resolve(raw_name);
}

}  // namespace attrilens::descriptors
