#pragma once

#include <cmath>
#include <filesystem>
#include <limits>
#include <map>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "attrilens/core/data_dir.hpp"
#include "attrilens/core/text.hpp"
#include "attrilens/descriptors/registry.hpp"

namespace attrilens::rewards {

class RangeTableError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class ParseError : public RangeTableError {
 public:
  ParseError(const std::string& origin, std::size_t line, const std::string& what)
      : RangeTableError(origin + ":" + std::to_string(line) + ": " + what), line_(line) {}
  std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

class UnknownDescriptor : public RangeTableError {
 public:
  UnknownDescriptor(const std::string& origin, std::size_t line, const std::string& name)
      : RangeTableError(origin + ":" + std::to_string(line) + ": unknown descriptor " + name), name_(name) {}
  const std::string& name() const { return name_; }

 private:
  std::string name_;
};

class TableMissing : public RangeTableError {
 public:
  explicit TableMissing(const std::string& target)
      : RangeTableError("range table has no entries for target " + target), target_(target) {}
  const std::string& target() const { return target_; }

 private:
  std::string target_;
};

struct Interval {
  double lo = -std::numeric_limits<double>::infinity();
  double hi = std::numeric_limits<double>::infinity();
  bool lo_closed = false;
  bool hi_closed = false;

  bool contains(double v) const {
    const bool above = lo_closed ? v >= lo : v > lo;
    const bool below = hi_closed ? v <= hi : v < hi;
    return above && below;
  }
};

class IntervalSet {
 public:
  IntervalSet() = default;
  explicit IntervalSet(std::vector<Interval> parts) : parts_(std::move(parts)) {}

  /// Parses "[0,90)", "(-inf,3.5]" or a comma-separated union of such.
  static IntervalSet parse(std::string_view s) {
    std::vector<Interval> parts;
    std::size_t i = 0;
    auto skip = [&] {
      while (i < s.size() && (s[i] == ' ' || s[i] == '\t')) ++i;
    };
    while (true) {
      skip();
      if (i >= s.size()) throw std::invalid_argument("expected interval");
      Interval iv;
      if (s[i] != '[' && s[i] != '(') throw std::invalid_argument("interval must start with [ or (");
      iv.lo_closed = s[i] == '[';
      const auto close = s.find_first_of(")]", i + 1);
      if (close == std::string_view::npos) throw std::invalid_argument("unterminated interval");
      iv.hi_closed = s[close] == ']';
      const auto inner = s.substr(i + 1, close - i - 1);
      const auto comma = inner.find(',');
      if (comma == std::string_view::npos || inner.find(',', comma + 1) != std::string_view::npos) {
        throw std::invalid_argument("interval needs exactly two bounds");
      }
      iv.lo = parse_bound(inner.substr(0, comma));
      iv.hi = parse_bound(inner.substr(comma + 1));
      if (std::isinf(iv.lo) && iv.lo_closed) throw std::invalid_argument("infinite bound must be open");
      if (std::isinf(iv.hi) && iv.hi_closed) throw std::invalid_argument("infinite bound must be open");
      const bool point = iv.lo == iv.hi && iv.lo_closed && iv.hi_closed;
      if (!(iv.lo < iv.hi) && !point) throw std::invalid_argument("empty interval " + std::string(s.substr(i, close - i + 1)));
      parts.push_back(iv);
      i = close + 1;
      skip();
      if (i >= s.size()) break;
      if (s[i] != ',') throw std::invalid_argument("expected , between intervals");
      ++i;
    }
    return IntervalSet(std::move(parts));
  }

  bool contains(double v) const {
    for (const auto& p : parts_) {
      if (p.contains(v)) return true;
    }
    return false;
  }

  const std::vector<Interval>& parts() const { return parts_; }

  static IntervalSet everything() { return IntervalSet({Interval{}}); }

 private:
  static double parse_bound(std::string_view raw) {
    const auto t = text::lower(text::trim(raw));
    if (t == "-inf") return -std::numeric_limits<double>::infinity();
    if (t == "inf" || t == "+inf") return std::numeric_limits<double>::infinity();
    std::size_t used = 0;
    const double v = std::stod(t, &used);
    if (used != t.size() || !std::isfinite(v)) throw std::invalid_argument("bad bound " + t);
    return v;
  }

  std::vector<Interval> parts_;
};

/// Advantageous value ranges per (target property, descriptor). Targets are
/// matched case-insensitively.
class RangeTable {
 public:
  /// Lines are `target<TAB>descriptor<TAB>interval-set`; '#' starts a comment.
  static RangeTable parse(std::string_view content, const descriptors::Registry& registry,
                          const std::string& origin = "<memory>") {
    RangeTable t;
    t.origin_ = origin;
    std::size_t line_no = 0;
    for (const auto& raw : text::split(content, '\n')) {
      ++line_no;
      const auto line = text::trim(raw);
      if (line.empty() || line.front() == '#') continue;
      const auto f = text::split(line, '\t');
      if (f.size() != 3) throw ParseError(origin, line_no, "expected target<TAB>descriptor<TAB>intervals");
      const auto target = std::string(text::trim(f[0]));
      const auto name = std::string(text::trim(f[1]));
      if (target.empty()) throw ParseError(origin, line_no, "empty target");
      const auto* id = registry.find(name);
      if (id == nullptr) throw UnknownDescriptor(origin, line_no, name);
      IntervalSet set;
      try {
        set = IntervalSet::parse(f[2]);
      } catch (const std::exception& e) {
        throw ParseError(origin, line_no, e.what());
      }
      auto& row = t.entries_[text::lower(target)];
      if (!row.emplace(id->canonical_name, std::move(set)).second) {
        throw ParseError(origin, line_no, "duplicate entry for " + target + "/" + name);
      }
    }
    return t;
  }

  static RangeTable load(const std::filesystem::path& path,
                         const descriptors::Registry& registry = descriptors::Registry::bundled()) {
    return parse(text::read_file(path), registry, path.string());
  }

  /// A table shipped under data/ranges, e.g. "gpt4o-default".
  static RangeTable bundled(std::string_view name) {
    return load(data_dir() / "ranges" / (std::string(name) + ".tsv"));
  }

  bool has_target(std::string_view target) const { return entries_.count(text::lower(target)) != 0; }

  /// Ranges for one descriptor; nullptr when the table has no entry.
  /// Throws TableMissing when the target has no entries at all.
  const IntervalSet* find(std::string_view target, std::string_view canonical_name) const {
    const auto row = entries_.find(text::lower(target));
    if (row == entries_.end()) throw TableMissing(std::string(target));
    const auto it = row->second.find(std::string(canonical_name));
    return it == row->second.end() ? nullptr : &it->second;
  }

  std::vector<std::string> targets() const {
    std::vector<std::string> out;
    for (const auto& [k, v] : entries_) out.push_back(k);
    return out;
  }

  std::size_t size() const {
    std::size_t n = 0;
    for (const auto& [k, v] : entries_) n += v.size();
    return n;
  }

  const std::string& origin() const { return origin_; }

 private:
  std::map<std::string, std::map<std::string, IntervalSet>> entries_;
  std::string origin_;
};

}  // namespace attrilens::rewards
