#pragma once

#include <algorithm>
#include <charconv>
#include <cmath>
#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "attrilens/chem/scaffold.hpp"
#include "attrilens/chem/smiles.hpp"
#include "attrilens/core/csv.hpp"
#include "attrilens/core/data_dir.hpp"
#include "attrilens/core/text.hpp"
#include "attrilens/response/response.hpp"

namespace attrilens::mlpipe {

using response::Answer;
using response::TaskKind;

class MissingColumn : public std::invalid_argument {
 public:
  explicit MissingColumn(const std::string& column, const std::string& origin)
      : std::invalid_argument(origin + ": missing column '" + column + "'"), column_(column) {}
  const std::string& column() const { return column_; }

 private:
  std::string column_;
};

class EmptyDataset : public std::invalid_argument {
 public:
  explicit EmptyDataset(const std::string& what) : std::invalid_argument("EmptyDataset: " + what) {}
};

class DegenerateLabels : public std::invalid_argument {
 public:
  explicit DegenerateLabels(const std::string& what) : std::invalid_argument("DegenerateLabels: " + what) {}
};

class LengthMismatch : public std::invalid_argument {
 public:
  LengthMismatch(std::size_t a, std::size_t b)
      : std::invalid_argument("LengthMismatch: " + std::to_string(a) + " vs " + std::to_string(b)) {}
};

struct DatasetRecord {
  std::string smiles;
  Answer label;
  TaskKind task = TaskKind::Classification;
  std::string dataset_name;
  chem::Molecule molecule;
  std::size_t line = 0;  // 1-based line in the source file

  bool positive() const { return std::get<bool>(label); }
};

struct CsvSchema {
  std::string smiles_column = "smiles";
  std::string label_column = "label";
  TaskKind task = TaskKind::Classification;
  std::string dataset_name;
};

struct SkippedRow {
  std::size_t line = 0;
  std::string reason;
};

struct LoadResult {
  std::vector<DatasetRecord> records;
  std::vector<SkippedRow> skipped;
};

namespace detail {

inline std::optional<Answer> parse_label(std::string_view cell, TaskKind task) {
  const auto t = text::trim(cell);
  if (task == TaskKind::Classification) {
    const auto v = text::lower(t);
    if (v == "1" || v == "true" || v == "1.0") return Answer{true};
    if (v == "0" || v == "false" || v == "0.0") return Answer{false};
    return std::nullopt;
  }
  double d = 0.0;
  const auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), d);
  if (ec != std::errc{} || ptr != t.data() + t.size() || !std::isfinite(d)) return std::nullopt;
  return Answer{d};
}

}  // namespace detail

/// Rows whose SMILES or label does not parse are skipped and reported.
inline LoadResult parse_csv_dataset(std::string_view content, const CsvSchema& schema,
                                    const std::string& origin = "<memory>") {
  const auto lines = text::split(content, '\n');
  if (lines.empty() || text::trim(lines.front()).empty()) throw EmptyDataset(origin + " has no header");
  const auto header = csv::split_record(lines.front());
  auto column = [&](const std::string& name) {
    for (std::size_t i = 0; i < header.size(); ++i) {
      if (text::trim(header[i]) == name) return i;
    }
    throw MissingColumn(name, origin);
  };
  const auto smiles_col = column(schema.smiles_column);
  const auto label_col = column(schema.label_column);
  LoadResult out;
  for (std::size_t i = 1; i < lines.size(); ++i) {
    if (text::trim(lines[i]).empty()) continue;
    const std::size_t line_no = i + 1;
    std::vector<std::string> fields;
    try {
      fields = csv::split_record(lines[i]);
    } catch (const csv::CsvError& e) {
      out.skipped.push_back({line_no, e.what()});
      continue;
    }
    if (fields.size() <= std::max(smiles_col, label_col)) {
      out.skipped.push_back({line_no, "too few columns"});
      continue;
    }
    DatasetRecord r;
    r.smiles = std::string(text::trim(fields[smiles_col]));
    r.task = schema.task;
    r.dataset_name = schema.dataset_name;
    r.line = line_no;
    const auto label = detail::parse_label(fields[label_col], schema.task);
    if (!label) {
      out.skipped.push_back({line_no, "bad label '" + fields[label_col] + "'"});
      continue;
    }
    r.label = *label;
    try {
      r.molecule = chem::parse_smiles(r.smiles);
    } catch (const chem::SmilesError& e) {
      out.skipped.push_back({line_no, e.what()});
      continue;
    }
    out.records.push_back(std::move(r));
  }
  if (out.records.empty()) throw EmptyDataset(origin + " has no usable rows");
  return out;
}

inline LoadResult load_csv(const std::filesystem::path& path, const CsvSchema& schema) {
  return parse_csv_dataset(text::read_file(path), schema, path.string());
}

/// Column layouts of the bundled datasets.
inline CsvSchema bbbp_schema() { return {"smiles", "p_np", TaskKind::Classification, "BBBP"}; }
inline CsvSchema bace_schema() { return {"mol", "Class", TaskKind::Classification, "BACE"}; }

inline std::filesystem::path bundled_dataset(std::string_view file) { return data_dir() / "datasets" / file; }

struct SplitFractions {
  double train = 0.8;
  double valid = 0.1;
  double test = 0.1;
};

/// Record indices of each split.
struct Split {
  std::vector<std::size_t> train;
  std::vector<std::size_t> valid;
  std::vector<std::size_t> test;
};

/// Scaffold groups in assignment order: size descending, then key ascending.
/// Members keep their input order.
inline std::vector<std::pair<std::string, std::vector<std::size_t>>> scaffold_groups(
    std::span<const DatasetRecord> records) {
  std::map<std::string, std::vector<std::size_t>> by_key;
  for (std::size_t i = 0; i < records.size(); ++i) by_key[chem::scaffold_key(records[i].molecule)].push_back(i);
  std::vector<std::pair<std::string, std::vector<std::size_t>>> groups(by_key.begin(), by_key.end());
  std::stable_sort(groups.begin(), groups.end(),
                   [](const auto& a, const auto& b) { return a.second.size() > b.second.size(); });
  return groups;
}

/// Greedy scaffold split: whole groups go to train while it holds fewer than
/// train * n records, then to valid while train + valid holds fewer than
/// (train + valid) * n, then to test.
inline Split scaffold_split(std::span<const DatasetRecord> records, SplitFractions f = {}) {
  if (records.empty()) throw EmptyDataset("nothing to split");
  if (f.train < 0 || f.valid < 0 || f.test < 0 || std::abs(f.train + f.valid + f.test - 1.0) > 1e-9) {
    throw std::invalid_argument("split fractions must be non-negative and sum to 1");
  }
  const double n = static_cast<double>(records.size());
  Split s;
  for (const auto& [key, members] : scaffold_groups(records)) {
    auto* dest = &s.test;
    if (static_cast<double>(s.train.size()) < f.train * n) {
      dest = &s.train;
    } else if (static_cast<double>(s.train.size() + s.valid.size()) < (f.train + f.valid) * n) {
      dest = &s.valid;
    }
    dest->insert(dest->end(), members.begin(), members.end());
  }
  return s;
}

template <typename T>
std::vector<T> select(std::span<const T> items, std::span<const std::size_t> indices) {
  std::vector<T> out;
  out.reserve(indices.size());
  for (auto i : indices) out.push_back(items[i]);
  return out;
}

}  // namespace attrilens::mlpipe
