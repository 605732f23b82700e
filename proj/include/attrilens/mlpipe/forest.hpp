#pragma once

#include <algorithm>
#include <atomic>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <random>
#include <span>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "attrilens/descriptors/compute.hpp"
#include "attrilens/descriptors/registry.hpp"
#include "attrilens/mlpipe/dataset.hpp"

namespace attrilens::mlpipe {

/// Row-major feature matrix.
struct FeatureMatrix {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<double> values;

  double at(std::size_t r, std::size_t c) const { return values[r * cols + c]; }
  std::span<const double> row(std::size_t r) const { return {values.data() + r * cols, cols}; }

  FeatureMatrix subset(std::span<const std::size_t> idx) const {
    FeatureMatrix m{idx.size(), cols, {}};
    m.values.reserve(idx.size() * cols);
    for (auto i : idx) m.values.insert(m.values.end(), row(i).begin(), row(i).end());
    return m;
  }
};

inline FeatureMatrix featurize(std::span<const DatasetRecord> records,
                               std::span<const descriptors::DescriptorId* const> ids) {
  FeatureMatrix m{records.size(), ids.size(), {}};
  m.values.reserve(records.size() * ids.size());
  for (const auto& r : records) {
    const auto f = descriptors::compute_features(r.molecule, ids);
    m.values.insert(m.values.end(), f.begin(), f.end());
  }
  return m;
}

inline std::vector<int> class_labels(std::span<const DatasetRecord> records) {
  std::vector<int> y;
  y.reserve(records.size());
  for (const auto& r : records) {
    const auto* b = std::get_if<bool>(&r.label);
    if (b == nullptr) throw std::invalid_argument("forest training needs classification labels");
    y.push_back(*b ? 1 : 0);
  }
  return y;
}

struct ForestConfig {
  std::size_t n_trees = 200;
  std::size_t max_depth = 8;
  std::uint64_t seed = 0;
  std::size_t min_samples_split = 2;
  std::size_t threads = 0;  // 0 picks the hardware concurrency
};

/// Node of a binary tree. Internal nodes send x[feature] <= threshold left.
struct TreeNode {
  int feature = -1;  // -1 marks a leaf
  double threshold = 0.0;
  std::size_t left = 0;
  std::size_t right = 0;
  double p_positive = 0.0;  // leaf class-1 probability

  bool leaf() const { return feature < 0; }
  bool operator==(const TreeNode&) const = default;
};

struct DecisionTree {
  std::vector<TreeNode> nodes;  // root at 0

  double predict(std::span<const double> x) const {
    std::size_t k = 0;
    while (!nodes[k].leaf()) {
      k = x[static_cast<std::size_t>(nodes[k].feature)] <= nodes[k].threshold ? nodes[k].left : nodes[k].right;
    }
    return nodes[k].p_positive;
  }

  std::size_t depth() const {
    std::vector<std::size_t> d(nodes.size(), 0);
    std::size_t best = 0;
    for (std::size_t k = 0; k < nodes.size(); ++k) {
      best = std::max(best, d[k]);
      if (!nodes[k].leaf()) d[nodes[k].left] = d[nodes[k].right] = d[k] + 1;
    }
    return best;
  }

  bool operator==(const DecisionTree&) const = default;
};

struct ForestMeta {
  std::uint64_t seed = 0;
  std::size_t n_trees = 0;
  std::size_t max_depth = 0;
  bool operator==(const ForestMeta&) const = default;
};

struct ForestModel {
  std::vector<std::string> feature_names;
  std::vector<DecisionTree> trees;
  ForestMeta meta;

  /// Mean of the per-tree leaf probabilities.
  double predict_proba(std::span<const double> x) const {
    double s = 0.0;
    for (const auto& t : trees) s += t.predict(x);
    return trees.empty() ? 0.0 : s / static_cast<double>(trees.size());
  }

  std::vector<double> predict_proba(const FeatureMatrix& m) const {
    std::vector<double> out(m.rows);
    for (std::size_t r = 0; r < m.rows; ++r) out[r] = predict_proba(m.row(r));
    return out;
  }

  bool operator==(const ForestModel&) const = default;
};

namespace detail {

struct TreeBuilder {
  const FeatureMatrix& x;
  std::span<const int> y;
  const ForestConfig& cfg;
  std::mt19937_64 rng;
  std::size_t n_candidates;
  DecisionTree tree;

  std::size_t leaf(std::span<const std::size_t> idx) {
    double pos = 0.0;
    for (auto i : idx) pos += y[i];
    TreeNode n;
    n.p_positive = pos / static_cast<double>(idx.size());
    tree.nodes.push_back(n);
    return tree.nodes.size() - 1;
  }

  std::size_t build(std::vector<std::size_t> idx, std::size_t depth) {
    std::size_t pos = 0;
    for (auto i : idx) pos += static_cast<std::size_t>(y[i]);
    if (depth >= cfg.max_depth || idx.size() < cfg.min_samples_split || pos == 0 || pos == idx.size()) {
      return leaf(idx);
    }
    std::vector<std::size_t> features(x.cols);
    std::iota(features.begin(), features.end(), std::size_t{0});
    for (std::size_t k = 0; k < n_candidates; ++k) {
      std::uniform_int_distribution<std::size_t> pick(k, x.cols - 1);
      std::swap(features[k], features[pick(rng)]);
    }
    const double n = static_cast<double>(idx.size());
    const double total_pos = static_cast<double>(pos);
    double best_score = 1e300;
    int best_feature = -1;
    double best_threshold = 0.0;
    std::vector<std::pair<double, int>> column(idx.size());
    for (std::size_t k = 0; k < n_candidates; ++k) {
      const auto f = features[k];
      for (std::size_t j = 0; j < idx.size(); ++j) column[j] = {x.at(idx[j], f), y[idx[j]]};
      std::sort(column.begin(), column.end());
      double left_pos = 0.0;
      for (std::size_t j = 0; j + 1 < column.size(); ++j) {
        left_pos += column[j].second;
        if (column[j].first == column[j + 1].first) continue;
        const double nl = static_cast<double>(j + 1);
        const double nr = n - nl;
        const double pl = left_pos / nl;
        const double pr = (total_pos - left_pos) / nr;
        // weighted Gini impurity of the two children
        const double score = nl * 2.0 * pl * (1.0 - pl) + nr * 2.0 * pr * (1.0 - pr);
        if (score < best_score) {
          best_score = score;
          best_feature = static_cast<int>(f);
          best_threshold = column[j].first + (column[j + 1].first - column[j].first) / 2.0;
          if (best_threshold >= column[j + 1].first) best_threshold = column[j].first;
        }
      }
    }
    if (best_feature < 0) return leaf(idx);
    std::vector<std::size_t> left, right;
    for (auto i : idx) (x.at(i, static_cast<std::size_t>(best_feature)) <= best_threshold ? left : right).push_back(i);
    const auto self = tree.nodes.size();
    tree.nodes.emplace_back();
    tree.nodes[self].feature = best_feature;
    tree.nodes[self].threshold = best_threshold;
    const auto l = build(std::move(left), depth + 1);
    const auto r = build(std::move(right), depth + 1);
    tree.nodes[self].left = l;
    tree.nodes[self].right = r;
    return self;
  }
};

inline std::mt19937_64 tree_rng(std::uint64_t seed, std::size_t tree) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(tree)};
  return std::mt19937_64(seq);
}

}  // namespace detail

/// Bootstrap forest of Gini trees, sqrt(d) candidate features per node.
/// Each tree has its own RNG stream, so results do not depend on threading.
inline ForestModel train_forest(const FeatureMatrix& x, std::span<const int> y, std::vector<std::string> feature_names,
                                const ForestConfig& cfg = {}) {
  if (x.rows != y.size()) throw LengthMismatch(x.rows, y.size());
  if (x.rows == 0 || x.cols == 0) throw EmptyDataset("no training rows or features");
  if (feature_names.size() != x.cols) throw LengthMismatch(feature_names.size(), x.cols);
  if (cfg.n_trees == 0) throw std::invalid_argument("n_trees must be positive");
  const auto pos = std::count(y.begin(), y.end(), 1);
  if (pos == 0 || pos == static_cast<std::ptrdiff_t>(y.size())) throw DegenerateLabels("training labels have one class");

  ForestModel model;
  model.feature_names = std::move(feature_names);
  model.meta = {cfg.seed, cfg.n_trees, cfg.max_depth};
  model.trees.resize(cfg.n_trees);
  const auto n_candidates =
      std::max<std::size_t>(1, static_cast<std::size_t>(std::floor(std::sqrt(static_cast<double>(x.cols)))));

  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t t = next++; t < cfg.n_trees; t = next++) {
      detail::TreeBuilder b{x, y, cfg, detail::tree_rng(cfg.seed, t), n_candidates, {}};
      std::vector<std::size_t> sample(x.rows);
      std::uniform_int_distribution<std::size_t> draw(0, x.rows - 1);
      for (auto& s : sample) s = draw(b.rng);
      b.build(std::move(sample), 0);
      model.trees[t] = std::move(b.tree);
    }
  };
  const std::size_t hw = std::max(1U, std::thread::hardware_concurrency());
  const std::size_t n_threads = std::min(cfg.threads == 0 ? hw : cfg.threads, cfg.n_trees);
  {
    std::vector<std::jthread> pool;
    for (std::size_t i = 1; i < n_threads; ++i) pool.emplace_back(worker);
    worker();
  }
  return model;
}

inline ForestModel train_forest(std::span<const DatasetRecord> records,
                                std::span<const descriptors::DescriptorId* const> feature_ids,
                                const ForestConfig& cfg = {}) {
  std::vector<std::string> names;
  for (const auto* id : feature_ids) names.push_back(id->canonical_name);
  const auto y = class_labels(records);
  return train_forest(featurize(records, feature_ids), y, std::move(names), cfg);
}

inline constexpr const char* kForestDumpVersion = "attrilens-forest 1";

/// Plain-text dump: a version line, meta, the feature names, then one line
/// per node ("split <feature> <threshold> <left> <right>" or "leaf <p>").
inline std::string forest_to_text(const ForestModel& m) {
  auto num = [](double v) {
    char buf[64];
    const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, ptr);
  };
  std::string out = std::string(kForestDumpVersion) + "\n";
  out += "meta " + std::to_string(m.meta.seed) + " " + std::to_string(m.meta.n_trees) + " " +
         std::to_string(m.meta.max_depth) + "\n";
  out += "features " + std::to_string(m.feature_names.size()) + "\n";
  for (const auto& f : m.feature_names) out += f + "\n";
  out += "trees " + std::to_string(m.trees.size()) + "\n";
  for (const auto& t : m.trees) {
    out += "tree " + std::to_string(t.nodes.size()) + "\n";
    for (const auto& n : t.nodes) {
      if (n.leaf()) {
        out += "leaf " + num(n.p_positive) + "\n";
      } else {
        out += "split " + std::to_string(n.feature) + " " + num(n.threshold) + " " + std::to_string(n.left) + " " +
               std::to_string(n.right) + "\n";
      }
    }
  }
  return out;
}

inline ForestModel forest_from_text(std::string_view content) {
  std::istringstream in{std::string(content)};
  std::string line;
  auto fail = [](const std::string& why) -> void { throw std::invalid_argument("forest dump: " + why); };
  if (!std::getline(in, line) || line != kForestDumpVersion) fail("unsupported version line");
  ForestModel m;
  std::string word;
  std::size_t count = 0;
  if (!(in >> word >> m.meta.seed >> m.meta.n_trees >> m.meta.max_depth) || word != "meta") fail("bad meta line");
  if (!(in >> word >> count) || word != "features") fail("bad features line");
  std::getline(in, line);
  for (std::size_t i = 0; i < count; ++i) {
    if (!std::getline(in, line)) fail("truncated feature list");
    m.feature_names.push_back(line);
  }
  if (!(in >> word >> count) || word != "trees") fail("bad trees line");
  m.trees.resize(count);
  for (auto& t : m.trees) {
    std::size_t n_nodes = 0;
    if (!(in >> word >> n_nodes) || word != "tree") fail("bad tree header");
    t.nodes.resize(n_nodes);
    for (auto& n : t.nodes) {
      if (!(in >> word)) fail("truncated tree");
      std::string a;
      if (word == "leaf") {
        in >> a;
        n.p_positive = std::stod(a);
      } else if (word == "split") {
        in >> n.feature >> a >> n.left >> n.right;
        n.threshold = std::stod(a);
        if (n.feature < 0 || static_cast<std::size_t>(n.feature) >= m.feature_names.size() || n.left >= n_nodes ||
            n.right >= n_nodes) {
          fail("split refers outside the model");
        }
      } else {
        fail("unknown node kind " + word);
      }
      if (!in) fail("bad node line");
    }
  }
  return m;
}

}  // namespace attrilens::mlpipe
