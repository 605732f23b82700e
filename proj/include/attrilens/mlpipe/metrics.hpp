#pragma once

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <optional>
#include <random>
#include <span>
#include <vector>

#include "attrilens/descriptors/compute.hpp"
#include "attrilens/descriptors/registry.hpp"
#include "attrilens/mlpipe/dataset.hpp"
#include "attrilens/mlpipe/forest.hpp"
#include "attrilens/response/response.hpp"

namespace attrilens::mlpipe {

/// Rank-based AUC (Mann-Whitney U over n_pos * n_neg), ties given mid-ranks.
inline double eval_auc(std::span<const double> scores, std::span<const int> labels) {
  if (scores.size() != labels.size()) throw LengthMismatch(scores.size(), labels.size());
  std::vector<std::size_t> order(scores.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(), [&](auto a, auto b) { return scores[a] < scores[b]; });
  double rank_sum = 0.0;
  std::size_t n_pos = 0;
  for (std::size_t i = 0; i < order.size();) {
    std::size_t j = i;
    while (j < order.size() && scores[order[j]] == scores[order[i]]) ++j;
    const double mid_rank = (static_cast<double>(i + 1) + static_cast<double>(j)) / 2.0;
    for (std::size_t k = i; k < j; ++k) {
      if (labels[order[k]] == 1) {
        rank_sum += mid_rank;
        ++n_pos;
      }
    }
    i = j;
  }
  const std::size_t n_neg = labels.size() - n_pos;
  if (n_pos == 0 || n_neg == 0) throw DegenerateLabels("AUC needs both classes");
  const double np = static_cast<double>(n_pos);
  return (rank_sum - np * (np + 1.0) / 2.0) / (np * static_cast<double>(n_neg));
}

inline double eval_auc(const ForestModel& model, const FeatureMatrix& x, std::span<const int> labels) {
  return eval_auc(model.predict_proba(x), labels);
}

inline double eval_auc(const ForestModel& model, std::span<const DatasetRecord> records,
                       const descriptors::Registry& registry = descriptors::Registry::bundled()) {
  std::vector<const descriptors::DescriptorId*> ids;
  for (const auto& name : model.feature_names) {
    const auto* id = registry.find(name);
    if (id == nullptr) throw descriptors::RegistryError("model feature not in registry: " + name);
    ids.push_back(id);
  }
  return eval_auc(model, featurize(records, ids), class_labels(records));
}

struct PredictionMetrics {
  std::size_t n = 0;
  std::optional<double> accuracy;  // percent, classification
  std::optional<double> rmse;      // regression, over answered records
  double coverage = 0.0;           // fraction of records with a usable answer
};

/// Classification: accuracy in percent, absent answers counted wrong.
/// Regression: RMSE over records with a numeric answer, plus coverage.
inline PredictionMetrics eval_predictions(std::span<const std::optional<response::Answer>> answers,
                                          std::span<const response::Answer> labels, response::TaskKind task) {
  if (answers.size() != labels.size()) throw LengthMismatch(answers.size(), labels.size());
  PredictionMetrics m;
  m.n = labels.size();
  if (m.n == 0) throw EmptyDataset("no predictions to evaluate");
  std::size_t usable = 0;
  if (task == response::TaskKind::Classification) {
    std::size_t right = 0;
    for (std::size_t i = 0; i < m.n; ++i) {
      const auto* a = answers[i] ? std::get_if<bool>(&*answers[i]) : nullptr;
      if (a == nullptr) continue;
      ++usable;
      if (*a == std::get<bool>(labels[i])) ++right;
    }
    m.accuracy = 100.0 * static_cast<double>(right) / static_cast<double>(m.n);
  } else {
    double ss = 0.0;
    for (std::size_t i = 0; i < m.n; ++i) {
      const auto* a = answers[i] ? std::get_if<double>(&*answers[i]) : nullptr;
      if (a == nullptr) continue;
      ++usable;
      const double d = *a - std::get<double>(labels[i]);
      ss += d * d;
    }
    if (usable > 0) m.rmse = std::sqrt(ss / static_cast<double>(usable));
  }
  m.coverage = static_cast<double>(usable) / static_cast<double>(m.n);
  return m;
}

/// Most frequently claimed implemented descriptors, by count descending and
/// canonical name ascending.
inline std::vector<const descriptors::DescriptorId*> top_attributes(
    std::span<const response::ParsedResponse> corpus, std::size_t k = 10,
    const descriptors::Registry& registry = descriptors::Registry::bundled()) {
  std::map<const descriptors::DescriptorId*, std::size_t> counts;
  for (const auto& r : corpus) {
    if (!r.claims) continue;
    for (const auto& c : *r.claims) {
      const auto* id = registry.resolve(c.raw_name);
      if (id != nullptr && id->implemented && descriptors::has_calculator(id->canonical_name)) ++counts[id];
    }
  }
  std::vector<std::pair<const descriptors::DescriptorId*, std::size_t>> ranked(counts.begin(), counts.end());
  std::sort(ranked.begin(), ranked.end(), [](const auto& a, const auto& b) {
    return a.second != b.second ? a.second > b.second : a.first->canonical_name < b.first->canonical_name;
  });
  std::vector<const descriptors::DescriptorId*> out;
  for (std::size_t i = 0; i < ranked.size() && i < k; ++i) out.push_back(ranked[i].first);
  return out;
}

/// Pooled out-of-fold AUC of a k-fold cross-validation. Rows are shuffled
/// into folds with `seed`.
inline double cross_val_auc(const FeatureMatrix& x, std::span<const int> y, const std::vector<std::string>& names,
                            std::size_t folds, const ForestConfig& cfg, std::uint64_t seed) {
  if (x.rows != y.size()) throw LengthMismatch(x.rows, y.size());
  if (folds < 2 || folds > x.rows) throw std::invalid_argument("fold count out of range");
  std::vector<std::size_t> order(x.rows);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::mt19937_64 rng(seed);
  std::shuffle(order.begin(), order.end(), rng);
  std::vector<double> scores(x.rows, 0.0);
  for (std::size_t f = 0; f < folds; ++f) {
    std::vector<std::size_t> train, held;
    for (std::size_t i = 0; i < order.size(); ++i) (i % folds == f ? held : train).push_back(order[i]);
    std::vector<int> y_train;
    for (auto i : train) y_train.push_back(y[i]);
    const auto model = train_forest(x.subset(train), y_train, names, cfg);
    for (auto i : held) scores[i] = model.predict_proba(x.row(i));
  }
  return eval_auc(scores, y);
}

}  // namespace attrilens::mlpipe
