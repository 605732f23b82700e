#pragma once

#include <algorithm>
#include <random>
#include <span>
#include <vector>

#include "attrilens/mlpipe/dataset.hpp"
#include "attrilens/mlpipe/forest.hpp"
#include "attrilens/mlpipe/metrics.hpp"

namespace attrilens::mlpipe {

struct DtreeReport {
  Split split;
  ForestModel model;
  double test_auc = 0.0;
  std::vector<double> null_aucs;  // one per label permutation

  double null_mean() const {
    if (null_aucs.empty()) return 0.0;
    double s = 0.0;
    for (double v : null_aucs) s += v;
    return s / static_cast<double>(null_aucs.size());
  }
};

/// Scaffold split, forest on the train part, AUC on the test part. Each null
/// repeat permutes all labels with its own seed and reruns the same protocol.
inline DtreeReport run_dtree(std::span<const DatasetRecord> records,
                             std::span<const descriptors::DescriptorId* const> feature_ids, const ForestConfig& cfg,
                             std::size_t null_repeats = 0) {
  if (feature_ids.empty()) throw std::invalid_argument("no features selected");
  DtreeReport rep;
  rep.split = scaffold_split(records);
  if (rep.split.test.empty()) throw EmptyDataset("scaffold test split is empty");
  const auto x = featurize(records, feature_ids);
  const auto y = class_labels(records);
  std::vector<std::string> names;
  for (const auto* id : feature_ids) names.push_back(id->canonical_name);
  const auto x_train = x.subset(rep.split.train);
  const auto x_test = x.subset(rep.split.test);
  auto fit_and_score = [&](const std::vector<int>& labels) {
    std::vector<int> y_train, y_test;
    for (auto i : rep.split.train) y_train.push_back(labels[i]);
    for (auto i : rep.split.test) y_test.push_back(labels[i]);
    auto model = train_forest(x_train, y_train, names, cfg);
    const double auc = eval_auc(model, x_test, y_test);
    return std::pair{std::move(model), auc};
  };
  auto [model, auc] = fit_and_score(y);
  rep.model = std::move(model);
  rep.test_auc = auc;
  for (std::size_t r = 0; r < null_repeats; ++r) {
    auto shuffled = y;
    std::mt19937_64 rng(cfg.seed + 1000 + r);
    std::shuffle(shuffled.begin(), shuffled.end(), rng);
    rep.null_aucs.push_back(fit_and_score(shuffled).second);
  }
  return rep;
}

}  // namespace attrilens::mlpipe
