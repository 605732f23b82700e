#pragma once

#include <charconv>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <functional>
#include <limits>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "attrilens/chem/smiles.hpp"
#include "attrilens/core/text.hpp"
#include "attrilens/descriptors/compute.hpp"
#include "attrilens/descriptors/registry.hpp"
#include "attrilens/grpo/grpo.hpp"
#include "attrilens/policysim/policy.hpp"
#include "attrilens/response/corpus.hpp"
#include "attrilens/response/response.hpp"
#include "attrilens/rewards/range_table.hpp"
#include "attrilens/rewards/rewards.hpp"

namespace attrilens::policysim {

using grpo::ConfigError;

struct TrainConfig {
  std::size_t steps = 1000;
  std::size_t group_size = 8;
  double temperature = 0.6;
  double learning_rate = 0.1;
  std::uint64_t seed = 0;
  grpo::Algorithm algorithm = grpo::Algorithm::GRPO;
  rewards::CountBounds count_bounds;
  double kl_beta = 0.04;
  std::size_t max_count = 12;
  std::size_t max_resamples = 3;  // DAPO only
  std::filesystem::path range_table;
  std::filesystem::path dataset;

  void validate() const {
    if (steps < 1) throw ConfigError("steps must be at least 1");
    if (!(temperature > 0.0) || !std::isfinite(temperature)) throw ConfigError("temperature must be positive");
    if (!(learning_rate >= 0.0) || !std::isfinite(learning_rate)) {
      throw ConfigError("learning_rate must be non-negative");
    }
    if (count_bounds.lo > count_bounds.hi) throw ConfigError("count bounds are inverted");
    optim().validate();
  }

  grpo::OptimConfig optim() const {
    grpo::OptimConfig o;
    o.group_size = group_size;
    o.kl_beta = kl_beta;
    o.algorithm = algorithm;
    return o;
  }
};

/// Reads `key = value` lines; '#' starts a comment. Keys are the TrainConfig
/// field names, with count_lo/count_hi for the count bounds.
inline TrainConfig parse_train_config(std::string_view content, TrainConfig base = {}) {
  std::size_t line_no = 0;
  for (const auto& raw : text::split(content, '\n')) {
    ++line_no;
    const std::string uncommented(raw.substr(0, raw.find('#')));
    const auto line = text::trim(uncommented);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    const auto where = "config line " + std::to_string(line_no);
    if (eq == std::string_view::npos) throw ConfigError(where + ": expected key = value");
    const auto key = std::string(text::trim(line.substr(0, eq)));
    const auto value = std::string(text::trim(line.substr(eq + 1)));
    try {
      if (key == "steps") base.steps = std::stoul(value);
      else if (key == "group_size") base.group_size = std::stoul(value);
      else if (key == "temperature") base.temperature = std::stod(value);
      else if (key == "learning_rate") base.learning_rate = std::stod(value);
      else if (key == "seed") base.seed = std::stoull(value);
      else if (key == "algorithm") {
        const auto v = text::lower(value);
        if (v != "grpo" && v != "dapo") throw ConfigError(where + ": algorithm must be grpo or dapo");
        base.algorithm = v == "grpo" ? grpo::Algorithm::GRPO : grpo::Algorithm::DAPO;
      } else if (key == "count_lo") base.count_bounds.lo = std::stoul(value);
      else if (key == "count_hi") base.count_bounds.hi = std::stoul(value);
      else if (key == "kl_beta") base.kl_beta = std::stod(value);
      else if (key == "max_count") base.max_count = std::stoul(value);
      else if (key == "max_resamples") base.max_resamples = std::stoul(value);
      else if (key == "range_table") base.range_table = value;
      else if (key == "dataset") base.dataset = value;
      else throw ConfigError(where + ": unknown key " + key);
    } catch (const std::logic_error& e) {
      if (dynamic_cast<const ConfigError*>(&e) != nullptr) throw;
      throw ConfigError(where + ": bad value for " + key);
    }
  }
  return base;
}

struct SimQuery {
  std::string id;
  response::PromptSpec prompt;
  bool label = false;
  chem::Molecule molecule;
};

/// CSV with header id,smiles,task,target,label. Only classification rows are
/// supported; labels are true/false or 1/0.
inline std::vector<SimQuery> parse_sim_dataset(std::string_view content, const std::string& origin = "<memory>") {
  std::vector<SimQuery> out;
  std::size_t line_no = 0;
  for (const auto& raw : text::split(content, '\n')) {
    ++line_no;
    const auto line = text::trim(raw);
    if (line.empty()) continue;
    const auto where = origin + ":" + std::to_string(line_no);
    const auto f = text::split(line, ',');
    if (line_no == 1) {
      if (f.size() != 5 || f[0] != "id" || f[1] != "smiles" || f[2] != "task" || f[3] != "target" || f[4] != "label") {
        throw std::invalid_argument(where + ": expected header id,smiles,task,target,label");
      }
      continue;
    }
    if (f.size() != 5) throw std::invalid_argument(where + ": expected 5 columns");
    SimQuery q;
    q.id = std::string(text::trim(f[0]));
    q.prompt.smiles = std::string(text::trim(f[1]));
    q.prompt.task = response::parse_task_kind(text::trim(f[2]));
    if (q.prompt.task != response::TaskKind::Classification) {
      throw std::invalid_argument(where + ": only classification rows are supported");
    }
    q.prompt.target_property = std::string(text::trim(f[3]));
    const auto label = text::lower(text::trim(f[4]));
    if (label == "true" || label == "1") q.label = true;
    else if (label == "false" || label == "0") q.label = false;
    else throw std::invalid_argument(where + ": label must be true/false");
    try {
      q.molecule = chem::parse_smiles(q.prompt.smiles);
    } catch (const chem::SmilesError& e) {
      throw std::invalid_argument(where + ": " + e.what());
    }
    out.push_back(std::move(q));
  }
  if (out.empty()) throw std::invalid_argument(origin + ": dataset has no rows");
  return out;
}

inline std::vector<SimQuery> load_sim_dataset(const std::filesystem::path& path) {
  return parse_sim_dataset(text::read_file(path), path.string());
}

inline std::filesystem::path bundled_sim_dataset() { return data_dir() / "sim" / "toy_bbbp.csv"; }

/// Canonical names of every descriptor with a calculator, in registry order.
inline std::vector<std::string> implemented_vocabulary(const descriptors::Registry& registry) {
  std::vector<std::string> out;
  for (const auto& e : registry.entries()) {
    if (e.implemented && descriptors::has_calculator(e.canonical_name)) out.push_back(e.canonical_name);
  }
  return out;
}

/// One group of responses to one query, in action space and as a GRPO group.
struct SampledGroup {
  std::size_t query = 0;
  std::vector<Action> actions;
  grpo::TrajectoryGroup group;
};

/// Mean clipped objective over groups, with logp_new evaluated at `params`.
inline double batch_objective(const PolicyParams& params, std::span<const SampledGroup> batch,
                              const grpo::OptimConfig& cfg, double temperature) {
  if (batch.empty()) return 0.0;
  double sum = 0.0;
  for (const auto& g : batch) {
    std::vector<double> lp;
    for (const auto& a : g.actions) lp.push_back(log_prob(params, a, g.query, temperature));
    sum += grpo::grpo_objective(g.group, lp, cfg);
  }
  return sum / static_cast<double>(batch.size());
}

/// Gradient of batch_objective with respect to every policy logit.
inline PolicyParams batch_gradient(const PolicyParams& params, std::span<const SampledGroup> batch,
                                   const grpo::OptimConfig& cfg, double temperature) {
  auto grad = PolicyParams::zeros(params.shape());
  if (batch.empty()) return grad;
  const double inv = 1.0 / static_cast<double>(batch.size());
  for (const auto& g : batch) {
    std::vector<double> lp;
    for (const auto& a : g.actions) lp.push_back(log_prob(params, a, g.query, temperature));
    const auto d = grpo::grpo_objective_gradient(g.group, lp, cfg);
    for (std::size_t i = 0; i < g.actions.size(); ++i) {
      accumulate_log_prob_gradient(params, g.actions[i], g.query, temperature, d[i] * inv, grad);
    }
  }
  return grad;
}

struct StepStats {
  std::size_t step = 0;
  double format = 0.0;
  double correct = 0.0;
  double count = 0.0;
  double rational = 0.0;
  double total = 0.0;
  double objective = 0.0;

  bool operator==(const StepStats&) const = default;
};

struct TrainingCurves {
  grpo::Algorithm algorithm = grpo::Algorithm::GRPO;
  std::vector<StepStats> rows;

  std::vector<double> column(double StepStats::*field) const {
    std::vector<double> out;
    out.reserve(rows.size());
    for (const auto& r : rows) out.push_back(r.*field);
    return out;
  }
};

/// Scores one parsed response for one query. The default is the full reward
/// stack; tests substitute their own.
using ScoreFn = std::function<rewards::RewardBreakdown(const response::ParsedResponse&, std::size_t query)>;

/// Holds references to `table` and `registry`; both must outlive it.
class Simulator {
 public:
  Simulator(TrainConfig config, std::vector<SimQuery> dataset, const rewards::RangeTable& table,
            const descriptors::Registry& registry = descriptors::Registry::bundled())
      : config_(std::move(config)), dataset_(std::move(dataset)) {
    config_.validate();
    if (dataset_.empty()) throw std::invalid_argument("simulator dataset is empty");
    for (const auto& q : dataset_) {
      if (!table.has_target(q.prompt.target_property)) throw rewards::TableMissing(q.prompt.target_property);
    }
    for (const auto& q : dataset_) profiles_.emplace_back(q.molecule);
    policy_.vocabulary = implemented_vocabulary(registry);
    policy_.temperature = config_.temperature;
    policy_.params = PolicyParams::zeros({policy_.vocabulary.size(), config_.max_count, dataset_.size()});
    reference_ = policy_.params;
    score_ = [this, &table, &registry](const response::ParsedResponse& parsed, std::size_t query) {
      const auto& q = dataset_[query];
      return rewards::total_reward(parsed, profiles_[query], response::Answer{q.label}, q.prompt.target_property,
                                   table, config_.count_bounds, registry);
    };
  }

  Simulator(const Simulator&) = delete;
  Simulator& operator=(const Simulator&) = delete;

  void set_score(ScoreFn fn) { score_ = std::move(fn); }

  const ToyPolicy& policy() const { return policy_; }
  const TrainConfig& config() const { return config_; }
  std::size_t steps_done() const { return step_; }

  /// One optimisation step over every query; returns the step's statistics.
  StepStats step() {
    ++step_;
    const auto cfg = config_.optim();
    StepStats stats;
    stats.step = step_;
    std::vector<SampledGroup> batch;
    double n_scored = 0.0;
    for (std::size_t q = 0; q < dataset_.size(); ++q) {
      auto group = sample_group(q, 0, stats);
      n_scored += static_cast<double>(config_.group_size);
      if (cfg.algorithm == grpo::Algorithm::DAPO) {
        for (std::size_t attempt = 1; degenerate(group) && attempt <= config_.max_resamples; ++attempt) {
          StepStats ignored;
          group = sample_group(q, attempt, ignored);
        }
        if (degenerate(group)) continue;
      }
      batch.push_back(std::move(group));
    }
    for (double StepStats::*f : {&StepStats::format, &StepStats::correct, &StepStats::count, &StepStats::rational,
                                 &StepStats::total}) {
      stats.*f /= n_scored;
    }
    stats.objective = batch_objective(policy_.params, batch, cfg, config_.temperature);
    if (config_.learning_rate > 0.0 && !batch.empty()) {
      const auto grad = batch_gradient(policy_.params, batch, cfg, config_.temperature);
      policy_.params.axpy(config_.learning_rate, grad);
      if (!policy_.params.all_finite()) throw std::logic_error("policy parameters became non-finite");
    }
    return stats;
  }

  /// `per_query` responses per query from the current policy, as corpus
  /// records. Uses its own RNG streams, so training is unaffected.
  std::vector<response::CorpusRecord> sample_corpus(std::size_t per_query) const {
    std::vector<response::CorpusRecord> out;
    for (std::size_t q = 0; q < dataset_.size(); ++q) {
      auto rng = group_rng(q, std::numeric_limits<std::uint32_t>::max());
      for (std::size_t i = 0; i < per_query; ++i) {
        const auto& query = dataset_[q];
        response::CorpusRecord r;
        r.id = query.id + "-" + std::to_string(i + 1);
        r.smiles = query.prompt.smiles;
        r.task = query.prompt.task;
        r.target = query.prompt.target_property;
        r.response_text = sample_response(policy_, q, query.prompt, rng).text;
        r.label = response::Answer{query.label};
        r.extra = {{"step", step_}};
        out.push_back(std::move(r));
      }
    }
    return out;
  }

  TrainingCurves run() {
    TrainingCurves curves;
    curves.algorithm = config_.algorithm;
    while (step_ < config_.steps) curves.rows.push_back(step());
    return curves;
  }

 private:
  Rng group_rng(std::size_t query, std::size_t attempt) const {
    std::seed_seq seq{static_cast<std::uint32_t>(config_.seed), static_cast<std::uint32_t>(config_.seed >> 32),
                      static_cast<std::uint32_t>(step_), static_cast<std::uint32_t>(query),
                      static_cast<std::uint32_t>(attempt)};
    return Rng(seq);
  }

  bool degenerate(const SampledGroup& g) const {
    return grpo::reward_std(g.group.rewards()) < config_.optim().degenerate_eps;
  }

  SampledGroup sample_group(std::size_t q, std::size_t attempt, StepStats& stats) {
    auto rng = group_rng(q, attempt);
    SampledGroup g;
    g.query = q;
    g.group.query_id = dataset_[q].id;
    for (std::size_t i = 0; i < config_.group_size; ++i) {
      auto s = sample_response(policy_, q, dataset_[q].prompt, rng);
      const auto parsed = response::parse_response(s.text, dataset_[q].prompt.task);
      const auto b = score_(parsed, q);
      stats.format += b.format;
      stats.correct += b.correct;
      stats.count += b.count;
      stats.rational += b.rational;
      stats.total += b.total;
      const double lp_ref = log_prob(reference_, s.action, q, config_.temperature);
      g.group.responses.push_back({std::move(s.text), b.total, s.logp, lp_ref});
      g.actions.push_back(std::move(s.action));
    }
    grpo::fill_advantages(g.group, config_.optim());
    return g;
  }

  TrainConfig config_;
  std::vector<SimQuery> dataset_;
  std::vector<descriptors::DescriptorProfile> profiles_;
  ToyPolicy policy_;
  PolicyParams reference_;
  ScoreFn score_;
  std::size_t step_ = 0;
};

inline TrainingCurves train(const TrainConfig& config, std::vector<SimQuery> dataset, const rewards::RangeTable& table,
                            const descriptors::Registry& registry = descriptors::Registry::bundled()) {
  return Simulator(config, std::move(dataset), table, registry).run();
}

inline constexpr const char* kCurvesHeader = "step,format,correct,count,rational,total,objective";

inline std::string format_double(double v) {
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, ptr);
}

inline std::string curves_csv(const TrainingCurves& curves) {
  std::string out = std::string(kCurvesHeader) + "\n";
  for (const auto& r : curves.rows) {
    out += std::to_string(r.step);
    for (double v : {r.format, r.correct, r.count, r.rational, r.total, r.objective}) out += "," + format_double(v);
    out += "\n";
  }
  return out;
}

inline void export_curves(const TrainingCurves& curves, const std::filesystem::path& path) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot open " + path.string() + " for writing");
  f << curves_csv(curves);
  if (!f.flush()) throw std::runtime_error("failed writing " + path.string());
}

inline TrainingCurves parse_curves(std::string_view content, const std::string& origin = "<memory>") {
  TrainingCurves curves;
  std::size_t line_no = 0;
  for (const auto& raw : text::split(content, '\n')) {
    ++line_no;
    const auto line = text::trim(raw);
    if (line.empty()) continue;
    if (line_no == 1) {
      if (line != kCurvesHeader) throw std::invalid_argument(origin + ": unexpected curves header");
      continue;
    }
    const auto f = text::split(line, ',');
    if (f.size() != 7) throw std::invalid_argument(origin + ":" + std::to_string(line_no) + ": expected 7 columns");
    StepStats s;
    s.step = std::stoul(std::string(f[0]));
    double* fields[] = {&s.format, &s.correct, &s.count, &s.rational, &s.total, &s.objective};
    for (std::size_t i = 0; i < 6; ++i) {
      const auto& cell = f[i + 1];
      const auto [ptr, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), *fields[i]);
      if (ec != std::errc{} || ptr != cell.data() + cell.size()) {
        throw std::invalid_argument(origin + ":" + std::to_string(line_no) + ": bad number " + std::string(cell));
      }
    }
    curves.rows.push_back(s);
  }
  return curves;
}

inline TrainingCurves read_curves(const std::filesystem::path& path) {
  return parse_curves(text::read_file(path), path.string());
}

/// Trailing moving average; entry i averages series[i - window + 1 .. i].
/// The first window - 1 entries are dropped.
inline std::vector<double> moving_average(std::span<const double> series, std::size_t window) {
  std::vector<double> out;
  if (window == 0 || series.size() < window) return out;
  double sum = 0.0;
  for (std::size_t i = 0; i < series.size(); ++i) {
    sum += series[i];
    if (i >= window) sum -= series[i - window];
    if (i + 1 >= window) out.push_back(sum / static_cast<double>(window));
  }
  return out;
}

/// First step (1-based) at which the moving average has covered `fraction`
/// of the way from its first value to its last. Returns 1 for a curve that
/// never moves.
inline std::size_t steps_to_fraction(std::span<const double> series, double fraction, std::size_t window) {
  const auto ma = moving_average(series, window);
  if (ma.empty()) return series.size();
  const double start = ma.front();
  const double span = ma.back() - start;
  if (span == 0.0) return 1;
  for (std::size_t i = 0; i < ma.size(); ++i) {
    if ((ma[i] - start) / span >= fraction) return i + window;
  }
  return series.size();
}

}  // namespace attrilens::policysim
