#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <random>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "attrilens/response/response.hpp"

namespace attrilens::policysim {

using Rng = std::mt19937_64;

/// Uniform double in [0, 1) from the top 53 bits, identical on every platform.
inline double uniform01(Rng& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

/// Sizes of the parameter blocks.
struct PolicyShape {
  std::size_t n_attrs = 0;
  std::size_t max_count = 12;
  std::size_t n_queries = 0;

  void validate() const {
    if (n_attrs == 0) throw std::invalid_argument("policy needs a non-empty attribute vocabulary");
    if (max_count > n_attrs) throw std::invalid_argument("max_count exceeds the attribute vocabulary");
    if (n_queries == 0) throw std::invalid_argument("policy needs at least one query");
  }

  std::size_t size() const { return 1 + (max_count + 1) + 2 * n_attrs + n_queries; }
};

/// Logits of the factorized response policy. The same layout doubles as a
/// gradient container.
struct PolicyParams {
  double logit_format = 0.0;
  std::vector<double> logits_count;     // one per count 0..max_count
  std::vector<double> logits_attr;      // one per vocabulary entry
  std::vector<double> logits_polarity;  // > 0 favours "promotes"
  std::vector<double> logits_answer;    // per query, > 0 favours true

  static PolicyParams zeros(const PolicyShape& shape) {
    shape.validate();
    PolicyParams p;
    p.logits_count.assign(shape.max_count + 1, 0.0);
    p.logits_attr.assign(shape.n_attrs, 0.0);
    p.logits_polarity.assign(shape.n_attrs, 0.0);
    p.logits_answer.assign(shape.n_queries, 0.0);
    return p;
  }

  PolicyShape shape() const { return {logits_attr.size(), logits_count.size() - 1, logits_answer.size()}; }

  std::vector<double> flatten() const {
    std::vector<double> out;
    out.reserve(shape().size());
    out.push_back(logit_format);
    for (const auto* block : {&logits_count, &logits_attr, &logits_polarity, &logits_answer}) {
      out.insert(out.end(), block->begin(), block->end());
    }
    return out;
  }

  static PolicyParams unflatten(std::span<const double> flat, const PolicyShape& shape) {
    if (flat.size() != shape.size()) throw std::invalid_argument("flat parameter vector has the wrong length");
    auto p = zeros(shape);
    std::size_t k = 0;
    p.logit_format = flat[k++];
    for (auto* block : {&p.logits_count, &p.logits_attr, &p.logits_polarity, &p.logits_answer}) {
      for (auto& v : *block) v = flat[k++];
    }
    return p;
  }

  /// this += scale * other
  void axpy(double scale, const PolicyParams& other) {
    logit_format += scale * other.logit_format;
    auto add = [scale](std::vector<double>& a, const std::vector<double>& b) {
      for (std::size_t i = 0; i < a.size(); ++i) a[i] += scale * b[i];
    };
    add(logits_count, other.logits_count);
    add(logits_attr, other.logits_attr);
    add(logits_polarity, other.logits_polarity);
    add(logits_answer, other.logits_answer);
  }

  bool all_finite() const {
    const auto flat = flatten();
    return std::all_of(flat.begin(), flat.end(), [](double v) { return std::isfinite(v); });
  }

  bool operator==(const PolicyParams&) const = default;
};

/// One sampled response in action space. Every factor is sampled even when
/// the rendering later drops it, so the log-probability has a fixed form.
struct Action {
  bool well_formed = true;
  int omitted_pair = -1;  // 0 think, 1 name, 2 answer; -1 when well formed
  std::vector<std::size_t> attrs;
  std::vector<bool> promotes;  // parallel to attrs
  bool answer = false;

  std::size_t count() const { return attrs.size(); }
  bool operator==(const Action&) const = default;
};

inline constexpr int kTagPairs = 3;

namespace detail {

inline double log_sigmoid(double z) { return z >= 0 ? -std::log1p(std::exp(-z)) : z - std::log1p(std::exp(z)); }

inline double sigmoid(double z) {
  if (z >= 0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

inline double log_bernoulli(double logit, bool y, double t) { return log_sigmoid(y ? logit / t : -logit / t); }

inline double d_log_bernoulli(double logit, bool y, double t) { return ((y ? 1.0 : 0.0) - sigmoid(logit / t)) / t; }

/// Softmax over logits[i] / t for i in `subset`.
inline std::vector<double> softmax(std::span<const double> logits, std::span<const std::size_t> subset, double t) {
  double hi = -INFINITY;
  for (auto i : subset) hi = std::max(hi, logits[i] / t);
  std::vector<double> p(subset.size());
  double z = 0.0;
  for (std::size_t k = 0; k < subset.size(); ++k) z += p[k] = std::exp(logits[subset[k]] / t - hi);
  for (auto& v : p) v /= z;
  return p;
}

inline std::size_t draw(std::span<const double> probs, Rng& rng) {
  const double u = uniform01(rng);
  double acc = 0.0;
  for (std::size_t k = 0; k < probs.size(); ++k) {
    acc += probs[k];
    if (u < acc) return k;
  }
  return probs.size() - 1;
}

inline std::vector<std::size_t> iota(std::size_t n) {
  std::vector<std::size_t> v(n);
  std::iota(v.begin(), v.end(), std::size_t{0});
  return v;
}

}  // namespace detail

inline Action sample_action(const PolicyParams& p, std::size_t query, double temperature, Rng& rng) {
  Action a;
  a.well_formed = uniform01(rng) < detail::sigmoid(p.logit_format / temperature);
  if (!a.well_formed) a.omitted_pair = static_cast<int>(rng() % kTagPairs);
  const auto counts = detail::iota(p.logits_count.size());
  const auto k = detail::draw(detail::softmax(p.logits_count, counts, temperature), rng);
  auto remaining = detail::iota(p.logits_attr.size());
  for (std::size_t j = 0; j < k; ++j) {
    const auto pick = detail::draw(detail::softmax(p.logits_attr, remaining, temperature), rng);
    a.attrs.push_back(remaining[pick]);
    remaining.erase(remaining.begin() + static_cast<std::ptrdiff_t>(pick));
  }
  for (auto attr : a.attrs) {
    a.promotes.push_back(uniform01(rng) < detail::sigmoid(p.logits_polarity[attr] / temperature));
  }
  a.answer = uniform01(rng) < detail::sigmoid(p.logits_answer.at(query) / temperature);
  return a;
}

/// Exact log-probability of `a` under the policy at `temperature`.
inline double log_prob(const PolicyParams& p, const Action& a, std::size_t query, double temperature) {
  const double t = temperature;
  double lp = detail::log_bernoulli(p.logit_format, a.well_formed, t);
  if (!a.well_formed) lp -= std::log(static_cast<double>(kTagPairs));
  const auto counts = detail::iota(p.logits_count.size());
  lp += std::log(detail::softmax(p.logits_count, counts, t).at(a.count()));
  auto remaining = detail::iota(p.logits_attr.size());
  for (auto attr : a.attrs) {
    const auto probs = detail::softmax(p.logits_attr, remaining, t);
    const auto pos = std::find(remaining.begin(), remaining.end(), attr);
    lp += std::log(probs[static_cast<std::size_t>(pos - remaining.begin())]);
    remaining.erase(pos);
  }
  for (std::size_t j = 0; j < a.attrs.size(); ++j) {
    lp += detail::log_bernoulli(p.logits_polarity[a.attrs[j]], a.promotes[j], t);
  }
  lp += detail::log_bernoulli(p.logits_answer.at(query), a.answer, t);
  return lp;
}

/// d log_prob / d params, accumulated into `grad` scaled by `scale`.
inline void accumulate_log_prob_gradient(const PolicyParams& p, const Action& a, std::size_t query,
                                         double temperature, double scale, PolicyParams& grad) {
  const double t = temperature;
  grad.logit_format += scale * detail::d_log_bernoulli(p.logit_format, a.well_formed, t);
  const auto counts = detail::iota(p.logits_count.size());
  const auto pc = detail::softmax(p.logits_count, counts, t);
  for (std::size_t c = 0; c < pc.size(); ++c) {
    grad.logits_count[c] += scale * ((c == a.count() ? 1.0 : 0.0) - pc[c]) / t;
  }
  auto remaining = detail::iota(p.logits_attr.size());
  for (auto attr : a.attrs) {
    const auto probs = detail::softmax(p.logits_attr, remaining, t);
    for (std::size_t r = 0; r < remaining.size(); ++r) {
      grad.logits_attr[remaining[r]] += scale * ((remaining[r] == attr ? 1.0 : 0.0) - probs[r]) / t;
    }
    remaining.erase(std::find(remaining.begin(), remaining.end(), attr));
  }
  for (std::size_t j = 0; j < a.attrs.size(); ++j) {
    grad.logits_polarity[a.attrs[j]] += scale * detail::d_log_bernoulli(p.logits_polarity[a.attrs[j]], a.promotes[j], t);
  }
  grad.logits_answer.at(query) += scale * detail::d_log_bernoulli(p.logits_answer.at(query), a.answer, t);
}

/// Text of a sampled action. A malformed action drops one tag pair.
inline std::string render_action(const Action& a, std::span<const std::string> vocabulary,
                                 const response::PromptSpec& prompt) {
  response::ResponseParts parts;
  parts.think = "Weighing " + std::to_string(a.count()) + " descriptors of " + prompt.smiles + " against " +
                prompt.target_property + ".";
  std::vector<response::AttributeClaim> claims;
  for (std::size_t j = 0; j < a.attrs.size(); ++j) {
    claims.push_back({vocabulary[a.attrs[j]],
                      a.promotes[j] ? response::Polarity::Promotes : response::Polarity::Inhibits});
  }
  parts.claims = std::move(claims);
  parts.answer = response::Answer{a.answer};
  switch (a.omitted_pair) {
    case 0: parts.think.reset(); break;
    case 1: parts.claims.reset(); break;
    case 2: parts.answer.reset(); break;
    default: break;
  }
  return response::render_response(parts);
}

/// Policy plus the vocabulary its attribute logits index into.
struct ToyPolicy {
  PolicyParams params;
  std::vector<std::string> vocabulary;
  double temperature = 0.6;
};

struct SampledResponse {
  std::string text;
  double logp = 0.0;
  Action action;
};

inline SampledResponse sample_response(const ToyPolicy& policy, std::size_t query, const response::PromptSpec& prompt,
                                       Rng& rng) {
  SampledResponse out;
  out.action = sample_action(policy.params, query, policy.temperature, rng);
  out.logp = log_prob(policy.params, out.action, query, policy.temperature);
  out.text = render_action(out.action, policy.vocabulary, prompt);
  return out;
}

}  // namespace attrilens::policysim
