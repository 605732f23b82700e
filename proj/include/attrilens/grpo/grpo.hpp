#pragma once

#include <algorithm>
#include <cmath>
#include <numeric>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace attrilens::grpo {

enum class Algorithm { GRPO, DAPO };

inline std::string to_string(Algorithm a) { return a == Algorithm::GRPO ? "grpo" : "dapo"; }

enum class StdKind { Population, Sample };

class GroupTooSmall : public std::invalid_argument {
 public:
  explicit GroupTooSmall(std::size_t g)
      : std::invalid_argument("group of size " + std::to_string(g) + " is too small; need at least 2") {}
};

class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Optimisation hyperparameters. GRPO uses the symmetric clip_eps and
/// kl_beta; DAPO uses [1 - clip_eps_low, 1 + clip_eps_high] and no KL term.
/// clip_eps = 0.2 and kl_beta = 0.04 are assumed defaults.
struct OptimConfig {
  std::size_t group_size = 8;
  double clip_eps = 0.2;
  double clip_eps_low = 0.2;
  double clip_eps_high = 0.28;
  double kl_beta = 0.04;
  Algorithm algorithm = Algorithm::GRPO;
  double degenerate_eps = 1e-8;
  StdKind std_kind = StdKind::Population;

  void validate() const {
    auto in_unit = [](double v) { return v > 0.0 && v < 1.0; };
    if (group_size < 2) throw ConfigError("group_size must be at least 2");
    if (!in_unit(clip_eps) || !in_unit(clip_eps_low) || !in_unit(clip_eps_high)) {
      throw ConfigError("clip parameters must lie in (0, 1)");
    }
    if (kl_beta < 0.0) throw ConfigError("kl_beta must be non-negative");
    if (degenerate_eps < 0.0) throw ConfigError("degenerate_eps must be non-negative");
  }

  double clip_low() const { return algorithm == Algorithm::DAPO ? 1.0 - clip_eps_low : 1.0 - clip_eps; }
  double clip_high() const { return algorithm == Algorithm::DAPO ? 1.0 + clip_eps_high : 1.0 + clip_eps; }
  double beta() const { return algorithm == Algorithm::DAPO ? 0.0 : kl_beta; }
};

inline double reward_std(std::span<const double> rewards, StdKind kind = StdKind::Population) {
  const auto n = static_cast<double>(rewards.size());
  const double mean = std::accumulate(rewards.begin(), rewards.end(), 0.0) / n;
  double ss = 0.0;
  for (double r : rewards) ss += (r - mean) * (r - mean);
  return std::sqrt(ss / (kind == StdKind::Population ? n : n - 1.0));
}

/// Group-normalised advantages (r_i - mean) / std. A group whose std falls
/// below degenerate_eps gets all-zero advantages.
inline std::vector<double> compute_advantages(std::span<const double> rewards, double degenerate_eps = 1e-8,
                                              StdKind kind = StdKind::Population) {
  if (rewards.size() < 2) throw GroupTooSmall(rewards.size());
  const double mean = std::accumulate(rewards.begin(), rewards.end(), 0.0) / static_cast<double>(rewards.size());
  const double sd = reward_std(rewards, kind);
  std::vector<double> out(rewards.size(), 0.0);
  if (sd < degenerate_eps) return out;
  for (std::size_t i = 0; i < rewards.size(); ++i) out[i] = (rewards[i] - mean) / sd;
  return out;
}

/// exp overflows a double beyond roughly this log-ratio.
inline constexpr double kMaxLogRatio = 700.0;

/// k3 estimator u - log u - 1 with u = pi_ref / pi_theta.
inline double kl_estimate(double logp_theta, double logp_ref) {
  const double d = logp_ref - logp_theta;
  if (!std::isfinite(d) || std::abs(d) > kMaxLogRatio) {
    throw std::domain_error("log-probability gap outside the supported range");
  }
  return std::exp(d) - d - 1.0;
}

/// d kl_estimate / d logp_theta.
inline double kl_gradient(double logp_theta, double logp_ref) {
  const double d = logp_ref - logp_theta;
  if (!std::isfinite(d) || std::abs(d) > kMaxLogRatio) {
    throw std::domain_error("log-probability gap outside the supported range");
  }
  return 1.0 - std::exp(d);
}

struct ResponseRecord {
  std::string text;
  double reward_total = 0.0;
  double logp_old = 0.0;
  double logp_ref = 0.0;
};

struct TrajectoryGroup {
  std::string query_id;
  std::vector<ResponseRecord> responses;
  std::vector<double> advantages;

  std::vector<double> rewards() const {
    std::vector<double> r;
    r.reserve(responses.size());
    for (const auto& x : responses) r.push_back(x.reward_total);
    return r;
  }
};

inline void fill_advantages(TrajectoryGroup& g, const OptimConfig& cfg) {
  const auto r = g.rewards();
  g.advantages = compute_advantages(r, cfg.degenerate_eps, cfg.std_kind);
}

namespace detail {

inline void check_shapes(const TrajectoryGroup& g, std::span<const double> logp_new) {
  if (g.advantages.size() != g.responses.size()) throw std::invalid_argument("advantages not computed for group");
  if (logp_new.size() != g.responses.size()) throw std::invalid_argument("logp_new size differs from group size");
}

}  // namespace detail

/// Clipped surrogate with KL penalty, averaged over the group.
inline double grpo_objective(const TrajectoryGroup& g, std::span<const double> logp_new, const OptimConfig& cfg) {
  detail::check_shapes(g, logp_new);
  const double lo = cfg.clip_low();
  const double hi = cfg.clip_high();
  const double beta = cfg.beta();
  double sum = 0.0;
  for (std::size_t i = 0; i < logp_new.size(); ++i) {
    const double rho = std::exp(logp_new[i] - g.responses[i].logp_old);
    const double a = g.advantages[i];
    double term = std::min(rho * a, std::clamp(rho, lo, hi) * a);
    if (beta != 0.0) term -= beta * kl_estimate(logp_new[i], g.responses[i].logp_ref);
    sum += term;
  }
  return sum / static_cast<double>(logp_new.size());
}

/// d grpo_objective / d logp_new. Where the clipped branch is active the
/// surrogate is flat; at the kink itself the unclipped slope is used.
inline std::vector<double> grpo_objective_gradient(const TrajectoryGroup& g, std::span<const double> logp_new,
                                                   const OptimConfig& cfg) {
  detail::check_shapes(g, logp_new);
  const double lo = cfg.clip_low();
  const double hi = cfg.clip_high();
  const double beta = cfg.beta();
  const double inv_g = 1.0 / static_cast<double>(logp_new.size());
  std::vector<double> grad(logp_new.size(), 0.0);
  for (std::size_t i = 0; i < logp_new.size(); ++i) {
    const double rho = std::exp(logp_new[i] - g.responses[i].logp_old);
    const double a = g.advantages[i];
    const bool unclipped = rho * a <= std::clamp(rho, lo, hi) * a;
    double d = unclipped ? rho * a : 0.0;
    if (beta != 0.0) d -= beta * kl_gradient(logp_new[i], g.responses[i].logp_ref);
    grad[i] = d * inv_g;
  }
  return grad;
}

/// Dynamic sampling: keeps only groups with non-degenerate reward spread.
inline std::vector<TrajectoryGroup> dapo_filter(std::vector<TrajectoryGroup> groups, double degenerate_eps = 1e-8) {
  std::erase_if(groups, [&](const TrajectoryGroup& g) {
    const auto r = g.rewards();
    return r.size() < 2 || reward_std(r) < degenerate_eps;
  });
  return groups;
}

}  // namespace attrilens::grpo
