#pragma once

#include <cmath>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "attrilens/chem/molecule.hpp"
#include "attrilens/descriptors/compute.hpp"
#include "attrilens/descriptors/registry.hpp"
#include "attrilens/response/response.hpp"
#include "attrilens/rewards/range_table.hpp"

namespace attrilens::rewards {

using response::Answer;
using response::ParsedResponse;

inline constexpr double kFormatOk = 1.0;
inline constexpr double kFormatBad = -2.0;
inline constexpr double kCorrect = 2.0;
inline constexpr double kCountOutside = -1.0;

struct CountBounds {
  std::size_t lo = 3;
  std::size_t hi = 10;
};

inline double reward_format(const ParsedResponse& parsed) { return parsed.format_ok ? kFormatOk : kFormatBad; }

/// 2 when the tagged answer equals a boolean label, else 0. Numeric labels
/// never score.
inline double reward_correct(const ParsedResponse& parsed, const std::optional<Answer>& label) {
  if (!parsed.answer || !label) return 0.0;
  const auto* a = std::get_if<bool>(&*parsed.answer);
  const auto* l = std::get_if<bool>(&*label);
  return a != nullptr && l != nullptr && *a == *l ? kCorrect : 0.0;
}

inline double reward_count(const ParsedResponse& parsed, CountBounds bounds = {}) {
  const auto n = parsed.claim_count();
  return n >= bounds.lo && n <= bounds.hi ? 0.0 : kCountOutside;
}

enum class ClaimStatus { Verified, NoPolarity, NoMatch, Unimplemented, NoTableEntry };

inline std::string_view to_string(ClaimStatus s) {
  switch (s) {
    case ClaimStatus::Verified: return "verified";
    case ClaimStatus::NoPolarity: return "no_polarity";
    case ClaimStatus::NoMatch: return "no_match";
    case ClaimStatus::Unimplemented: return "unimplemented";
    case ClaimStatus::NoTableEntry: return "no_table_entry";
  }
  return "?";
}

/// Per-claim record of how the rationality check treated one claim.
struct ClaimAudit {
  std::string raw_name;
  std::string descriptor;  // canonical name, empty on NoMatch
  ClaimStatus status = ClaimStatus::NoMatch;
  double value = 0.0;
  int claimed = -1;   // r_i
  int expected = -1;  // r-hat_i
  bool agrees = false;
};

struct RationalResult {
  double value = 0.0;
  int matched = 0;
  int verified = 0;
  std::vector<ClaimAudit> audits;
};

/// Agreement between claimed polarity and range verification, averaged over
/// the verifiable claims only. Claims that resolve to nothing, have no
/// calculator, have no table row, or carry no polarity drop out of the
/// denominator; with nothing verifiable the result is 0.
inline RationalResult reward_rational(const ParsedResponse& parsed, descriptors::DescriptorProfile& profile,
                                      std::string_view target, const RangeTable& table,
                                      const descriptors::Registry& registry = descriptors::Registry::bundled()) {
  if (!table.has_target(target)) throw TableMissing(std::string(target));
  RationalResult out;
  if (!parsed.claims) return out;
  int agree = 0;
  for (const auto& claim : *parsed.claims) {
    ClaimAudit audit;
    audit.raw_name = claim.raw_name;
    const auto* id = registry.resolve(claim.raw_name);
    if (id != nullptr) {
      ++out.matched;
      audit.descriptor = id->canonical_name;
    }
    if (claim.polarity) audit.claimed = *claim.polarity == response::Polarity::Promotes ? 1 : 0;
    const IntervalSet* ranges = id != nullptr ? table.find(target, id->canonical_name) : nullptr;
    if (id == nullptr) {
      audit.status = ClaimStatus::NoMatch;
    } else if (!id->implemented || !descriptors::has_calculator(id->canonical_name)) {
      audit.status = ClaimStatus::Unimplemented;
    } else if (ranges == nullptr) {
      audit.status = ClaimStatus::NoTableEntry;
    } else if (!claim.polarity) {
      audit.status = ClaimStatus::NoPolarity;
    } else {
      audit.status = ClaimStatus::Verified;
      audit.value = profile.get(*id);
      audit.expected = ranges->contains(audit.value) ? 1 : 0;
      audit.agrees = audit.expected == audit.claimed;
      ++out.verified;
      agree += audit.agrees ? 1 : 0;
    }
    out.audits.push_back(std::move(audit));
  }
  out.value = out.verified == 0 ? 0.0 : static_cast<double>(agree) / out.verified;
  return out;
}

inline RationalResult reward_rational(const ParsedResponse& parsed, const chem::Molecule& mol,
                                      std::string_view target, const RangeTable& table,
                                      const descriptors::Registry& registry = descriptors::Registry::bundled()) {
  descriptors::DescriptorProfile profile(mol);
  return reward_rational(parsed, profile, target, table, registry);
}

struct RewardBreakdown {
  double format = 0.0;
  double correct = 0.0;
  double count = 0.0;
  double rational = 0.0;
  double total = 0.0;
  int n_att = 0;
  int matched = 0;
  int verified = 0;
  std::vector<ClaimAudit> audits;
};

/// Descriptor values are memoised in `profile`, so scoring many responses
/// for one molecule computes each descriptor once.
inline RewardBreakdown total_reward(const ParsedResponse& parsed, descriptors::DescriptorProfile& profile,
                                    const std::optional<Answer>& label, std::string_view target,
                                    const RangeTable& table, CountBounds bounds = {},
                                    const descriptors::Registry& registry = descriptors::Registry::bundled()) {
  RewardBreakdown b;
  b.format = reward_format(parsed);
  b.correct = reward_correct(parsed, label);
  b.count = reward_count(parsed, bounds);
  auto rational = reward_rational(parsed, profile, target, table, registry);
  b.rational = rational.value;
  b.matched = rational.matched;
  b.verified = rational.verified;
  b.audits = std::move(rational.audits);
  b.n_att = static_cast<int>(parsed.claim_count());
  b.total = b.format + b.correct + b.count + b.rational;
  return b;
}

inline RewardBreakdown total_reward(const ParsedResponse& parsed, const chem::Molecule& mol,
                                    const std::optional<Answer>& label, std::string_view target,
                                    const RangeTable& table, CountBounds bounds = {},
                                    const descriptors::Registry& registry = descriptors::Registry::bundled()) {
  descriptors::DescriptorProfile profile(mol);
  return total_reward(parsed, profile, label, target, table, bounds, registry);
}

/// True when `value` shows as `printed` once cut to the digits printed
/// after the decimal point ("0.66" for two thirds).
inline bool matches_printed(double value, std::string_view printed) {
  const auto dot = printed.find('.');
  const int digits = dot == std::string_view::npos ? 0 : static_cast<int>(printed.size() - dot - 1);
  const double scale = std::pow(10.0, digits);
  const double target = std::stod(std::string(printed));
  const double cut = std::trunc(value * scale + (value >= 0 ? 1e-9 : -1e-9)) / scale;
  return std::abs(cut - target) < 0.5 / scale;
}

}  // namespace attrilens::rewards
