#pragma once

#include <random>
#include <string>
#include <vector>

#include "attrilens/descriptors/registry.hpp"
#include "attrilens/response/response.hpp"

namespace attrilens::testing {

/// Names a model might write: every canonical name and alias in the registry.
inline const std::vector<std::string>& claim_name_pool() {
  static const std::vector<std::string> pool = [] {
    std::vector<std::string> out;
    for (const auto& e : descriptors::Registry::bundled().entries()) {
      out.push_back(e.canonical_name);
      for (const auto& a : e.aliases) out.push_back(a);
    }
    return out;
  }();
  return pool;
}

inline std::string random_think(std::mt19937_64& rng) {
  static const std::vector<std::string> words = {"the",  "molecule", "has", "a",   "high", "logP",  "value",
                                                 "TPSA", "is",       "low", "(",   ")",    "->",    "so",
                                                 "it",   "promotes", "3.5", "90",  "A",    "which", "inhibits"};
  std::uniform_int_distribution<std::size_t> len(0, 40);
  std::uniform_int_distribution<std::size_t> pick(0, words.size() - 1);
  std::string out;
  const auto n = len(rng);
  for (std::size_t i = 0; i < n; ++i) {
    if (i) out += (rng() % 9 == 0) ? "\n" : " ";
    out += words[pick(rng)];
  }
  return out;
}

/// A well-formed response for the task: all three tag pairs, 0..12 claims,
/// every claim with a polarity, answer matching the task kind.
inline response::ResponseParts random_well_formed(std::mt19937_64& rng, response::TaskKind task) {
  response::ResponseParts parts;
  parts.think = random_think(rng);
  const auto& pool = claim_name_pool();
  std::uniform_int_distribution<std::size_t> count(0, 12);
  std::uniform_int_distribution<std::size_t> pick(0, pool.size() - 1);
  std::vector<response::AttributeClaim> claims;
  const auto n = count(rng);
  for (std::size_t i = 0; i < n; ++i) {
    claims.push_back({pool[pick(rng)], rng() % 2 ? response::Polarity::Promotes : response::Polarity::Inhibits});
  }
  parts.claims = std::move(claims);
  if (task == response::TaskKind::Classification) {
    parts.answer = response::Answer{rng() % 2 == 0};
  } else {
    std::uniform_real_distribution<double> value(-1e4, 1e4);
    double v = value(rng);
    if (rng() % 3 == 0) v = static_cast<double>(static_cast<long>(v));
    parts.answer = response::Answer{v};
  }
  return parts;
}

}  // namespace attrilens::testing
