#pragma once

#include <algorithm>
#include <array>
#include <cctype>
#include <charconv>
#include <cmath>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <system_error>
#include <variant>
#include <vector>

#include "attrilens/core/text.hpp"

namespace attrilens::response {

enum class TaskKind { Classification, Regression };

inline std::string_view to_string(TaskKind k) {
  return k == TaskKind::Classification ? "classification" : "regression";
}

inline TaskKind parse_task_kind(std::string_view s) {
  const auto v = text::lower(text::trim(s));
  if (v == "classification") return TaskKind::Classification;
  if (v == "regression") return TaskKind::Regression;
  throw std::invalid_argument("unknown task kind: " + std::string(s));
}

struct PromptSpec {
  TaskKind task = TaskKind::Classification;
  std::string smiles;
  std::string target_property;
};

enum class Polarity { Promotes, Inhibits };

inline std::string_view to_string(Polarity p) { return p == Polarity::Promotes ? "promotes" : "inhibits"; }

/// One entry of the <name> list. Bare names without ": polarity" keep the
/// name and leave polarity empty; such claims count but are never verified.
struct AttributeClaim {
  std::string raw_name;
  std::optional<Polarity> polarity;

  bool operator==(const AttributeClaim&) const = default;
};

using Answer = std::variant<bool, double>;

struct ParsedResponse {
  std::optional<std::string> think;
  std::optional<std::vector<AttributeClaim>> claims;
  std::optional<Answer> answer;
  bool format_ok = false;
  std::size_t token_count = 0;

  std::size_t claim_count() const { return claims ? claims->size() : 0; }
};

inline std::string render_prompt(const PromptSpec& spec) {
  std::string out;
  out.reserve(900 + spec.smiles.size());
  out +=
      "System: Your task is to predict the property of the given molecule. You must write your response using the "
      "following strict XML format: <think>\n"
      "Step-by-step reasoning with consideration on relevant attributes can be calculated using RDKit. For each "
      "attribute, provide its estimated value, and explain whether it promotes (improve) or inhibits (not improve) the "
      "target property.\n"
      "</think>, <name>\n"
      "List the attributes you used, each followed by \": promotes\" or \": inhibits\", separated by commas. For "
      "example:\n"
      "attribute A: promotes, attribute B: promotes, attribute C: inhibits.\n"
      "</name>, <answer>\n"
      "The final answer (e.g., true/false or specific values) based on your overall reasoning.\n"
      "</answer>.\n";
  out += "User: The task is ";
  out += to_string(spec.task);
  out += ", the molecule is ";
  out += spec.smiles;
  out += ", and the property to be considered is ";
  out += spec.target_property;
  out += ".\nAssistant:";
  return out;
}

namespace detail {

enum class Tag { ThinkOpen, ThinkClose, NameOpen, NameClose, AnswerOpen, AnswerClose };

struct TagHit {
  Tag tag;
  std::size_t begin;
  std::size_t end;
};

inline constexpr std::array<std::pair<std::string_view, Tag>, 6> kTags{{
    {"<think>", Tag::ThinkOpen},
    {"</think>", Tag::ThinkClose},
    {"<name>", Tag::NameOpen},
    {"</name>", Tag::NameClose},
    {"<answer>", Tag::AnswerOpen},
    {"</answer>", Tag::AnswerClose},
}};

inline std::vector<TagHit> scan_tags(std::string_view s) {
  std::vector<TagHit> hits;
  for (std::size_t i = s.find('<'); i != std::string_view::npos; i = s.find('<', i + 1)) {
    for (const auto& [token, tag] : kTags) {
      if (s.compare(i, token.size(), token) == 0) {
        hits.push_back({tag, i, i + token.size()});
        break;
      }
    }
  }
  return hits;
}

/// Content of the first open tag followed by a matching close tag.
inline std::optional<std::string_view> first_pair(std::string_view s, const std::vector<TagHit>& hits, Tag open,
                                                  Tag close) {
  for (std::size_t i = 0; i < hits.size(); ++i) {
    if (hits[i].tag != open) continue;
    for (std::size_t j = i + 1; j < hits.size(); ++j) {
      if (hits[j].tag == close) return s.substr(hits[i].end, hits[j].begin - hits[i].end);
    }
    return std::nullopt;
  }
  return std::nullopt;
}

inline std::string strip_trailing_period(std::string_view s) {
  s = text::trim(s);
  while (!s.empty() && s.back() == '.') s = text::trim(s.substr(0, s.size() - 1));
  return std::string(s);
}

inline std::string strip_quotes(std::string_view s) {
  s = text::trim(s);
  auto quote = [](char c) { return c == '"' || c == '\'' || c == '`'; };
  while (!s.empty() && quote(s.front())) s.remove_prefix(1);
  while (!s.empty() && quote(s.back())) s.remove_suffix(1);
  return std::string(text::trim(s));
}

inline std::optional<Polarity> parse_polarity(std::string_view raw) {
  std::string words;
  for (const auto& w : text::split(text::lower(strip_quotes(strip_trailing_period(raw))), ' ')) {
    const auto t = text::trim(w);
    if (t.empty()) continue;
    if (!words.empty()) words += ' ';
    words += t;
  }
  if (words == "promotes" || words == "promote" || words == "improve" || words == "improves") return Polarity::Promotes;
  if (words == "inhibits" || words == "inhibit" || words == "not improve" || words == "not improves") {
    return Polarity::Inhibits;
  }
  return std::nullopt;
}

/// nullopt when any item is malformed; an empty or blank list yields no claims.
inline std::optional<std::vector<AttributeClaim>> parse_claims(std::string_view body) {
  std::vector<AttributeClaim> out;
  const auto trimmed = strip_trailing_period(body);
  if (trimmed.empty()) return out;
  for (const auto& item : text::split(trimmed, ',')) {
    const auto colon = item.rfind(':');
    AttributeClaim claim;
    if (colon == std::string::npos) {
      claim.raw_name = strip_quotes(item);
    } else {
      claim.raw_name = strip_quotes(std::string_view(item).substr(0, colon));
      claim.polarity = parse_polarity(std::string_view(item).substr(colon + 1));
      if (!claim.polarity) return std::nullopt;
    }
    if (claim.raw_name.empty()) return std::nullopt;
    out.push_back(std::move(claim));
  }
  return out;
}

inline std::optional<double> parse_decimal(std::string_view s) {
  if (!s.empty() && s.front() == '+') s.remove_prefix(1);
  if (s.empty()) return std::nullopt;
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v, std::chars_format::general);
  if (ec != std::errc{} || ptr != s.data() + s.size() || !std::isfinite(v)) return std::nullopt;
  return v;
}

inline std::optional<Answer> parse_answer(std::string_view body, TaskKind task) {
  const auto trimmed = text::trim(body);
  if (task == TaskKind::Classification) {
    const auto v = text::lower(strip_trailing_period(trimmed));
    if (v == "true") return Answer{true};
    if (v == "false") return Answer{false};
    return std::nullopt;
  }
  if (auto v = parse_decimal(trimmed)) return Answer{*v};
  if (!trimmed.empty() && trimmed.back() == '.') {
    if (auto v = parse_decimal(strip_trailing_period(trimmed))) return Answer{*v};
  }
  return std::nullopt;
}

}  // namespace detail

inline std::size_t count_tokens(std::string_view s) {
  std::size_t n = 0;
  bool in_token = false;
  for (const char c : s) {
    const bool space = std::isspace(static_cast<unsigned char>(c)) != 0;
    if (!space && !in_token) ++n;
    in_token = !space;
  }
  return n;
}

/// Total over arbitrary bytes: failures show up as absent fields and
/// format_ok == false.
inline ParsedResponse parse_response(std::string_view text, TaskKind task) {
  using detail::Tag;
  ParsedResponse out;
  out.token_count = count_tokens(text);
  const auto hits = detail::scan_tags(text);

  if (const auto body = detail::first_pair(text, hits, Tag::ThinkOpen, Tag::ThinkClose)) {
    out.think = std::string(text::trim(*body));
  }
  if (const auto body = detail::first_pair(text, hits, Tag::NameOpen, Tag::NameClose)) {
    out.claims = detail::parse_claims(*body);
  }
  if (const auto body = detail::first_pair(text, hits, Tag::AnswerOpen, Tag::AnswerClose)) {
    out.answer = detail::parse_answer(*body, task);
  }

  static constexpr std::array<Tag, 6> kOrder{Tag::ThinkOpen, Tag::ThinkClose, Tag::NameOpen,
                                             Tag::NameClose, Tag::AnswerOpen, Tag::AnswerClose};
  const bool tags_ok = hits.size() == kOrder.size() &&
                       std::equal(hits.begin(), hits.end(), kOrder.begin(),
                                  [](const detail::TagHit& h, Tag t) { return h.tag == t; });
  out.format_ok = tags_ok && out.claims.has_value() && out.answer.has_value();
  return out;
}

/// Promotes -> 1, Inhibits -> 0; bare names map to nullopt.
inline std::vector<std::optional<int>> claims_vector(const std::vector<AttributeClaim>& claims) {
  std::vector<std::optional<int>> out;
  out.reserve(claims.size());
  for (const auto& c : claims) {
    if (c.polarity) {
      out.emplace_back(*c.polarity == Polarity::Promotes ? 1 : 0);
    } else {
      out.emplace_back(std::nullopt);
    }
  }
  return out;
}

inline std::string format_answer(const Answer& a) {
  if (const auto* b = std::get_if<bool>(&a)) return *b ? "True" : "False";
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, std::get<double>(a));
  return std::string(buf, ptr);
}

inline std::string format_claims(const std::vector<AttributeClaim>& claims) {
  std::string out;
  for (std::size_t i = 0; i < claims.size(); ++i) {
    if (i) out += ", ";
    out += claims[i].raw_name;
    if (claims[i].polarity) {
      out += ": ";
      out += to_string(*claims[i].polarity);
    }
  }
  return out;
}

/// Pieces of a response in template order. Any field left empty omits the
/// whole tag pair.
struct ResponseParts {
  std::optional<std::string> think;
  std::optional<std::vector<AttributeClaim>> claims;
  std::optional<Answer> answer;
};

inline std::string render_response(const ResponseParts& parts) {
  std::string out;
  if (parts.think) out += "<think>\n" + *parts.think + "\n</think>\n";
  if (parts.claims) out += "<name>\n" + format_claims(*parts.claims) + "\n</name>\n";
  if (parts.answer) out += "<answer>\n" + format_answer(*parts.answer) + "\n</answer>";
  return out;
}

}  // namespace attrilens::response
