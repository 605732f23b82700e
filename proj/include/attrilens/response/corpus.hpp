#pragma once

#include <filesystem>
#include <fstream>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "json.hpp"

#include "attrilens/response/response.hpp"

namespace attrilens::response {

/// One line of a response corpus:
///   {"id": ..., "smiles": ..., "task": "classification"|"regression",
///    "target": ..., "response_text": ..., "label": true|false|number}
/// Extra fields are kept in `extra` untouched.
struct CorpusRecord {
  std::string id;
  std::string smiles;
  TaskKind task = TaskKind::Classification;
  std::string target;
  std::string response_text;
  std::optional<Answer> label;
  nlohmann::json extra = nlohmann::json::object();
};

class CorpusError : public std::runtime_error {
 public:
  CorpusError(const std::string& origin, std::size_t line, const std::string& what)
      : std::runtime_error(origin + ":" + std::to_string(line) + ": " + what), line_(line) {}
  std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

inline CorpusRecord corpus_record_from_json(const nlohmann::json& j) {
  if (!j.is_object()) throw std::invalid_argument("record is not a JSON object");
  auto str = [&](const char* key) -> std::string {
    const auto it = j.find(key);
    if (it == j.end()) throw std::invalid_argument(std::string("missing field ") + key);
    if (it->is_string()) return it->get<std::string>();
    if (it->is_number()) return it->dump();
    throw std::invalid_argument(std::string("field ") + key + " must be a string");
  };
  CorpusRecord r;
  r.id = str("id");
  r.smiles = str("smiles");
  r.task = parse_task_kind(str("task"));
  r.target = str("target");
  r.response_text = str("response_text");
  if (const auto it = j.find("label"); it != j.end() && !it->is_null()) {
    if (it->is_boolean()) {
      r.label = Answer{it->get<bool>()};
    } else if (it->is_number()) {
      if (r.task == TaskKind::Classification) {
        r.label = Answer{it->get<double>() != 0.0};
      } else {
        r.label = Answer{it->get<double>()};
      }
    } else {
      throw std::invalid_argument("label must be boolean or number");
    }
  }
  for (const auto& [key, value] : j.items()) {
    if (key != "id" && key != "smiles" && key != "task" && key != "target" && key != "response_text" &&
        key != "label") {
      r.extra[key] = value;
    }
  }
  return r;
}

inline nlohmann::json to_json(const CorpusRecord& r) {
  nlohmann::json j = r.extra;
  j["id"] = r.id;
  j["smiles"] = r.smiles;
  j["task"] = std::string(to_string(r.task));
  j["target"] = r.target;
  j["response_text"] = r.response_text;
  if (!r.label) {
    j["label"] = nullptr;
  } else if (const auto* b = std::get_if<bool>(&*r.label)) {
    j["label"] = *b;
  } else {
    j["label"] = std::get<double>(*r.label);
  }
  return j;
}

/// Blank lines are skipped. The first malformed line aborts with its number.
inline std::vector<CorpusRecord> parse_corpus(std::istream& in, const std::string& origin = "<stream>") {
  std::vector<CorpusRecord> out;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (text::trim(line).empty()) continue;
    try {
      out.push_back(corpus_record_from_json(nlohmann::json::parse(line)));
    } catch (const std::exception& e) {
      throw CorpusError(origin, line_no, e.what());
    }
  }
  return out;
}

inline std::vector<CorpusRecord> load_corpus(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  return parse_corpus(in, path.string());
}

}  // namespace attrilens::response
