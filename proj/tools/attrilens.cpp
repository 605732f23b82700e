// attrilens: command-line front end for scoring, descriptors, the policy
// simulator, scaffold splits and the decision-tree pipeline.

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <map>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "attrilens/chem/smiles.hpp"
#include "attrilens/cli/manifest.hpp"
#include "attrilens/core/csv.hpp"
#include "attrilens/core/io.hpp"
#include "attrilens/descriptors/compute.hpp"
#include "attrilens/descriptors/registry.hpp"
#include "attrilens/mlpipe/pipeline.hpp"
#include "attrilens/policysim/simulator.hpp"
#include "attrilens/response/corpus.hpp"
#include "attrilens/response/response.hpp"
#include "attrilens/rewards/range_table.hpp"
#include "attrilens/rewards/rewards.hpp"
#include "attrilens/version.hpp"
#include "json.hpp"

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;
using namespace attrilens;

namespace {

enum Exit { kOk = 0, kInput = 2, kConfig = 3, kInternal = 4 };

/// Input problems the user can fix: exit 2.
class InputError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Bad settings: exit 3.
class SettingsError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class OutputFormat { Text, Json };

std::string fixed(double v, int decimals = 4) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", decimals, v);
  std::string s(buf);
  while (s.size() > 2 && s.back() == '0' && s[s.size() - 2] != '.') s.pop_back();
  return s == "-0.0" ? "0.0" : s;
}

rewards::RangeTable load_table(const std::string& spec) {
  if (fs::is_regular_file(spec)) return rewards::RangeTable::load(spec);
  const auto bundled = data_dir() / "ranges" / (spec + ".tsv");
  if (!fs::is_regular_file(bundled)) throw SettingsError("no range table named or at '" + spec + "'");
  return rewards::RangeTable::bundled(spec);
}

mlpipe::CsvSchema schema_for(const std::string& preset, const std::string& smiles_col, const std::string& label_col) {
  mlpipe::CsvSchema s;
  if (preset == "bbbp") s = mlpipe::bbbp_schema();
  else if (preset == "bace") s = mlpipe::bace_schema();
  else if (preset != "custom") throw SettingsError("unknown preset '" + preset + "'");
  if (!smiles_col.empty()) s.smiles_column = smiles_col;
  if (!label_col.empty()) s.label_column = label_col;
  return s;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

json breakdown_json(const std::string& id, const rewards::RewardBreakdown& b) {
  json j;
  j["id"] = id;
  j["format"] = b.format;
  j["correct"] = b.correct;
  j["count"] = b.count;
  j["rational"] = b.rational;
  j["total"] = b.total;
  j["n_att"] = b.n_att;
  j["matched"] = b.matched;
  j["verified"] = b.verified;
  json audits = json::array();
  for (const auto& a : b.audits) {
    json x;
    x["claim"] = a.raw_name;
    x["descriptor"] = a.descriptor;
    x["status"] = rewards::to_string(a.status);
    if (a.status == rewards::ClaimStatus::Verified) {
      x["value"] = a.value;
      x["claimed"] = a.claimed;
      x["expected"] = a.expected;
      x["agrees"] = a.agrees;
    }
    audits.push_back(std::move(x));
  }
  j["audits"] = std::move(audits);
  return j;
}

// ---- score -------------------------------------------------------------

struct ScoreArgs {
  std::string corpus;
  std::string table = "gpt4o-default";
  std::size_t count_lo = 3;
  std::size_t count_hi = 10;
  std::string out;
};

int cmd_score(const ScoreArgs& a, OutputFormat fmt) {
  const auto t0 = std::chrono::steady_clock::now();
  const auto records = response::load_corpus(a.corpus);
  if (records.empty()) throw InputError("EmptyDataset: corpus " + a.corpus + " has no records");
  const auto table = load_table(a.table);
  if (a.count_lo > a.count_hi) throw SettingsError("count bounds are inverted");
  const rewards::CountBounds bounds{a.count_lo, a.count_hi};

  std::string body;
  std::map<std::string, double> sums;
  for (const auto& r : records) {
    chem::Molecule mol;
    try {
      mol = chem::parse_smiles(r.smiles);
    } catch (const chem::SmilesError& e) {
      throw InputError("record " + r.id + ": " + e.what());
    }
    const auto parsed = response::parse_response(r.response_text, r.task);
    const auto b = rewards::total_reward(parsed, mol, r.label, r.target, table, bounds);
    for (const auto& [k, v] : std::map<std::string, double>{
             {"format", b.format}, {"correct", b.correct}, {"count", b.count}, {"rational", b.rational},
             {"total", b.total}}) {
      sums[k] += v;
    }
    if (fmt == OutputFormat::Json) {
      body += breakdown_json(r.id, b).dump() + "\n";
    } else {
      body += r.id + "\tformat=" + fixed(b.format) + "\tcorrect=" + fixed(b.correct) + "\tcount=" + fixed(b.count) +
              "\trational=" + fixed(b.rational) + "\ttotal=" + fixed(b.total) + "\n";
    }
  }
  const double n = static_cast<double>(records.size());
  json summary;
  summary["n"] = records.size();
  for (const char* k : {"format", "correct", "count", "rational", "total"}) summary["mean_" + std::string(k)] = sums[k] / n;
  if (fmt == OutputFormat::Json) {
    body += json{{"summary", summary}}.dump() + "\n";
  } else {
    body += "mean\tformat=" + fixed(sums["format"] / n) + "\tcorrect=" + fixed(sums["correct"] / n) +
            "\tcount=" + fixed(sums["count"] / n) + "\trational=" + fixed(sums["rational"] / n) +
            "\ttotal=" + fixed(sums["total"] / n) + "\n";
  }
  std::cout << body;
  if (!a.out.empty()) {
    io::write_file_atomic(a.out, body);
    cli::RunManifest m;
    m.command = "score";
    m.config = {{"table", a.table}, {"count_lo", a.count_lo}, {"count_hi", a.count_hi}};
    m.inputs = {a.corpus};
    m.outputs = {a.out};
    m.wall_time_s = seconds_since(t0);
    m.write(cli::manifest_path_for(a.out));
  }
  return kOk;
}

// ---- descriptors ---------------------------------------------------------

struct DescriptorArgs {
  std::vector<std::string> smiles;
  std::string ids;
  bool all = false;
};

int cmd_descriptors(const DescriptorArgs& a, OutputFormat fmt) {
  const auto& registry = descriptors::Registry::bundled();
  std::vector<const descriptors::DescriptorId*> ids;
  if (!a.ids.empty() && !a.all) {
    for (const auto& raw : text::split(a.ids, ',')) {
      const auto name = text::trim(raw);
      const auto* id = registry.resolve(name);
      if (id == nullptr) throw InputError("unknown descriptor '" + std::string(name) + "'");
      if (!id->implemented || !descriptors::has_calculator(id->canonical_name)) {
        throw InputError("descriptor '" + id->canonical_name + "' has no calculator");
      }
      ids.push_back(id);
    }
  } else {
    for (const auto& e : registry.entries()) {
      if (e.implemented && descriptors::has_calculator(e.canonical_name)) ids.push_back(&e);
    }
  }
  json all = json::array();
  std::string text_out;
  for (const auto& s : a.smiles) {
    chem::Molecule mol;
    try {
      mol = chem::parse_smiles(s);
    } catch (const chem::SmilesError& e) {
      throw InputError(s + ": " + e.what());
    }
    json values;
    if (a.smiles.size() > 1) text_out += "# " + s + "\n";
    text_out += "name,value\n";
    for (const auto* id : ids) {
      const double v = descriptors::compute_value(mol, *id);
      values[id->canonical_name] = v;
      text_out += id->canonical_name + "," + fixed(v) + "\n";
    }
    all.push_back(json{{"smiles", s}, {"descriptors", values}});
  }
  std::cout << (fmt == OutputFormat::Json ? all.dump(2) + "\n" : text_out);
  return kOk;
}

// ---- prompt --------------------------------------------------------------

struct PromptArgs {
  std::string task = "classification";
  std::string smiles;
  std::string target;
};

int cmd_prompt(const PromptArgs& a, OutputFormat fmt) {
  response::PromptSpec spec;
  try {
    spec.task = response::parse_task_kind(a.task);
  } catch (const std::invalid_argument& e) {
    throw InputError(e.what());
  }
  spec.smiles = a.smiles;
  spec.target_property = a.target;
  const auto p = response::render_prompt(spec);
  std::cout << (fmt == OutputFormat::Json ? json{{"prompt", p}}.dump() : p) << "\n";
  return kOk;
}

// ---- train-sim -------------------------------------------------------------

struct TrainArgs {
  std::string config_file;
  std::map<std::string, std::string> overrides;
  std::string table = "gpt4o-default";
  std::string out = "curves.csv";
  std::string emit_corpus;
  std::size_t corpus_per_query = 8;
};

int cmd_train_sim(const TrainArgs& a, OutputFormat fmt) {
  const auto t0 = std::chrono::steady_clock::now();
  policysim::TrainConfig cfg;
  cfg.dataset = policysim::bundled_sim_dataset();
  cfg.range_table = a.table;
  try {
    if (!a.config_file.empty()) cfg = policysim::parse_train_config(text::read_file(a.config_file), cfg);
    std::string lines;
    for (const auto& [k, v] : a.overrides) lines += k + " = " + v + "\n";
    cfg = policysim::parse_train_config(lines, cfg);
    cfg.validate();
  } catch (const grpo::ConfigError& e) {
    throw SettingsError(e.what());
  }
  std::vector<policysim::SimQuery> dataset;
  try {
    dataset = policysim::load_sim_dataset(cfg.dataset);
  } catch (const std::invalid_argument& e) {
    throw InputError(e.what());
  }
  const auto table = load_table(cfg.range_table.string());
  policysim::Simulator sim(cfg, std::move(dataset), table);
  const auto curves = sim.run();
  io::write_file_atomic(a.out, policysim::curves_csv(curves));

  cli::RunManifest m;
  m.command = "train-sim";
  m.config = {{"steps", cfg.steps},
              {"group_size", cfg.group_size},
              {"temperature", cfg.temperature},
              {"learning_rate", cfg.learning_rate},
              {"algorithm", grpo::to_string(cfg.algorithm)},
              {"kl_beta", cfg.kl_beta},
              {"count_lo", cfg.count_bounds.lo},
              {"count_hi", cfg.count_bounds.hi},
              {"max_count", cfg.max_count},
              {"max_resamples", cfg.max_resamples}};
  m.inputs = {cfg.dataset.string(), cfg.range_table.string()};
  if (!a.config_file.empty()) m.inputs.push_back(a.config_file);
  m.outputs = {a.out};
  m.seed = cfg.seed;
  if (!a.emit_corpus.empty()) {
    std::string lines;
    for (const auto& r : sim.sample_corpus(a.corpus_per_query)) lines += response::to_json(r).dump() + "\n";
    io::write_file_atomic(a.emit_corpus, lines);
    m.outputs.push_back(a.emit_corpus);
  }

  const auto& rows = curves.rows;
  const std::size_t tail = std::min<std::size_t>(50, rows.size());
  json final_means;
  for (auto [name, field] : std::vector<std::pair<const char*, double policysim::StepStats::*>>{
           {"format", &policysim::StepStats::format}, {"correct", &policysim::StepStats::correct},
           {"count", &policysim::StepStats::count}, {"rational", &policysim::StepStats::rational},
           {"total", &policysim::StepStats::total}}) {
    double s = 0.0;
    for (std::size_t i = rows.size() - tail; i < rows.size(); ++i) s += rows[i].*field;
    final_means[name] = s / static_cast<double>(tail);
  }
  m.wall_time_s = seconds_since(t0);
  m.write(cli::manifest_path_for(a.out));
  if (fmt == OutputFormat::Json) {
    std::cout << json{{"curves", a.out}, {"steps", rows.size()}, {"final_means", final_means}}.dump() << "\n";
  } else {
    std::cout << "wrote " << rows.size() << " steps to " << a.out << "\n";
    for (const auto& [k, v] : final_means.items()) std::cout << "final " << k << " " << fixed(v.get<double>()) << "\n";
  }
  return kOk;
}

// ---- split -----------------------------------------------------------------

struct SplitArgs {
  std::string dataset;
  std::string preset = "custom";
  std::string smiles_col;
  std::string label_col;
  std::string out_dir = ".";
};

int cmd_split(const SplitArgs& a, OutputFormat fmt) {
  const auto t0 = std::chrono::steady_clock::now();
  const auto schema = schema_for(a.preset, a.smiles_col, a.label_col);
  const auto loaded = mlpipe::load_csv(a.dataset, schema);
  const auto split = mlpipe::scaffold_split(loaded.records);
  const auto lines = text::split(text::read_file(a.dataset), '\n');
  fs::create_directories(a.out_dir);
  cli::RunManifest m;
  m.command = "split";
  m.config = {{"preset", a.preset}, {"smiles_column", schema.smiles_column}, {"label_column", schema.label_column},
              {"fractions", {0.8, 0.1, 0.1}}};
  m.inputs = {a.dataset};
  json sizes;
  for (auto [name, idx] : std::vector<std::pair<const char*, const std::vector<std::size_t>*>>{
           {"train", &split.train}, {"valid", &split.valid}, {"test", &split.test}}) {
    std::string body = lines.front() + "\n";
    for (auto i : *idx) body += lines[loaded.records[i].line - 1] + "\n";
    const auto path = (fs::path(a.out_dir) / (std::string(name) + ".csv")).string();
    io::write_file_atomic(path, body);
    m.outputs.push_back(path);
    sizes[name] = idx->size();
  }
  m.wall_time_s = seconds_since(t0);
  m.write(fs::path(a.out_dir) / "split.manifest.json");
  if (fmt == OutputFormat::Json) {
    std::cout << json{{"sizes", sizes}, {"skipped", loaded.skipped.size()}}.dump() << "\n";
  } else {
    std::cout << "train " << split.train.size() << "\nvalid " << split.valid.size() << "\ntest " << split.test.size()
              << "\nskipped " << loaded.skipped.size() << "\n";
  }
  return kOk;
}

// ---- dtree -----------------------------------------------------------------

struct DtreeArgs {
  std::string dataset;
  std::string preset = "bbbp";
  std::string smiles_col;
  std::string label_col;
  std::string corpus;
  std::string features;
  std::size_t k = 10;
  std::size_t trees = 200;
  std::size_t depth = 8;
  std::uint64_t seed = 0;
  std::size_t null_repeats = 5;
  std::string model_out;
  std::string out;
};

int cmd_dtree(const DtreeArgs& a, OutputFormat fmt) {
  const auto t0 = std::chrono::steady_clock::now();
  const auto dataset = a.dataset.empty() ? mlpipe::bundled_dataset("bbbp_subset.csv").string() : a.dataset;
  const auto corpus_path =
      a.corpus.empty() ? (data_dir() / "corpora" / "toy_bbbp_grpo.jsonl").string() : a.corpus;
  const auto schema = schema_for(a.preset, a.smiles_col, a.label_col);
  const auto loaded = mlpipe::load_csv(dataset, schema);
  const auto& registry = descriptors::Registry::bundled();
  std::vector<const descriptors::DescriptorId*> ids;
  std::vector<std::string> inputs{dataset};
  if (!a.features.empty()) {
    for (const auto& raw : text::split(a.features, ',')) {
      const auto* id = registry.resolve(text::trim(raw));
      if (id == nullptr || !id->implemented || !descriptors::has_calculator(id->canonical_name)) {
        throw InputError("unknown or unimplemented feature '" + raw + "'");
      }
      ids.push_back(id);
    }
  } else {
    std::vector<response::ParsedResponse> parsed;
    for (const auto& r : response::load_corpus(corpus_path)) parsed.push_back(response::parse_response(r.response_text, r.task));
    ids = mlpipe::top_attributes(parsed, a.k, registry);
    if (ids.empty()) throw InputError("corpus " + corpus_path + " names no implemented descriptors");
    inputs.push_back(corpus_path);
  }
  mlpipe::ForestConfig cfg;
  cfg.n_trees = a.trees;
  cfg.max_depth = a.depth;
  cfg.seed = a.seed;
  const auto rep = mlpipe::run_dtree(loaded.records, ids, cfg, a.null_repeats);

  json features = json::array();
  for (const auto* id : ids) features.push_back(id->canonical_name);
  json result;
  result["dataset"] = dataset;
  result["features"] = features;
  result["n_records"] = loaded.records.size();
  result["skipped"] = loaded.skipped.size();
  result["split"] = {{"train", rep.split.train.size()}, {"valid", rep.split.valid.size()}, {"test", rep.split.test.size()}};
  result["forest"] = {{"n_trees", cfg.n_trees}, {"max_depth", cfg.max_depth}, {"seed", cfg.seed}};
  result["auc"] = rep.test_auc;
  if (!rep.null_aucs.empty()) {
    result["null_auc_mean"] = rep.null_mean();
    result["null_aucs"] = rep.null_aucs;
  }
  const auto body = result.dump(2) + "\n";

  cli::RunManifest m;
  m.command = "dtree";
  m.config = {{"preset", a.preset}, {"k", a.k}, {"trees", cfg.n_trees}, {"depth", cfg.max_depth},
              {"null_repeats", a.null_repeats}, {"features", features}};
  m.inputs = inputs;
  m.seed = a.seed;
  if (!a.model_out.empty()) {
    io::write_file_atomic(a.model_out, mlpipe::forest_to_text(rep.model));
    m.outputs.push_back(a.model_out);
  }
  if (!a.out.empty()) {
    io::write_file_atomic(a.out, body);
    m.outputs.push_back(a.out);
  }
  if (!m.outputs.empty()) {
    m.wall_time_s = seconds_since(t0);
    m.write(cli::manifest_path_for(m.outputs.back()));
  }
  if (fmt == OutputFormat::Json) {
    std::cout << body;
  } else {
    std::cout << "features";
    for (const auto& f : features) std::cout << " " << f.get<std::string>();
    std::cout << "\nsplit " << rep.split.train.size() << "/" << rep.split.valid.size() << "/" << rep.split.test.size()
              << "\nauc " << fixed(rep.test_auc) << "\n";
    if (!rep.null_aucs.empty()) std::cout << "null_auc_mean " << fixed(rep.null_mean()) << "\n";
  }
  return kOk;
}

template <typename Fn>
int guarded(Fn&& fn) {
  try {
    return fn();
  } catch (const SettingsError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kConfig;
  } catch (const rewards::TableMissing& e) {
    std::cerr << "error: TableMissing: " << e.what() << "\n";
    return kConfig;
  } catch (const grpo::ConfigError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kConfig;
  } catch (const response::CorpusError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kInput;
  } catch (const InputError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kInput;
  } catch (const std::logic_error& e) {
    // invalid_argument and friends signal bad input; other logic errors are bugs
    if (dynamic_cast<const std::invalid_argument*>(&e) != nullptr ||
        dynamic_cast<const std::out_of_range*>(&e) != nullptr) {
      std::cerr << "error: " << e.what() << "\n";
      return kInput;
    }
    std::cerr << "internal error: " << e.what() << "\n";
    return kInternal;
  } catch (const std::runtime_error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kInput;
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << "\n";
    return kInternal;
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Attribute-guided reward scoring, descriptors and training utilities"};
  app.set_version_flag("--version", std::string(kVersion));
  app.require_subcommand(1);
  app.fallthrough();
  OutputFormat fmt = OutputFormat::Text;
  const std::map<std::string, OutputFormat> formats{{"text", OutputFormat::Text}, {"json", OutputFormat::Json}};
  app.add_option("--format", fmt, "Output mode: text or json")
      ->transform(CLI::CheckedTransformer(formats, CLI::ignore_case))
      ->capture_default_str();

  ScoreArgs score;
  auto* s = app.add_subcommand("score", "Score a JSON-lines corpus with the four rewards");
  s->add_option("corpus", score.corpus, "Corpus file (JSON lines)")->required();
  s->add_option("--table", score.table, "Range table: bundled name or path")->capture_default_str();
  s->add_option("--count-lo", score.count_lo, "Lower attribute-count bound")->capture_default_str();
  s->add_option("--count-hi", score.count_hi, "Upper attribute-count bound")->capture_default_str();
  s->add_option("--out", score.out, "Also write the output here, with a run manifest");

  DescriptorArgs desc;
  auto* d = app.add_subcommand("descriptors", "Compute descriptors for SMILES");
  d->add_option("smiles", desc.smiles, "One or more SMILES")->required();
  d->add_option("--ids", desc.ids, "Comma-separated descriptor names");
  d->add_flag("--all", desc.all, "Every implemented descriptor (default)");

  PromptArgs prompt;
  auto* p = app.add_subcommand("prompt", "Render the task prompt");
  p->add_option("--task", prompt.task, "classification or regression")->capture_default_str();
  p->add_option("--smiles", prompt.smiles, "Molecule SMILES")->required();
  p->add_option("--target", prompt.target, "Target property name")->required();

  TrainArgs train;
  auto* t = app.add_subcommand("train-sim", "Train the toy policy with GRPO or DAPO and write reward curves");
  t->add_option("--config", train.config_file, "Config file of key = value lines");
  for (const char* key : {"steps", "group_size", "temperature", "learning_rate", "seed", "algorithm", "kl_beta",
                          "count_lo", "count_hi", "max_count", "max_resamples", "dataset"}) {
    std::string flag = std::string("--") + key;
    std::replace(flag.begin(), flag.end(), '_', '-');
    t->add_option_function<std::string>(
        flag, [&train, key](const std::string& v) { train.overrides[key] = v; }, std::string("Override ") + key);
  }
  t->add_option("--table", train.table, "Range table: bundled name or path")->capture_default_str();
  t->add_option("--out", train.out, "Curves CSV")->capture_default_str();
  t->add_option("--emit-corpus", train.emit_corpus, "Also write responses of the trained policy (JSON lines)");
  t->add_option("--corpus-per-query", train.corpus_per_query, "Responses per query for --emit-corpus")
      ->capture_default_str();

  SplitArgs split;
  auto* sp = app.add_subcommand("split", "Scaffold split of a CSV dataset into train/valid/test CSVs");
  sp->add_option("dataset", split.dataset, "Input CSV")->required();
  sp->add_option("--preset", split.preset, "Column layout: bbbp, bace or custom")->capture_default_str();
  sp->add_option("--smiles-col", split.smiles_col, "SMILES column");
  sp->add_option("--label-col", split.label_col, "Label column");
  sp->add_option("--out-dir", split.out_dir, "Output directory")->capture_default_str();

  DtreeArgs dtree;
  auto* dt = app.add_subcommand("dtree", "Random forest on claimed attributes, AUC on the scaffold test split");
  dt->add_option("--dataset", dtree.dataset, "Input CSV (default: bundled BBBP subset)");
  dt->add_option("--preset", dtree.preset, "Column layout: bbbp, bace or custom")->capture_default_str();
  dt->add_option("--smiles-col", dtree.smiles_col, "SMILES column");
  dt->add_option("--label-col", dtree.label_col, "Label column");
  dt->add_option("--corpus", dtree.corpus, "Corpus whose most claimed descriptors become features");
  dt->add_option("--features", dtree.features, "Comma-separated descriptors instead of a corpus");
  dt->add_option("--k", dtree.k, "Number of corpus attributes")->capture_default_str();
  dt->add_option("--trees", dtree.trees, "Number of trees")->capture_default_str();
  dt->add_option("--depth", dtree.depth, "Maximum depth")->capture_default_str();
  dt->add_option("--seed", dtree.seed, "Forest seed")->capture_default_str();
  dt->add_option("--null-repeats", dtree.null_repeats, "Label-permutation control runs")->capture_default_str();
  dt->add_option("--model-out", dtree.model_out, "Write the forest as a text dump");
  dt->add_option("--out", dtree.out, "Write metrics JSON");

  try {
    app.parse(argc, argv);
  } catch (const CLI::Success& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kInput;
  }

  return guarded([&] {
    if (s->parsed()) return cmd_score(score, fmt);
    if (d->parsed()) return cmd_descriptors(desc, fmt);
    if (p->parsed()) return cmd_prompt(prompt, fmt);
    if (t->parsed()) return cmd_train_sim(train, fmt);
    if (sp->parsed()) return cmd_split(split, fmt);
    return cmd_dtree(dtree, fmt);
  });
}
