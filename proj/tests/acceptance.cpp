// Acceptance report: one PASS/FAIL line per criterion.
//
// Usage: acceptance [--expect-red N]...
// The exit status is 0 when the set of failing criteria equals the set given
// with --expect-red, so a known-red criterion stays visible in the report
// without masking regressions elsewhere (or an unexpected turn to green).

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <map>
#include <random>
#include <set>
#include <string>
#include <vector>

#include "attrilens/chem/scaffold.hpp"
#include "attrilens/chem/smiles.hpp"
#include "attrilens/descriptors/compute.hpp"
#include "attrilens/grpo/grpo.hpp"
#include "attrilens/mlpipe/pipeline.hpp"
#include "attrilens/policysim/simulator.hpp"
#include "attrilens/response/corpus.hpp"
#include "attrilens/response/response.hpp"
#include "attrilens/rewards/range_table.hpp"
#include "attrilens/rewards/rewards.hpp"
#include "support/random_smiles.hpp"
#include "support/response_gen.hpp"

using namespace attrilens;
using response::TaskKind;

namespace {

struct Verdict {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

// ---- 1: reward exactness ----------------------------------------------------

struct RewardCase {
  std::string text;
  bool label;
  rewards::CountBounds bounds;
  double format, correct, count;
};

std::string claims_body(std::size_t n) {
  std::string s;
  for (std::size_t i = 0; i < n; ++i) {
    if (i) s += ", ";
    s += "attr" + std::to_string(i) + (i % 2 ? ": inhibits" : ": promotes");
  }
  return s;
}

std::string tagged(std::size_t n_claims, const std::string& answer) {
  return "<think>\nreasoning\n</think>\n<name>\n" + claims_body(n_claims) + "\n</name>\n<answer>\n" + answer +
         "\n</answer>";
}

std::vector<RewardCase> reward_suite() {
  const rewards::CountBounds def{3, 10}, wide15{3, 15}, wide20{3, 20};
  std::vector<RewardCase> c;
  // attribute counts under the default bounds
  for (auto [n, r] : std::vector<std::pair<std::size_t, double>>{
           {0, -1}, {1, -1}, {2, -1}, {3, 0}, {4, 0}, {7, 0}, {9, 0}, {10, 0}, {11, -1}, {12, -1}, {15, -1}, {20, -1}}) {
    c.push_back({tagged(n, "True"), true, def, 1, 2, r});
  }
  // widened upper bounds
  for (auto [n, r] : std::vector<std::pair<std::size_t, double>>{
           {2, -1}, {3, 0}, {10, 0}, {14, 0}, {15, 0}, {16, -1}, {20, -1}}) {
    c.push_back({tagged(n, "True"), true, wide15, 1, 2, r});
  }
  for (auto [n, r] : std::vector<std::pair<std::size_t, double>>{
           {2, -1}, {3, 0}, {15, 0}, {19, 0}, {20, 0}, {21, -1}, {25, -1}}) {
    c.push_back({tagged(n, "True"), true, wide20, 1, 2, r});
  }
  // answers
  c.push_back({tagged(5, "True"), true, def, 1, 2, 0});
  c.push_back({tagged(5, "False"), false, def, 1, 2, 0});
  c.push_back({tagged(5, "True"), false, def, 1, 0, 0});
  c.push_back({tagged(5, "False"), true, def, 1, 0, 0});
  c.push_back({tagged(5, "true."), true, def, 1, 2, 0});
  c.push_back({tagged(5, "FALSE"), false, def, 1, 2, 0});
  c.push_back({tagged(5, "maybe"), true, def, -2, 0, 0});
  c.push_back({tagged(5, "1"), true, def, -2, 0, 0});
  c.push_back({tagged(5, ""), true, def, -2, 0, 0});
  // tag structure
  const std::string body = "<think>x</think><name>" + claims_body(4) + "</name>";
  c.push_back({body + "<answer>True</answer>", true, def, 1, 2, 0});
  c.push_back({"<think>x</think><name>" + claims_body(4) + "</name>True", true, def, -2, 0, 0});
  c.push_back({"<name>" + claims_body(4) + "</name><answer>True</answer>", true, def, -2, 2, 0});
  c.push_back({"<think>x</think><answer>True</answer>", true, def, -2, 2, -1});
  c.push_back({"<think>x</think><answer>True</answer><name>" + claims_body(4) + "</name>", true, def, -2, 2, 0});
  c.push_back({body + "<answer>True</answer><answer>False</answer>", true, def, -2, 2, 0});
  c.push_back({body + "<Answer>True</Answer>", true, def, -2, 0, 0});
  c.push_back({"plain text True", true, def, -2, 0, -1});
  c.push_back({"", false, def, -2, 0, -1});
  c.push_back({"<think>x</think><name>attr0: maybe, attr1: promotes, attr2: inhibits</name><answer>True</answer>", true,
               def, -2, 2, -1});
  c.push_back({"<think>x</think><name>a, b, c</name><answer>False</answer>", false, def, 1, 2, 0});
  c.push_back({"<think>x</think><name>a: promotes, , c: inhibits</name><answer>False</answer>", false, def, -2, 2, -1});
  c.push_back({"<think>x</think><name></name><answer>False</answer>", false, def, 1, 2, -1});
  c.push_back({"<think>x</think><name>a: improve, b: not improve, c: inhibit.</name><answer>True</answer>", true, def,
               1, 2, 0});
  c.push_back({"<think>x<think>y</think><name>" + claims_body(3) + "</name><answer>True</answer>", true, def, -2, 2,
               0});
  return c;
}

Verdict check_rewards() {
  const auto suite = reward_suite();
  std::size_t bad = 0;
  std::string first;
  for (std::size_t i = 0; i < suite.size(); ++i) {
    const auto& k = suite[i];
    const auto p = response::parse_response(k.text, TaskKind::Classification);
    const double f = rewards::reward_format(p);
    const double c = rewards::reward_correct(p, response::Answer{k.label});
    const double n = rewards::reward_count(p, k.bounds);
    if (f != k.format || c != k.correct || n != k.count) {
      if (bad++ == 0) {
        first = " first mismatch case " + std::to_string(i) + " got " + fmt("%g", f) + "/" + fmt("%g", c) + "/" +
                fmt("%g", n);
      }
    }
  }
  return {suite.size() == 50 && bad == 0,
          std::to_string(suite.size()) + " cases, " + std::to_string(bad) + " mismatches" + first};
}

// ---- 2: case-study fixtures -------------------------------------------------

Verdict check_fixtures() {
  const auto records = response::load_corpus(data_dir() / "fixtures" / "case_studies.jsonl");
  std::size_t checked = 0, bad = 0;
  std::string first;
  for (const char* table_name : {"gpt4o-default", "r1-default"}) {
    const auto table = rewards::RangeTable::bundled(table_name);
    for (const auto& rec : records) {
      const auto mol = chem::parse_smiles(rec.smiles).largest_component();
      const auto parsed = response::parse_response(rec.response_text, rec.task);
      const auto b = rewards::total_reward(parsed, mol, rec.label, rec.target, table);
      const auto& exp = rec.extra.at("expected");
      const bool ok = rewards::matches_printed(b.format, exp.at("format").get<std::string>()) &&
                      rewards::matches_printed(b.correct, exp.at("correct").get<std::string>()) &&
                      rewards::matches_printed(b.count, exp.at("count").get<std::string>()) &&
                      rewards::matches_printed(b.rational, exp.at("rational").get<std::string>());
      ++checked;
      if (!ok && bad++ == 0) first = " first mismatch " + rec.id + " with " + table_name;
    }
  }
  return {checked == 24 && bad == 0,
          std::to_string(checked) + " transcript/table pairs, " + std::to_string(bad) + " mismatches" + first};
}

// ---- 3: GRPO math -------------------------------------------------------------

Verdict check_grpo() {
  std::mt19937_64 rng(2024);
  std::uniform_int_distribution<int> size_dist(2, 16);
  std::normal_distribution<double> normal(0.0, 1.0);
  constexpr int kGroups = 10000;
  constexpr double kFdStep = 1e-5;
  constexpr double kKinkMargin = 1e-3;
  double worst_mean = 0, worst_var = 0, worst_affine = 0, worst_grad = 0;
  bool kl_ok = true;
  std::size_t non_degenerate = 0, grad_checks = 0;
  for (int g = 0; g < kGroups; ++g) {
    const auto n = static_cast<std::size_t>(size_dist(rng));
    std::vector<double> r(n);
    for (auto& x : r) x = (g % 4 == 0) ? static_cast<double>(rng() % 3) : normal(rng) * 3.0;
    const auto a = grpo::compute_advantages(r);
    if (grpo::reward_std(r) >= 1e-8) {
      ++non_degenerate;
      double mean = 0, var = 0;
      for (double v : a) mean += v;
      mean /= static_cast<double>(n);
      for (double v : a) var += (v - mean) * (v - mean);
      var /= static_cast<double>(n);
      worst_mean = std::max(worst_mean, std::abs(mean));
      worst_var = std::max(worst_var, std::abs(var - 1.0));
      const double scale = std::exp(normal(rng) * 2.0), shift = normal(rng) * 100.0;
      auto rt = r;
      for (auto& x : rt) x = scale * x + shift;
      const auto at = grpo::compute_advantages(rt);
      for (std::size_t i = 0; i < n; ++i) worst_affine = std::max(worst_affine, std::abs(at[i] - a[i]));
    }

    grpo::TrajectoryGroup group;
    std::vector<double> logp_new(n);
    for (std::size_t i = 0; i < n; ++i) {
      grpo::ResponseRecord rec;
      rec.reward_total = r[i];
      rec.logp_old = -std::abs(normal(rng)) * 20.0;
      rec.logp_ref = rec.logp_old + normal(rng) * 0.5;
      logp_new[i] = rec.logp_old + normal(rng) * 0.3;
      group.responses.push_back(rec);
      const double kl = grpo::kl_estimate(logp_new[i], rec.logp_ref);
      if (!(kl >= 0.0) || grpo::kl_estimate(rec.logp_ref, rec.logp_ref) != 0.0 ||
          (logp_new[i] != rec.logp_ref && kl <= 0.0)) {
        kl_ok = false;
      }
    }
    grpo::OptimConfig cfg;
    cfg.algorithm = g % 2 ? grpo::Algorithm::DAPO : grpo::Algorithm::GRPO;
    grpo::fill_advantages(group, cfg);
    const auto grad = grpo::grpo_objective_gradient(group, logp_new, cfg);
    for (std::size_t i = 0; i < n; ++i) {
      const double rho = std::exp(logp_new[i] - group.responses[i].logp_old);
      if (std::abs(rho - cfg.clip_low()) < kKinkMargin || std::abs(rho - cfg.clip_high()) < kKinkMargin) continue;
      auto up = logp_new, down = logp_new;
      up[i] += kFdStep;
      down[i] -= kFdStep;
      const double fd =
          (grpo::grpo_objective(group, up, cfg) - grpo::grpo_objective(group, down, cfg)) / (2.0 * kFdStep);
      const double rel = std::abs(fd - grad[i]) / std::max(std::abs(grad[i]), 1e-3);
      worst_grad = std::max(worst_grad, rel);
      ++grad_checks;
    }
  }
  const bool pass = worst_mean < 1e-9 && worst_var < 1e-9 && worst_affine < 1e-9 && kl_ok && worst_grad < 1e-5;
  return {pass, std::to_string(kGroups) + " groups (" + std::to_string(non_degenerate) + " non-degenerate), max|mean|=" +
                    fmt("%.2e", worst_mean) + " max|var-1|=" + fmt("%.2e", worst_var) + " affine=" +
                    fmt("%.2e", worst_affine) + " kl " + (kl_ok ? "ok" : "violated") + ", " +
                    std::to_string(grad_checks) + " gradient checks max rel err " + fmt("%.2e", worst_grad)};
}

// ---- 4: simulator convergence ---------------------------------------------------

Verdict check_simulator() {
  const auto table = rewards::RangeTable::bundled("gpt4o-default");
  const auto dataset = policysim::load_sim_dataset(policysim::bundled_sim_dataset());
  constexpr std::size_t kFinalWindow = 50;
  constexpr std::size_t kProgressWindow = 50;
  constexpr std::size_t kSmoothing = 100;
  constexpr std::size_t kMonotoneSpan = 500;
  bool pass = true;
  std::string detail;
  for (auto algo : {grpo::Algorithm::GRPO, grpo::Algorithm::DAPO}) {
    policysim::TrainConfig cfg;
    cfg.algorithm = algo;
    const auto curves = policysim::train(cfg, dataset, table);
    const auto format = curves.column(&policysim::StepStats::format);
    const auto count = curves.column(&policysim::StepStats::count);
    const auto rational = curves.column(&policysim::StepStats::rational);
    const auto total = curves.column(&policysim::StepStats::total);
    auto tail_mean = [&](const std::vector<double>& s) {
      double sum = 0;
      for (std::size_t i = s.size() - kFinalWindow; i < s.size(); ++i) sum += s[i];
      return sum / kFinalWindow;
    };
    const double f_final = tail_mean(format), c_final = tail_mean(count);
    const auto t_f = policysim::steps_to_fraction(format, 0.95, kProgressWindow);
    const auto t_c = policysim::steps_to_fraction(count, 0.95, kProgressWindow);
    const auto t_r = policysim::steps_to_fraction(rational, 0.95, kProgressWindow);
    const auto ma = policysim::moving_average(total, kSmoothing);
    std::size_t dips = 0;
    double worst_dip = 0;
    for (std::size_t i = ma.size() - kMonotoneSpan + 1; i < ma.size(); ++i) {
      if (ma[i] < ma[i - 1]) {
        ++dips;
        worst_dip = std::max(worst_dip, ma[i - 1] - ma[i]);
      }
    }
    const bool levels = f_final >= 0.9 && c_final >= -0.05;
    const bool order = t_f < t_r && t_c < t_r;
    const bool monotone = dips == 0;
    pass = pass && levels && order && monotone;
    if (!detail.empty()) detail += "; ";
    detail += grpo::to_string(algo) + ": format " + fmt("%.3f", f_final) + " count " + fmt("%.3f", c_final) +
              (levels ? " ok" : " LOW") + ", t95 format/count/rational " + std::to_string(t_f) + "/" +
              std::to_string(t_c) + "/" + std::to_string(t_r) + (order ? " ok" : " WRONG ORDER") + ", MA" +
              std::to_string(kSmoothing) + " dips " + std::to_string(dips) + " (max " + fmt("%.1e", worst_dip) + ")" +
              (monotone ? " ok" : " NOT MONOTONE");
  }
  return {pass, detail};
}

// ---- 5: descriptor oracles ---------------------------------------------------------

Verdict check_descriptors() {
  const auto& reg = descriptors::Registry::bundled();
  auto value = [&](const char* smiles, const char* name) {
    return descriptors::compute_value(chem::parse_smiles(smiles), *reg.find(name));
  };
  struct Oracle {
    const char* smiles;
    const char* name;
    double expected, tol;
  };
  const Oracle oracles[] = {
      {"O", "MolWt", 18.015, 0.01},
      {"c1ccccc1", "TPSA", 0.0, 0.0},
      {"c1ccccc1", "NumAromaticRings", 1.0, 0.0},
      {"CCO", "NumHDonors", 1.0, 0.0},
      {"CCO", "NumHAcceptors", 1.0, 0.0},
      {"CC(=O)Oc1ccccc1C(=O)O", "TPSA", 63.60, 0.05},
      {"CN(C(=O)Cc1ccc(Cl)c(Cl)c1)C1CCCC[C@H]1N1CCCC1", "HeavyAtomCount", 24.0, 0.0},
  };
  std::size_t oracle_bad = 0;
  for (const auto& o : oracles) {
    if (std::abs(value(o.smiles, o.name) - o.expected) > o.tol) ++oracle_bad;
  }
  std::vector<const descriptors::DescriptorId*> ids;
  for (const auto& e : reg.entries()) {
    if (e.implemented && descriptors::has_calculator(e.canonical_name)) ids.push_back(&e);
  }
  const char* panel[] = {"CC(=O)Oc1ccccc1C(=O)O", "CN(C(=O)Cc1ccc(Cl)c(Cl)c1)C1CCCC[C@H]1N1CCCC1",
                         "CN1C=NC2=C1C(=O)N(C(=O)N2C)C", "Nc1nc2ccccc2cc1CCC(=O)NCC1CCCCC1",
                         "FC(F)(F)c1ccc(S(=O)(=O)N)cc1", "Clc1ccc2Sc3ccccc3N(CCCN(C)C)c2c1",
                         "O=C1NC(=O)C(c2ccccc2)(c2ccccc2)N1", "OC(=O)c1ccccc1.[Na+]"};
  std::mt19937_64 rng(99);
  constexpr int kPermutations = 500;
  int perm_bad = 0;
  for (int k = 0; k < kPermutations; ++k) {
    const auto base = chem::parse_smiles(panel[static_cast<std::size_t>(k) % std::size(panel)]);
    const auto shuffled = chem::parse_smiles(attrilens::testing::random_smiles(base, rng));
    bool same = chem::scaffold_key(shuffled) == chem::scaffold_key(base);
    for (const auto* id : ids) {
      same = same && std::abs(descriptors::compute_value(shuffled, *id) - descriptors::compute_value(base, *id)) < 1e-9;
    }
    if (!same) ++perm_bad;
  }
  return {oracle_bad == 0 && perm_bad == 0,
          std::to_string(std::size(oracles) - oracle_bad) + "/" + std::to_string(std::size(oracles)) +
              " oracles, " + std::to_string(kPermutations - perm_bad) + "/" + std::to_string(kPermutations) +
              " permutations invariant over " + std::to_string(ids.size()) + " descriptors"};
}

// ---- 6: scaffold split -----------------------------------------------------------------

Verdict check_split() {
  const auto loaded = mlpipe::load_csv(mlpipe::bundled_dataset("bace_standin.csv"), mlpipe::bace_schema());
  const auto& rec = loaded.records;
  const auto s = mlpipe::scaffold_split(rec);
  const auto again = mlpipe::scaffold_split(rec);
  const auto groups = mlpipe::scaffold_groups(rec);
  const long slack = static_cast<long>(groups.front().second.size());
  const long train = static_cast<long>(s.train.size()), valid = static_cast<long>(s.valid.size()),
             test = static_cast<long>(s.test.size());
  const bool sizes = std::abs(train - 1210) <= slack && std::abs(valid - 151) <= slack &&
                     std::abs(test - 152) <= slack;
  std::vector<int> seen(rec.size(), 0);
  std::map<std::string, int> owner;
  bool leak = false;
  int part = 0;
  for (const auto* idx : {&s.train, &s.valid, &s.test}) {
    for (auto i : *idx) {
      ++seen[i];
      const auto key = chem::scaffold_key(rec[i].molecule);
      const auto [it, inserted] = owner.emplace(key, part);
      if (!inserted && it->second != part) leak = true;
    }
    ++part;
  }
  const bool partition = std::all_of(seen.begin(), seen.end(), [](int c) { return c == 1; });
  const bool deterministic = s.train == again.train && s.valid == again.valid && s.test == again.test;
  return {rec.size() == 1513 && sizes && partition && !leak && deterministic,
          "n=" + std::to_string(rec.size()) + " split " + std::to_string(train) + "/" + std::to_string(valid) + "/" +
              std::to_string(test) + " vs 1210/151/152 (slack " + std::to_string(slack) + "), partition " +
              (partition ? "ok" : "broken") + ", leak " + (leak ? "found" : "none") + ", rerun " +
              (deterministic ? "identical" : "differs")};
}

// ---- 7: decision-tree analog -------------------------------------------------------------

Verdict check_dtree() {
  const auto loaded = mlpipe::load_csv(mlpipe::bundled_dataset("bbbp_subset.csv"), mlpipe::bbbp_schema());
  std::vector<response::ParsedResponse> corpus;
  for (const auto& r : response::load_corpus(data_dir() / "corpora" / "toy_bbbp_grpo.jsonl")) {
    corpus.push_back(response::parse_response(r.response_text, r.task));
  }
  const auto ids = mlpipe::top_attributes(corpus, 10);
  mlpipe::ForestConfig cfg;
  const auto rep = mlpipe::run_dtree(loaded.records, ids, cfg, 5);
  const double null_mean = rep.null_mean();
  const bool pass = ids.size() == 10 && rep.test_auc >= 0.65 && null_mean >= 0.4 && null_mean <= 0.6;
  return {pass, std::to_string(loaded.records.size()) + " molecules, " + std::to_string(ids.size()) +
                    " features, test AUC " + fmt("%.4f", rep.test_auc) + " (>= 0.65), permutation null mean " +
                    fmt("%.4f", null_mean) + " over " + std::to_string(rep.null_aucs.size()) + " repeats"};
}

// ---- 8: parser totality and round-trip -------------------------------------------------

Verdict check_parser() {
  std::mt19937_64 rng(8);
  constexpr int kFuzz = 1000000;
  constexpr int kRoundTrips = 10000;
  const std::string alphabet = "<>/thinkamesw:, .TrueFals01\n\"";
  const char* tags[] = {"<think>", "</think>", "<name>", "</name>", "<answer>", "</answer>"};
  int threw = 0;
  std::size_t format_ok = 0;
  std::string s;
  for (int i = 0; i < kFuzz; ++i) {
    s.clear();
    const auto len = rng() % 160;
    while (s.size() < len) {
      const auto pick = rng() % 10;
      if (pick == 0) s += tags[rng() % 6];
      else if (pick < 4) s += static_cast<char>(rng() % 256);
      else s += alphabet[rng() % alphabet.size()];
    }
    try {
      format_ok += response::parse_response(s, i % 2 ? TaskKind::Regression : TaskKind::Classification).format_ok;
    } catch (...) {
      ++threw;
    }
  }
  int mismatched = 0;
  for (int i = 0; i < kRoundTrips; ++i) {
    const auto task = i % 2 ? TaskKind::Regression : TaskKind::Classification;
    const auto parts = attrilens::testing::random_well_formed(rng, task);
    const auto p = response::parse_response(response::render_response(parts), task);
    if (!p.format_ok || !p.claims || *p.claims != *parts.claims || !p.answer || *p.answer != *parts.answer) ++mismatched;
  }
  return {threw == 0 && mismatched == 0,
          std::to_string(kFuzz) + " fuzzed inputs, " + std::to_string(threw) + " threw (" + std::to_string(format_ok) +
              " well formed); " + std::to_string(kRoundTrips - mismatched) + "/" + std::to_string(kRoundTrips) +
              " round-trips exact"};
}

struct Criterion {
  int number;
  const char* name;
  double budget_s;
  std::function<Verdict()> run;
};

}  // namespace

int main(int argc, char** argv) {
  std::set<int> expect_red;
  for (int i = 1; i < argc; ++i) {
    const std::string arg = argv[i];
    if (arg == "--expect-red" && i + 1 < argc) {
      expect_red.insert(std::stoi(argv[++i]));
    } else {
      std::fprintf(stderr, "usage: %s [--expect-red N]...\n", argv[0]);
      return 2;
    }
  }
  const std::vector<Criterion> criteria = {
      {1, "reward exactness", 1.0, check_rewards},
      {2, "case-study fixtures", 1.0, check_fixtures},
      {3, "GRPO math properties", 30.0, check_grpo},
      {4, "simulator convergence", 300.0, check_simulator},
      {5, "descriptor oracles", 10.0, check_descriptors},
      {6, "scaffold split", 30.0, check_split},
      {7, "decision-tree AUC", 120.0, check_dtree},
      {8, "parser totality and round-trip", 120.0, check_parser},
  };
  std::set<int> red;
  for (const auto& c : criteria) {
    const auto t0 = std::chrono::steady_clock::now();
    Verdict v;
    try {
      v = c.run();
    } catch (const std::exception& e) {
      v = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    const bool in_time = secs <= c.budget_s;
    const bool pass = v.pass && in_time;
    if (!pass) red.insert(c.number);
    std::printf("[%s] %d %s: %s [%.2fs of %.0fs%s]\n", pass ? "PASS" : "FAIL", c.number, c.name, v.detail.c_str(), secs,
                c.budget_s, in_time ? "" : ", OVER BUDGET");
    std::fflush(stdout);
  }
  std::printf("%zu/%zu criteria pass\n", criteria.size() - red.size(), criteria.size());
  if (red != expect_red) {
    std::printf("failing set differs from the expected red set\n");
    return 1;
  }
  return 0;
}
