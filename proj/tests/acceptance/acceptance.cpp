// Acceptance suite. Prints one PASS / FAIL / SKIP line per criterion and
// exits nonzero if any criterion fails.

#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "ffa/baselines/de.hpp"
#include "ffa/baselines/oracle.hpp"
#include "ffa/cli/commands.hpp"
#include "ffa/cli/config.hpp"
#include "ffa/cli/gradsuite.hpp"
#include "ffa/data/preprocess.hpp"
#include "ffa/gan/training.hpp"
#include "ffa/targets/target.hpp"
#include "json.hpp"
#include "properties.hpp"

namespace fs = std::filesystem;
using nlohmann::ordered_json;
using namespace ffa;

namespace {

const fs::path kSource = FFA_SOURCE_DIR;
const fs::path kWork = FFA_WORK_DIR;

struct Outcome {
  enum Status { pass, fail, skip } status = fail;
  std::string detail;
};

Outcome verdict(bool ok, std::string detail) {
  return {ok ? Outcome::pass : Outcome::fail, std::move(detail)};
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

std::string fmt(double v, int precision = 4) {
  std::ostringstream os;
  os.precision(precision);
  os << v;
  return os.str();
}

std::vector<ordered_json> json_lines(const std::string& text) {
  std::vector<ordered_json> rows;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty() || line.front() != '{') continue;
    rows.push_back(ordered_json::parse(line, nullptr, false));
  }
  return rows;
}

cli::RunConfig reference_config(const std::string& name,
                                const std::vector<std::string>& overrides = {}) {
  auto c = cli::load_config(kSource / "configs" / (name + ".json"), overrides);
  c.output_dir = kWork / name;
  return c;
}

// Shared between criteria: amplitude audit over every emitted example.
std::size_t g_amplitude_violations = 0;
std::size_t g_audited_rows = 0;

void audit(const ordered_json& row) {
  g_amplitude_violations += row.value("amplitude-violations", std::size_t{0});
  ++g_audited_rows;
}

struct Pipeline {
  bool ran = false;
  bool ok = false;
  ordered_json target;
  ordered_json training;
  ordered_json report;
  double seconds = 0.0;
  std::string error;
};

// train-target, train-attack and evaluate, in process.
Pipeline run_pipeline(const cli::RunConfig& c) {
  Pipeline p;
  p.ran = true;
  fs::remove_all(c.output_dir);
  const auto t0 = std::chrono::steady_clock::now();
  std::ostringstream out, err;
  if (cli::cmd_train_target(c, out, err) != cli::kSuccess) {
    p.error = "train-target failed: " + err.str();
    return p;
  }
  p.target = ordered_json::parse(out.str());
  out.str("");
  const int code = cli::cmd_train_attack(c, out, err);
  if (code != cli::kSuccess && code != cli::kNotConverged) {
    p.error = "train-attack failed: " + err.str();
    return p;
  }
  {
    // The summary is the last line; everything before it is the epoch log.
    const auto rows = json_lines(out.str());
    if (!rows.empty()) p.training = rows.back();
  }
  out.str("");
  if (cli::cmd_evaluate(c, out, err) != cli::kSuccess) {
    p.error = "evaluate failed: " + err.str();
    return p;
  }
  const auto rows = json_lines(out.str());
  if (rows.empty()) {
    p.error = "evaluate printed no report row";
    return p;
  }
  p.report = rows.back();
  audit(p.report);
  p.seconds = seconds_since(t0);
  p.ok = true;
  return p;
}

Pipeline g_mlp;
Pipeline g_tree;

// 1: every layer and loss passes the finite-difference check.
Outcome gradient_suite() {
  const auto t0 = std::chrono::steady_clock::now();
  const auto cases = cli::run_grad_suite(1, 20, 1e-4, 1e-5);
  const double secs = seconds_since(t0);
  std::size_t failed = 0;
  double worst = 0.0;
  std::string first;
  for (const auto& gc : cases) {
    worst = std::max(worst, gc.report.worst);
    if (!gc.report.pass) {
      if (failed++ == 0) first = gc.name + " seed " + std::to_string(gc.seed);
    }
  }
  std::string detail = std::to_string(cases.size()) + " checks over 20 seeds, worst rel err " +
                       fmt(worst) + ", " + fmt(secs, 3) + " s";
  if (failed) detail += ", " + std::to_string(failed) + " failed (first: " + first + ")";
  return verdict(failed == 0 && cases.size() == cli::grad_case_names().size() * 20 && secs < 60.0,
                 detail);
}

// 2: randomized invariants.
Outcome invariant_suite() {
  const auto t0 = std::chrono::steady_clock::now();
  const auto results = testing::run_all_properties(1000, 2024);
  const double secs = seconds_since(t0);
  bool ok = secs < 120.0;
  std::string detail;
  for (const auto& r : results) {
    ok = ok && r.ok() && r.cases >= 1000;
    detail += r.name + " " + std::to_string(r.cases - r.failures) + "/" + std::to_string(r.cases);
    if (!r.ok()) detail += " (" + r.first_failure + ")";
    detail += ", ";
  }
  detail += fmt(secs, 3) + " s";
  return verdict(ok && results.size() == 7, detail);
}

Outcome reference_experiment(Pipeline& p, const std::string& name, double max_acc_star) {
  p = run_pipeline(reference_config(name));
  if (!p.ok) return verdict(false, p.error);
  const double test_acc = p.target.at("test-acc").get<double>();
  const double acc_star = p.report.at("acc*").get<double>();
  const double len = p.report.at("len-mean").get<double>();
  const double bypass = p.report.at("bypass").get<double>();
  const bool ok = test_acc >= 0.95 && acc_star <= max_acc_star && len <= 4.0 && bypass >= 0.75 &&
                  p.seconds <= 600.0;
  return verdict(ok, "test-acc " + fmt(test_acc) + ", acc* " + fmt(acc_star) + " (<= " +
                         fmt(max_acc_star) + "), len " + fmt(len) + "/16, bypass " +
                         fmt(bypass) + ", converged " + (p.training.value("converged", false) ? "yes" : "no") +
                         ", " + fmt(p.seconds, 3) + " s");
}

// 4: amortized generation against DE on the reference MLP target.
Outcome amortization() {
  if (!g_mlp.ok) return verdict(false, "reference MLP pipeline did not complete");
  const auto c = reference_config("reference-mlp");
  std::ostringstream out, err;
  if (cli::cmd_compare(c, out, err) != cli::kSuccess) {
    return verdict(false, "compare failed: " + err.str());
  }
  ordered_json summary;
  for (const auto& row : json_lines(out.str())) {
    if (row.value("attack", "") == "summary") {
      summary = row;
    } else {
      audit(row);
    }
  }
  if (summary.is_null()) return verdict(false, "compare printed no summary");
  const double speedup = summary.at("speedup").get<double>();
  const double gan = summary.at("ffa-gan-bypass").get<double>();
  const double de = summary.at("de-bypass").get<double>();
  return verdict(speedup >= 100.0 && gan >= de,
                 "speedup " + fmt(speedup) + "x (ffa-gan " +
                     fmt(summary.at("ffa-gan-time-per-sample-ms").get<double>()) + " ms, de " +
                     fmt(summary.at("de-time-per-sample-ms").get<double>()) +
                     " ms per sample), bypass ffa-gan " + fmt(gan) + " vs de " + fmt(de) +
                     " at k=3");
}

// 5: DE finds single-feature bypasses the oracle proves exist; no example
// leaves the amplitude cap.
Outcome oracle_equivalence() {
  const auto goal = attack::AttackGoal::targeted(1, 0);
  const auto grid = baselines::default_grid(11);
  std::size_t proven = 0, worst_hits = 100, de_runs = 0;
  std::string worst_case;

  const struct {
    targets::TargetKind kind;
    std::vector<std::size_t> hidden;
    std::uint64_t seed;
  } tiny[] = {{targets::TargetKind::logistic, {}, 31},
              {targets::TargetKind::mlp, {8}, 32},
              {targets::TargetKind::tree, {}, 33}};

  for (const auto& t : tiny) {
    data::SynthSpec spec;
    spec.samples = 300;
    spec.dimension = 6;
    spec.mutable_count = 4;
    spec.margin = 3.0;
    spec.informative = 2;
    spec.seed = t.seed;
    const auto all = data::synth_tabular(spec);
    data::SplitSpec split_spec;
    split_spec.train_fraction = 0.8;
    split_spec.seed = t.seed;
    const auto [train, test] = data::split(all, split_spec);
    targets::TargetHyperparams hp;
    hp.hidden = t.hidden;
    hp.epochs = 30;
    hp.learning_rate = 1e-2;
    hp.batch_size = 32;
    hp.max_depth = 3;
    const auto [model, report] = targets::train_target(t.kind, train, test, hp);
    const auto& mut = test.schema().mutable_indices();

    std::size_t picked = 0;
    for (std::size_t i = 0; i < test.size() && picked < 4; ++i) {
      const auto& s = test[i];
      if (s.label != goal.attack_class) continue;
      const auto probs = model->predict_proba(data::to_matrix(std::span(&s.features, 1)));
      if (argmax_class(probs.row_span(0)) != goal.attack_class) continue;
      const auto proof = baselines::greedy_oracle(*model, s, mut, goal, grid);
      if (!proof.fooled) continue;
      ++picked;
      ++proven;

      std::vector<std::vector<double>> rows;
      std::vector<std::vector<double>> deltas;
      std::size_t hits = 0;
      for (std::uint64_t seed = 0; seed < 100; ++seed) {
        baselines::DEConfig de;
        de.budget = 1;
        de.population = 20;
        de.iterations = 75;
        de.seed = seed;
        const auto r = baselines::de_attack(*model, s, mut, goal, de);
        hits += r.fooled ? 1 : 0;
        rows.push_back(s.features);
        deltas.push_back(r.example.perturbation.delta);
        ++de_runs;
      }
      attack::AttackConstraints audit_limits;
      audit_limits.max_changed = 1.0;
      const auto m = attack::summarize(*model, data::to_matrix(rows), data::to_matrix(deltas),
                                       audit_limits, goal, 0.0);
      g_amplitude_violations += m.amplitude_violations;
      ++g_audited_rows;
      if (hits < worst_hits) {
        worst_hits = hits;
        worst_case = targets::to_string(t.kind) + " test row " + std::to_string(i);
      }
    }
  }

  // A generator with a tighter cap than the data range, so the cap binds.
  {
    const auto c = reference_config("reference-mlp");
    const auto [train, test] = cli::load_data(c);
    auto rng = num::make_rng(5, "audit-generator");
    gan::GeneratorShape shape;
    shape.max_amplitude = 0.25;
    const auto gen = gan::GeneratorNet::create(test.schema(), shape, rng);
    if (g_mlp.ok) {
      const auto model = targets::load_target(c.target_path());
      attack::AttackConstraints limits = c.constraints;
      limits.max_amplitude = 0.25;
      const auto ev = attack::evaluate_attack(gen, *model, test, limits, c.goal);
      g_amplitude_violations += ev.metrics.amplitude_violations;
      ++g_audited_rows;
    }
  }

  const bool ok = proven > 0 && worst_hits >= 95 && g_amplitude_violations == 0;
  std::string detail = std::to_string(proven) + " oracle-proven samples, " +
                       std::to_string(de_runs) + " DE runs, worst " + std::to_string(worst_hits) +
                       "/100";
  if (!worst_case.empty()) detail += " (" + worst_case + ")";
  detail += "; amplitude violations " + std::to_string(g_amplitude_violations) + " over " +
            std::to_string(g_audited_rows) + " audited reports";
  return verdict(ok, detail);
}

// 6: warm-start distillation agreement on held-out data.
Outcome distillation_fidelity() {
  std::string detail;
  bool ok = true;
  for (const std::string name : {"reference-mlp", "reference-tree"}) {
    const auto c = reference_config(name);
    if (!fs::exists(c.target_path())) return verdict(false, name + ": target model missing");
    const auto model = targets::load_target(c.target_path());
    const auto [train, test] = cli::load_data(c);
    auto init = num::make_rng(c.seed, "acceptance-distill-init");
    auto disc = gan::DiscriminatorNet::create(train.dimension(), model->class_count(),
                                              c.discriminator_hidden, init);
    num::Optimizer opt(num::OptimizerRule::adam, c.training.discriminator_lr);
    auto rng = num::make_rng(c.seed, "acceptance-distill");
    gan::warm_start(disc, opt, *model, train, c.training.warm_start_epochs, c.training.batch_size,
                    rng);
    const double agree = gan::agreement(disc, *model, test.features());
    ok = ok && agree >= 0.9;
    if (!detail.empty()) detail += ", ";
    detail += name + " " + fmt(agree) + " after " + std::to_string(c.training.warm_start_epochs) +
              " passes";
  }
  return verdict(ok, detail + " (held-out test split)");
}

// 7: optional image experiment. Needs the four IDX files in FFA_MNIST_DIR.
Outcome image_experiment() {
  const char* dir = std::getenv("FFA_MNIST_DIR");
  if (dir == nullptr || *dir == '\0') return {Outcome::skip, "FFA_MNIST_DIR not set"};
  const fs::path root = dir;
  const char* files[] = {"train-images-idx3-ubyte", "train-labels-idx1-ubyte",
                         "t10k-images-idx3-ubyte", "t10k-labels-idx1-ubyte"};
  for (const char* f : files) {
    if (!fs::exists(root / f)) return {Outcome::skip, (root / f).string() + " not found"};
  }
  const auto c = reference_config(
      "mnist-mlp", {"data.idx.train_images=" + (root / files[0]).string(),
                    "data.idx.train_labels=" + (root / files[1]).string(),
                    "data.idx.test_images=" + (root / files[2]).string(),
                    "data.idx.test_labels=" + (root / files[3]).string()});
  const auto p = run_pipeline(c);
  if (!p.ok) return verdict(false, p.error);
  const double test_acc = p.target.at("test-acc").get<double>();
  const double acc_star = p.report.at("acc*").get<double>();
  const double len = p.report.at("len-mean").get<double>();
  return verdict(test_acc >= 0.97 && acc_star <= 0.10 && len <= 60.0,
                 "test-acc " + fmt(test_acc) + ", acc* " + fmt(acc_star) + ", len " + fmt(len) +
                     "/784, " + fmt(p.seconds, 3) + " s");
}

}  // namespace

int main() {
  fs::create_directories(kWork);
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria = {
      {"1 gradient suite", gradient_suite},
      {"2 invariant suite", invariant_suite},
      {"3a reference attack, mlp target",
       [] { return reference_experiment(g_mlp, "reference-mlp", 0.20); }},
      {"3b reference attack, tree target",
       [] { return reference_experiment(g_tree, "reference-tree", 0.30); }},
      {"4 amortization vs differential evolution", amortization},
      {"5 oracle equivalence and amplitude audit", oracle_equivalence},
      {"6 distillation fidelity", distillation_fidelity},
      {"7 image experiment (optional data)", image_experiment},
  };
  bool failed = false;
  for (const auto& [name, run] : criteria) {
    Outcome o;
    try {
      o = run();
    } catch (const std::exception& e) {
      o = verdict(false, std::string("exception: ") + e.what());
    }
    const char* tag = o.status == Outcome::pass ? "PASS" : o.status == Outcome::skip ? "SKIP" : "FAIL";
    failed = failed || o.status == Outcome::fail;
    std::cout << tag << "  " << name << ": " << o.detail << std::endl;
  }
  return failed ? 1 : 0;
}
