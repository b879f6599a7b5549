#include "ffa/cli/commands.hpp"

#include <chrono>
#include <filesystem>
#include <fstream>

#include "CLI11.hpp"
#include "ffa/attack/perturbation.hpp"
#include "ffa/cli/gradsuite.hpp"
#include "ffa/error.hpp"
#include "ffa/gan/training.hpp"
#include "ffa/numerics/random.hpp"

namespace ffa::cli {

namespace fs = std::filesystem;
using nlohmann::ordered_json;

namespace {

// Rounded so rows diff cleanly; wall time is the only field expected to vary.
double tidy(double v) { return std::round(v * 1e9) / 1e9; }

void ensure_dir(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw Error("cannot create output directory " + dir.string() + ": " + ec.message());
}

void require_file(const fs::path& p, const std::string& what) {
  if (!fs::exists(p)) throw ConfigError(what + " not found: " + p.string());
}

void append_line(const fs::path& path, const std::string& line) {
  std::ofstream os(path, std::ios::app);
  if (!os) throw Error("cannot write " + path.string());
  os << line << '\n';
}

std::string kind_name(const RunConfig& c) { return targets::to_string(c.target_kind); }

data::Dataset attack_subset(const data::Dataset& d, const attack::AttackGoal& goal,
                            std::size_t limit = 0) {
  auto subset = d.with_label(goal.attack_class);
  if (subset.empty()) throw ContractError("no attack-class samples in the evaluation split");
  if (limit > 0 && subset.size() > limit) {
    std::vector<std::size_t> idx(limit);
    for (std::size_t i = 0; i < limit; ++i) idx[i] = i;
    subset = subset.subset(idx);
  }
  return subset;
}

std::unique_ptr<targets::TargetModel> load_checked_target(const RunConfig& c) {
  require_file(c.target_path(), "target model");
  return targets::load_target(c.target_path());
}

}  // namespace

ordered_json report_row(const RunConfig& c, const std::string& attack_name,
                        const attack::AttackMetrics& m) {
  ordered_json j;
  j["model-kind"] = kind_name(c);
  j["goal"] = c.goal.describe();
  j["acc"] = tidy(m.accuracy_before);
  j["acc*"] = tidy(m.accuracy_after);
  j["len-mean"] = tidy(m.mean_changed);
  j["bypass"] = tidy(m.bypass);
  j["time-per-sample-ms"] = m.seconds_per_sample * 1e3;
  j["seed"] = c.seed;
  j["attack"] = attack_name;
  j["samples"] = m.samples;
  j["detection-before"] = tidy(m.detection_before);
  j["detection-after"] = tidy(m.detection_after);
  j["amplitude-violations"] = m.amplitude_violations;
  j["budget-violation-fraction"] = tidy(m.budget_violation_fraction);
  j["config-digest"] = c.digest;
  j["format-version"] = kReportFormatVersion;
  return j;
}

ordered_json de_report_row(const RunConfig& c, const attack::AttackMetrics& m,
                           std::size_t queries_per_sample) {
  auto j = report_row(c, "de", m);
  j["queries"] = queries_per_sample;
  j["budget-k"] = c.compare.de.budget;
  j["iterations"] = c.compare.de.iterations;
  return j;
}

int cmd_train_target(const RunConfig& c, std::ostream& out, std::ostream& err) {
  auto [train, test] = load_data(c);
  auto [model, report] = targets::train_target(c.target_kind, train, test, c.target);
  ensure_dir(c.output_dir);
  targets::save_target(*model, c.target_path());
  ordered_json j;
  j["model-kind"] = kind_name(c);
  j["train-acc"] = tidy(report.train_accuracy);
  j["test-acc"] = tidy(report.test_accuracy);
  j["wall-seconds"] = report.wall_seconds;
  j["train-samples"] = train.size();
  j["test-samples"] = test.size();
  j["seed"] = c.seed;
  j["config-digest"] = c.digest;
  std::ofstream(c.target_report_path()) << j.dump(2) << '\n';
  out << j.dump() << '\n';
  err << "target saved to " << c.target_path().string() << '\n';
  return kSuccess;
}

int cmd_train_attack(const RunConfig& c, std::ostream& out, std::ostream& err) {
  const auto target = load_checked_target(c);
  auto [train, test] = load_data(c);
  (void)test;
  if (target->input_dim() != train.dimension()) {
    throw DimensionError("target expects " + std::to_string(target->input_dim()) +
                         " features, data has " + std::to_string(train.dimension()));
  }
  auto gen_rng = num::make_rng(c.seed, "gan-init-generator");
  auto disc_rng = num::make_rng(c.seed, "gan-init-discriminator");
  auto gen = gan::GeneratorNet::create(train.schema(), c.generator, gen_rng);
  auto disc = gan::DiscriminatorNet::create(train.dimension(), target->class_count(),
                                            c.discriminator_hidden, disc_rng);
  const auto schedule = c.schedule.build();

  ensure_dir(c.output_dir);
  std::ofstream log(c.training_log_path(), std::ios::trunc);
  if (!log) throw Error("cannot write " + c.training_log_path().string());
  const auto start = std::chrono::steady_clock::now();
  const auto result = gan::train_attack(
      gen, disc, *target, train, c.goal, schedule, c.training, [&](const gan::EpochRecord& r) {
        log << gan::to_log_line(r) << '\n';
        if ((r.epoch + 1) % 250 == 0) {
          err << "epoch " << r.epoch + 1 << " bypass " << r.val_bypass << " len "
              << r.val_mean_l0 << '\n';
        }
      });
  log.close();
  const double seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  gen.save(c.generator_path());
  disc.save(c.discriminator_path());

  ordered_json j;
  j["converged"] = result.converged;
  j["epochs-run"] = result.epochs_run;
  j["selected-epoch"] = result.selected_epoch;
  j["warm-start-agreement"] = tidy(result.warm_start_agreement);
  const auto& last = result.log.at(result.selected_epoch);
  j["val-bypass"] = tidy(last.val_bypass);
  j["val-len-mean"] = tidy(last.val_mean_l0);
  j["wall-seconds"] = seconds;
  j["seed"] = c.seed;
  j["config-digest"] = c.digest;
  out << j.dump() << '\n';
  if (!result.converged) {
    err << "stop condition not met after " << result.epochs_run
        << " epochs; saved the best generator (epoch " << result.selected_epoch << ")\n";
    return kNotConverged;
  }
  return kSuccess;
}

int cmd_evaluate(const RunConfig& c, std::ostream& out, std::ostream&) {
  const auto target = load_checked_target(c);
  require_file(c.generator_path(), "generator");
  const auto gen = gan::GeneratorNet::load(c.generator_path());
  auto [train, test] = load_data(c);
  (void)train;
  if (gen.dimension() != test.dimension() || target->input_dim() != test.dimension()) {
    throw DimensionError("generator expects " + std::to_string(gen.dimension()) +
                         " features, target " + std::to_string(target->input_dim()) +
                         ", data has " + std::to_string(test.dimension()));
  }
  const auto originals = attack_subset(test, c.goal);
  const auto ev = attack::evaluate_attack(gen, *target, originals, c.constraints, c.goal);
  const auto row = report_row(c, "ffa-gan", ev.metrics);
  ensure_dir(c.output_dir);
  append_line(c.report_path(), row.dump());
  out << row.dump() << '\n';
  return kSuccess;
}

int cmd_compare(const RunConfig& c, std::ostream& out, std::ostream& err) {
  const auto target = load_checked_target(c);
  require_file(c.generator_path(), "generator");
  const auto gen = gan::GeneratorNet::load(c.generator_path());
  auto [train, test] = load_data(c);
  (void)train;
  if (gen.dimension() != test.dimension() || target->input_dim() != test.dimension()) {
    throw DimensionError("generator, target and data disagree on dimension");
  }
  const auto originals = attack_subset(test, c.goal, c.compare.samples);
  const num::Tensor x = originals.features();

  const auto ev = attack::evaluate_attack(gen, *target, x, c.constraints, c.goal);
  auto strict = c.constraints;
  strict.truncate_top_k = true;
  strict.max_changed = static_cast<double>(c.compare.de.budget);
  const auto ev_top = attack::evaluate_attack(gen, *target, x, strict, c.goal);

  CountingBlackBox counted(*target);
  const auto results = baselines::de_attack_batch(counted, originals, c.goal, c.compare.de);
  num::Tensor deltas = num::Tensor::matrix(x.rows(), x.cols());
  double de_seconds = 0.0;
  std::size_t reported_queries = 0;
  for (std::size_t i = 0; i < results.size(); ++i) {
    const auto& d = results[i].example.perturbation.delta;
    std::copy(d.begin(), d.end(), deltas.row_span(i).begin());
    de_seconds += results[i].seconds;
    reported_queries += results[i].queries;
  }
  if (reported_queries != counted.queries()) {
    throw Error("DE query accounting mismatch: reported " + std::to_string(reported_queries) +
                ", counted " + std::to_string(counted.queries()));
  }
  const auto de_metrics = attack::summarize(*target, x, deltas, c.constraints, c.goal, de_seconds);

  const auto gan_row = report_row(c, "ffa-gan", ev.metrics);
  auto top_row = report_row(c, "ffa-gan-top-k", ev_top.metrics);
  top_row["budget-k"] = c.compare.de.budget;
  const auto de_row = de_report_row(c, de_metrics, reported_queries / results.size());
  ordered_json summary;
  summary["attack"] = "summary";
  summary["samples"] = results.size();
  summary["ffa-gan-time-per-sample-ms"] = ev.metrics.seconds_per_sample * 1e3;
  summary["de-time-per-sample-ms"] = de_metrics.seconds_per_sample * 1e3;
  summary["speedup"] = ev.metrics.seconds_per_sample > 0.0
                           ? de_metrics.seconds_per_sample / ev.metrics.seconds_per_sample
                           : 0.0;
  summary["ffa-gan-acc*"] = tidy(ev.metrics.accuracy_after);
  summary["de-acc*"] = tidy(de_metrics.accuracy_after);
  summary["ffa-gan-bypass"] = tidy(ev.metrics.bypass);
  summary["de-bypass"] = tidy(de_metrics.bypass);
  summary["seed"] = c.seed;
  summary["config-digest"] = c.digest;

  ensure_dir(c.output_dir);
  std::ofstream os(c.compare_path(), std::ios::trunc);
  const std::vector<const ordered_json*> rows{&gan_row, &top_row, &de_row, &summary};
  for (const auto* row : rows) {
    os << row->dump() << '\n';
    out << row->dump() << '\n';
  }
  err << "compared on " << results.size() << " samples\n";
  return kSuccess;
}

int cmd_grad_check(const RunConfig& c, std::ostream& out, std::ostream&) {
  const auto cases = run_grad_suite(c.seed, c.grad_check.seeds, c.grad_check.tolerance,
                                    c.grad_check.step);
  bool all = true;
  for (const auto& gc : cases) {
    ordered_json j;
    j["case"] = gc.name;
    j["seed"] = gc.seed;
    j["worst-relative-error"] = gc.report.worst;
    j["pass"] = gc.report.pass;
    out << j.dump() << '\n';
    all = all && gc.report.pass;
  }
  return all ? kSuccess : kRuntimeFailure;
}

int run_cli(int argc, char** argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Few-feature adversarial attacks with a masked GAN generator"};
  app.require_subcommand(1);
  std::string config_path;
  std::vector<std::string> overrides;

  struct Entry {
    const char* name;
    const char* help;
    int (*fn)(const RunConfig&, std::ostream&, std::ostream&);
  };
  const Entry entries[] = {
      {"train-target", "Train the black-box target classifier", cmd_train_target},
      {"train-attack", "Train the attack generator against a saved target", cmd_train_attack},
      {"evaluate", "Evaluate the saved generator on the test split", cmd_evaluate},
      {"compare", "Compare the generator with the differential-evolution attack", cmd_compare},
      {"grad-check", "Check analytic gradients against finite differences", cmd_grad_check},
  };
  std::vector<std::pair<CLI::App*, const Entry*>> subs;
  for (const auto& e : entries) {
    auto* sub = app.add_subcommand(e.name, e.help);
    sub->add_option("config", config_path, "JSON run config")->required();
    sub->add_option("--set", overrides, "Override a config key: key.path=value")->take_all();
    subs.emplace_back(sub, &e);
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::ParseError& e) {
    app.exit(e, out, err);
    return kInvalidInput;
  }

  try {
    const RunConfig config = load_config(config_path, overrides);
    for (const auto& [sub, entry] : subs) {
      if (sub->parsed()) return entry->fn(config, out, err);
    }
    return kInvalidInput;
  } catch (const ConfigError& e) {
    err << "invalid config: " << e.what() << '\n';
    return kInvalidInput;
  } catch (const ParseError& e) {
    err << "invalid input: " << e.what() << '\n';
    return kInvalidInput;
  } catch (const FormatError& e) {
    err << "invalid model file: " << e.what() << '\n';
    return kInvalidInput;
  } catch (const DimensionError& e) {
    err << "dimension mismatch: " << e.what() << '\n';
    return kInvalidInput;
  } catch (const ContractError& e) {
    err << "invalid input: " << e.what() << '\n';
    return kInvalidInput;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kRuntimeFailure;
  }
}

}  // namespace ffa::cli
