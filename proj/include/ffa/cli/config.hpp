#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "ffa/attack/goal.hpp"
#include "ffa/baselines/de.hpp"
#include "ffa/data/dataset.hpp"
#include "ffa/data/preprocess.hpp"
#include "ffa/gan/networks.hpp"
#include "ffa/gan/schedule.hpp"
#include "ffa/gan/training.hpp"
#include "ffa/targets/target.hpp"
#include "json.hpp"

namespace ffa::cli {

// Environment variable that replaces the config's output_dir when set.
inline constexpr const char* kOutputDirEnv = "FFA_OUTPUT_DIR";

enum class DataSource { synthetic, tabular, idx };

struct TabularSource {
  std::filesystem::path path;
  data::FeatureSchema schema;
  char delimiter = ',';
};

struct IdxSource {
  std::filesystem::path train_images;
  std::optional<std::filesystem::path> train_labels;
  std::optional<std::filesystem::path> test_images;
  std::optional<std::filesystem::path> test_labels;
  std::optional<std::size_t> train_limit;
  std::optional<std::size_t> test_limit;
};

struct DataConfig {
  DataSource source = DataSource::synthetic;
  data::SynthSpec synthetic;
  TabularSource tabular;
  IdxSource idx;
  double train_fraction = 0.8;
  bool stratified = false;
};

struct ScheduleConfig {
  gan::StopCondition stop;
  // Either explicit phases (start epochs) or the six-phase ladder scaled to max_epochs.
  std::vector<gan::Phase> phases;
  std::vector<gan::LossWeights> ladder;
  gan::PhaseSchedule build() const;
};

struct CompareConfig {
  std::size_t samples = 20;
  baselines::DEConfig de;
};

struct GradCheckConfig {
  std::size_t seeds = 20;
  double tolerance = 1e-4;
  double step = 1e-5;
};

struct RunConfig {
  std::uint64_t seed = 0;
  std::filesystem::path output_dir = "out";
  DataConfig data;
  targets::TargetKind target_kind = targets::TargetKind::mlp;
  targets::TargetHyperparams target;
  attack::AttackGoal goal;
  attack::AttackConstraints constraints;
  gan::GeneratorShape generator;
  std::vector<std::size_t> discriminator_hidden = {128, 128};
  gan::TrainingOptions training;
  ScheduleConfig schedule;
  CompareConfig compare;
  GradCheckConfig grad_check;

  // Hex FNV-1a of the config file bytes followed by each override line.
  std::string digest;
  nlohmann::ordered_json effective;  // config after overrides

  std::filesystem::path target_path() const { return output_dir / "target.model"; }
  std::filesystem::path generator_path() const { return output_dir / "generator.model"; }
  std::filesystem::path discriminator_path() const { return output_dir / "discriminator.model"; }
  std::filesystem::path training_log_path() const { return output_dir / "training_log.jsonl"; }
  std::filesystem::path report_path() const { return output_dir / "report.jsonl"; }
  std::filesystem::path compare_path() const { return output_dir / "compare.jsonl"; }
  std::filesystem::path target_report_path() const { return output_dir / "target_report.json"; }
};

std::string digest_hex(std::uint64_t value);

// Parses a JSON config. `overrides` are "dotted.key=value" strings applied
// before validation; values parse as JSON when they can, otherwise as a
// string. Relative data paths resolve against the config file's directory.
// Throws ConfigError naming the offending key on any invalid or unknown entry.
RunConfig load_config(const std::filesystem::path& path,
                      const std::vector<std::string>& overrides = {});
RunConfig parse_config(const nlohmann::ordered_json& doc, const std::filesystem::path& base_dir);

// Builds the (train, test) split described by the config; deterministic in
// the seed. Train and test are scaled to [0,1].
std::pair<data::Dataset, data::Dataset> load_data(const RunConfig& config);

}  // namespace ffa::cli
