#pragma once

#include <ostream>
#include <string>
#include <vector>

#include "ffa/attack/evaluate.hpp"
#include "ffa/baselines/de.hpp"
#include "ffa/cli/config.hpp"
#include "json.hpp"

namespace ffa::cli {

enum ExitCode : int { kSuccess = 0, kRuntimeFailure = 1, kInvalidInput = 2, kNotConverged = 3 };

inline constexpr int kReportFormatVersion = 1;

// One report row. Field order: model-kind, goal, acc, acc*, len-mean,
// bypass, time-per-sample-ms, seed, then attack, samples, audit fields,
// config-digest and format-version.
nlohmann::ordered_json report_row(const RunConfig& config, const std::string& attack_name,
                                  const attack::AttackMetrics& metrics);
// Adds queries, budget-k and iterations to a DE row.
nlohmann::ordered_json de_report_row(const RunConfig& config, const attack::AttackMetrics& metrics,
                                     std::size_t queries_per_sample);

// Each command returns an ExitCode. Errors are reported on `err`; report rows
// go to `out` as well as the output directory.
int cmd_train_target(const RunConfig& config, std::ostream& out, std::ostream& err);
int cmd_train_attack(const RunConfig& config, std::ostream& out, std::ostream& err);
int cmd_evaluate(const RunConfig& config, std::ostream& out, std::ostream& err);
int cmd_compare(const RunConfig& config, std::ostream& out, std::ostream& err);
int cmd_grad_check(const RunConfig& config, std::ostream& out, std::ostream& err);

// Parses argv, loads the config and dispatches. Maps exceptions to exit codes:
// invalid config / input / model files give 2, everything else 1.
int run_cli(int argc, char** argv, std::ostream& out, std::ostream& err);

}  // namespace ffa::cli
