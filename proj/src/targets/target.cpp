#include "ffa/targets/target.hpp"

#include <chrono>
#include <fstream>
#include <set>

#include "ffa/error.hpp"
#include "ffa/numerics/serialize.hpp"

namespace ffa::targets {

TreeModel read_tree_body(std::istream& is);

std::string to_string(TargetKind k) {
  switch (k) {
    case TargetKind::logistic: return "logistic";
    case TargetKind::mlp: return "mlp";
    case TargetKind::tree: return "tree";
  }
  return "unknown";
}

TargetKind target_kind_from_string(const std::string& name) {
  if (name == "logistic") return TargetKind::logistic;
  if (name == "mlp") return TargetKind::mlp;
  if (name == "tree") return TargetKind::tree;
  throw ConfigError("unknown target kind '" + name + "' (expected logistic, mlp or tree)");
}

std::pair<std::unique_ptr<TargetModel>, TrainReport> train_target(TargetKind kind,
                                                                  const data::Dataset& train,
                                                                  const data::Dataset& test,
                                                                  const TargetHyperparams& hp) {
  std::set<int> present;
  for (const auto& s : train.samples()) present.insert(s.label);
  if (present.size() < 2) throw TrainingError("training data contains fewer than two classes");

  const auto t0 = std::chrono::steady_clock::now();
  std::unique_ptr<TargetModel> model;
  if (kind == TargetKind::tree) {
    model = std::make_unique<TreeModel>(fit_tree(train, hp));
  } else {
    model = std::make_unique<NetworkModel>(fit_network(kind, train, hp));
  }
  TrainReport report;
  report.wall_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  report.train_accuracy = accuracy(*model, train);
  report.test_accuracy = test.empty() ? 0.0 : accuracy(*model, test);
  return {std::move(model), report};
}

void save_target(const TargetModel& model, const std::filesystem::path& path) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw Error("cannot write " + path.string());
  model.write(os);
  if (!os) throw Error("failed writing " + path.string());
}

std::unique_ptr<TargetModel> read_target(std::istream& is) {
  const auto kind = target_kind_from_string(num::io::read_header(is));
  if (kind == TargetKind::tree) return std::make_unique<TreeModel>(read_tree_body(is));
  return std::make_unique<NetworkModel>(kind, num::Mlp::read(is));
}

std::unique_ptr<TargetModel> load_target(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw Error("cannot open " + path.string());
  return read_target(is);
}

}  // namespace ffa::targets
