#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <memory>
#include <string>
#include <utility>
#include <vector>

#include "ffa/blackbox.hpp"
#include "ffa/data/dataset.hpp"
#include "ffa/numerics/layers.hpp"

namespace ffa::targets {

enum class TargetKind { logistic, mlp, tree };

std::string to_string(TargetKind k);
TargetKind target_kind_from_string(const std::string& name);

struct TargetHyperparams {
  // logistic / mlp
  std::vector<std::size_t> hidden = {64, 64};
  double learning_rate = 1e-3;
  std::size_t epochs = 40;
  std::size_t batch_size = 64;
  // tree
  std::size_t max_depth = 8;
  std::size_t min_samples_split = 2;
  std::size_t min_samples_leaf = 1;

  std::uint64_t seed = 0;
};

struct TrainReport {
  double train_accuracy = 0.0;
  double test_accuracy = 0.0;
  double wall_seconds = 0.0;
};

// A trained classifier. Attack code sees it only through BlackBox.
class TargetModel : public BlackBox {
 public:
  virtual TargetKind kind() const = 0;
  virtual void write(std::ostream& os) const = 0;
};

// Softmax network: logistic regression when it has no hidden layer.
class NetworkModel final : public TargetModel {
 public:
  NetworkModel(TargetKind kind, num::Mlp net);

  TargetKind kind() const override { return kind_; }
  std::size_t input_dim() const override { return net_.input_dim(); }
  std::size_t class_count() const override { return net_.output_dim(); }
  num::Tensor predict_proba(const num::Tensor& batch) const override;
  void write(std::ostream& os) const override;

  // Pre-softmax layers; exposed for training and gradient checks only.
  num::Mlp& network() { return net_; }
  const num::Mlp& network() const { return net_; }

 private:
  TargetKind kind_;
  num::Mlp net_;  // last layer has identity activation; softmax applied in predict_proba
};

struct TreeNode {
  int feature = -1;  // -1 marks a leaf
  double threshold = 0.0;
  int left = -1;   // x[feature] <= threshold
  int right = -1;  // x[feature] > threshold
  std::vector<double> probabilities;  // class frequencies of the training samples here

  bool is_leaf() const { return feature < 0; }
};

// CART classification tree (Gini impurity, midpoint thresholds).
class TreeModel final : public TargetModel {
 public:
  TreeModel(std::size_t input_dim, std::size_t classes, std::vector<TreeNode> nodes);

  TargetKind kind() const override { return TargetKind::tree; }
  std::size_t input_dim() const override { return input_dim_; }
  std::size_t class_count() const override { return classes_; }
  num::Tensor predict_proba(const num::Tensor& batch) const override;
  void write(std::ostream& os) const override;

  const std::vector<TreeNode>& nodes() const { return nodes_; }
  std::size_t depth() const;
  std::size_t leaf_index(std::span<const double> x) const;

 private:
  std::size_t input_dim_;
  std::size_t classes_;
  std::vector<TreeNode> nodes_;  // nodes_[0] is the root
};

TreeModel fit_tree(const data::Dataset& train, const TargetHyperparams& hp);
NetworkModel fit_network(TargetKind kind, const data::Dataset& train, const TargetHyperparams& hp);

// Trains the requested model on `train`; the report carries accuracy on both
// `train` and `test`. Throws TrainingError if fewer than two classes appear.
std::pair<std::unique_ptr<TargetModel>, TrainReport> train_target(TargetKind kind,
                                                                  const data::Dataset& train,
                                                                  const data::Dataset& test,
                                                                  const TargetHyperparams& hp);

void save_target(const TargetModel& model, const std::filesystem::path& path);
std::unique_ptr<TargetModel> load_target(const std::filesystem::path& path);
std::unique_ptr<TargetModel> read_target(std::istream& is);

using ffa::accuracy;
using ffa::detection_rate;

}  // namespace ffa::targets
