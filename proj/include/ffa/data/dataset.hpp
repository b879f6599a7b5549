#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "ffa/numerics/tensor.hpp"

namespace ffa::data {

enum class FeatureKind { continuous, symbolic };

struct FeatureSpec {
  std::string name;
  FeatureKind kind = FeatureKind::continuous;
  bool is_mutable = true;
};

// Per-feature description plus the optional class-name vocabulary.
// Symbolic features are never mutable; the mutable indices are the ascending
// list of features the attack may perturb.
class FeatureSchema {
 public:
  FeatureSchema() = default;
  explicit FeatureSchema(std::vector<FeatureSpec> features,
                         std::vector<std::string> class_names = {});

  static FeatureSchema continuous(std::size_t dimension, bool all_mutable = true);

  std::size_t dimension() const { return features_.size(); }
  const std::vector<FeatureSpec>& features() const { return features_; }
  const std::vector<std::string>& class_names() const { return class_names_; }
  const std::vector<std::size_t>& mutable_indices() const { return mutable_; }
  std::vector<std::size_t> frozen_indices() const;

  // Throws ContractError unless at least one feature is mutable.
  void require_attackable() const;

  friend bool operator==(const FeatureSchema&, const FeatureSchema&);

 private:
  std::vector<FeatureSpec> features_;
  std::vector<std::string> class_names_;
  std::vector<std::size_t> mutable_;
};

struct Sample {
  std::vector<double> features;
  int label = 0;
};

// Per-feature (min, max) fitted on a training set.
struct MinMaxScaler {
  std::vector<double> min;
  std::vector<double> max;

  bool fitted() const { return !min.empty(); }
  // (v - min) / (max - min) clamped to [0, 1]; constant features map to 0.
  double apply(std::size_t feature, double v) const;
};

class Dataset {
 public:
  Dataset() = default;
  Dataset(FeatureSchema schema, std::size_t class_count, std::vector<Sample> samples);

  const FeatureSchema& schema() const { return schema_; }
  std::size_t class_count() const { return class_count_; }
  const std::vector<Sample>& samples() const { return samples_; }
  std::size_t size() const { return samples_.size(); }
  bool empty() const { return samples_.empty(); }
  std::size_t dimension() const { return schema_.dimension(); }
  const Sample& operator[](std::size_t i) const { return samples_[i]; }

  const MinMaxScaler& scaler() const { return scaler_; }
  void set_scaler(MinMaxScaler s) { scaler_ = std::move(s); }

  // All feature vectors as an (n x d) matrix.
  num::Tensor features() const;
  std::vector<int> labels() const;
  Dataset subset(std::span<const std::size_t> indices) const;
  Dataset with_label(int label) const;
  std::size_t count_label(int label) const;

 private:
  FeatureSchema schema_;
  std::size_t class_count_ = 0;
  std::vector<Sample> samples_;
  MinMaxScaler scaler_;
};

// Rows of a feature matrix built from arbitrary vectors.
num::Tensor to_matrix(std::span<const std::vector<double>> rows);

}  // namespace ffa::data
