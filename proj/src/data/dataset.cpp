#include "ffa/data/dataset.hpp"

#include <algorithm>

#include "ffa/error.hpp"

namespace ffa::data {

FeatureSchema::FeatureSchema(std::vector<FeatureSpec> features,
                             std::vector<std::string> class_names)
    : features_(std::move(features)), class_names_(std::move(class_names)) {
  if (features_.empty()) throw ConfigError("schema needs at least one feature");
  for (std::size_t i = 0; i < features_.size(); ++i) {
    const auto& f = features_[i];
    if (f.kind == FeatureKind::symbolic && f.is_mutable) {
      throw ConfigError("symbolic feature '" + f.name + "' cannot be mutable");
    }
    if (f.is_mutable) mutable_.push_back(i);
  }
}

FeatureSchema FeatureSchema::continuous(std::size_t dimension, bool all_mutable) {
  std::vector<FeatureSpec> f(dimension);
  for (std::size_t i = 0; i < dimension; ++i) {
    f[i].name = "f" + std::to_string(i);
    f[i].is_mutable = all_mutable;
  }
  return FeatureSchema(std::move(f));
}

std::vector<std::size_t> FeatureSchema::frozen_indices() const {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < features_.size(); ++i) {
    if (!features_[i].is_mutable) out.push_back(i);
  }
  return out;
}

void FeatureSchema::require_attackable() const {
  if (mutable_.empty()) throw ContractError("schema has no mutable features to attack");
}

bool operator==(const FeatureSchema& a, const FeatureSchema& b) {
  if (a.features_.size() != b.features_.size() || a.class_names_ != b.class_names_) return false;
  for (std::size_t i = 0; i < a.features_.size(); ++i) {
    const auto& x = a.features_[i];
    const auto& y = b.features_[i];
    if (x.name != y.name || x.kind != y.kind || x.is_mutable != y.is_mutable) return false;
  }
  return true;
}

double MinMaxScaler::apply(std::size_t feature, double v) const {
  const double lo = min[feature], hi = max[feature];
  if (!(hi > lo)) return 0.0;
  return std::clamp((v - lo) / (hi - lo), 0.0, 1.0);
}

Dataset::Dataset(FeatureSchema schema, std::size_t class_count, std::vector<Sample> samples)
    : schema_(std::move(schema)), class_count_(class_count), samples_(std::move(samples)) {
  if (class_count_ == 0) throw ConfigError("class count must be positive");
  for (std::size_t i = 0; i < samples_.size(); ++i) {
    const auto& s = samples_[i];
    if (s.features.size() != schema_.dimension()) {
      throw DimensionError("sample " + std::to_string(i) + " has " +
                           std::to_string(s.features.size()) + " features, schema has " +
                           std::to_string(schema_.dimension()));
    }
    if (s.label < 0 || static_cast<std::size_t>(s.label) >= class_count_) {
      throw ContractError("sample " + std::to_string(i) + " label " + std::to_string(s.label) +
                          " outside class range");
    }
  }
}

num::Tensor Dataset::features() const {
  if (samples_.empty()) throw ContractError("features() of an empty dataset");
  num::Tensor out = num::Tensor::matrix(samples_.size(), dimension());
  for (std::size_t i = 0; i < samples_.size(); ++i) {
    std::copy(samples_[i].features.begin(), samples_[i].features.end(), out.row_span(i).begin());
  }
  return out;
}

std::vector<int> Dataset::labels() const {
  std::vector<int> out;
  out.reserve(samples_.size());
  for (const auto& s : samples_) out.push_back(s.label);
  return out;
}

Dataset Dataset::subset(std::span<const std::size_t> indices) const {
  std::vector<Sample> picked;
  picked.reserve(indices.size());
  for (auto i : indices) picked.push_back(samples_.at(i));
  Dataset out(schema_, class_count_, std::move(picked));
  out.scaler_ = scaler_;
  return out;
}

Dataset Dataset::with_label(int label) const {
  std::vector<std::size_t> idx;
  for (std::size_t i = 0; i < samples_.size(); ++i) {
    if (samples_[i].label == label) idx.push_back(i);
  }
  return subset(idx);
}

std::size_t Dataset::count_label(int label) const {
  return static_cast<std::size_t>(std::count_if(samples_.begin(), samples_.end(),
                                                [label](const Sample& s) { return s.label == label; }));
}

num::Tensor to_matrix(std::span<const std::vector<double>> rows) {
  if (rows.empty()) throw ContractError("to_matrix: no rows");
  num::Tensor out = num::Tensor::matrix(rows.size(), rows[0].size());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (rows[i].size() != out.cols()) throw DimensionError("to_matrix: ragged rows");
    std::copy(rows[i].begin(), rows[i].end(), out.row_span(i).begin());
  }
  return out;
}

}  // namespace ffa::data
