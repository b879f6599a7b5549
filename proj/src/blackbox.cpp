#include "ffa/blackbox.hpp"

#include "ffa/error.hpp"

namespace ffa {

int argmax_class(std::span<const double> probabilities) {
  int best = 0;
  for (std::size_t j = 1; j < probabilities.size(); ++j) {
    if (probabilities[j] > probabilities[static_cast<std::size_t>(best)]) best = static_cast<int>(j);
  }
  return best;
}

std::vector<int> predict_classes(const BlackBox& model, const num::Tensor& batch) {
  const auto probs = model.predict_proba(batch);
  std::vector<int> out(probs.rows());
  for (std::size_t i = 0; i < probs.rows(); ++i) out[i] = argmax_class(probs.row_span(i));
  return out;
}

double detection_rate(const BlackBox& model, const num::Tensor& batch, int attack_class) {
  if (batch.empty()) throw ContractError("detection_rate: empty input");
  const auto pred = predict_classes(model, batch);
  std::size_t hits = 0;
  for (int p : pred) hits += p == attack_class;
  return static_cast<double>(hits) / static_cast<double>(pred.size());
}

double detection_rate(const BlackBox& model, const data::Dataset& samples, int attack_class) {
  if (samples.empty()) throw ContractError("detection_rate: empty input");
  return detection_rate(model, samples.features(), attack_class);
}

double accuracy(const BlackBox& model, const data::Dataset& samples) {
  if (samples.empty()) throw ContractError("accuracy: empty dataset");
  const auto pred = predict_classes(model, samples.features());
  std::size_t hits = 0;
  for (std::size_t i = 0; i < pred.size(); ++i) hits += pred[i] == samples[i].label;
  return static_cast<double>(hits) / static_cast<double>(pred.size());
}

num::Tensor CountingBlackBox::predict_proba(const num::Tensor& batch) const {
  ++calls_;
  queries_ += batch.rows();
  return inner_.predict_proba(batch);
}

}  // namespace ffa
