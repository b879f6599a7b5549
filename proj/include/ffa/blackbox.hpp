#pragma once

#include <atomic>
#include <cstddef>
#include <span>
#include <vector>

#include "ffa/data/dataset.hpp"
#include "ffa/numerics/tensor.hpp"

namespace ffa {

// The only surface an attack may use: inputs in, class probabilities out.
class BlackBox {
 public:
  virtual ~BlackBox() = default;
  virtual std::size_t input_dim() const = 0;
  virtual std::size_t class_count() const = 0;
  // batch: (n x input_dim). Returns (n x class_count), each row a simplex.
  virtual num::Tensor predict_proba(const num::Tensor& batch) const = 0;
};

// Argmax with ties broken toward the lower class index.
int argmax_class(std::span<const double> probabilities);
std::vector<int> predict_classes(const BlackBox& model, const num::Tensor& batch);

// Fraction of rows predicted as `attack_class`. Throws ContractError on an
// empty batch.
double detection_rate(const BlackBox& model, const num::Tensor& batch, int attack_class);
double detection_rate(const BlackBox& model, const data::Dataset& samples, int attack_class);
// Fraction of predictions equal to the dataset labels.
double accuracy(const BlackBox& model, const data::Dataset& samples);

// Forwards to another black box and counts queries (one per sample row) and
// predict_proba invocations.
class CountingBlackBox final : public BlackBox {
 public:
  explicit CountingBlackBox(const BlackBox& inner) : inner_(inner) {}
  std::size_t input_dim() const override { return inner_.input_dim(); }
  std::size_t class_count() const override { return inner_.class_count(); }
  num::Tensor predict_proba(const num::Tensor& batch) const override;

  std::size_t queries() const { return queries_.load(); }
  std::size_t calls() const { return calls_.load(); }
  void reset() {
    queries_ = 0;
    calls_ = 0;
  }

 private:
  const BlackBox& inner_;
  mutable std::atomic<std::size_t> queries_{0};
  mutable std::atomic<std::size_t> calls_{0};
};

}  // namespace ffa
