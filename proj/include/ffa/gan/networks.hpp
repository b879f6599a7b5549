#pragma once

#include <filesystem>
#include <iosfwd>
#include <vector>

#include "ffa/data/dataset.hpp"
#include "ffa/numerics/layers.hpp"
#include "ffa/numerics/random.hpp"

namespace ffa::gan {

struct GeneratorShape {
  std::vector<std::size_t> encoder_hidden = {128, 128};
  std::vector<std::size_t> head_hidden = {64};
  // Amplitude cap on every perturbation entry.
  double max_amplitude = 1.0;
  // Initial bias of the mask head's output units, so the mask starts open.
  double mask_bias_init = 0.5;
};

// Taped generator pass. All tensors cover the mutable features only except
// `delta_full`, which is zero-padded to the full sample width.
struct GeneratorPass {
  num::Var mask;
  num::Var perturb;
  num::Var delta_mutable;
  num::Var delta_full;
};

struct GeneratorOutput {
  num::Tensor mask;
  num::Tensor perturb;
  num::Tensor delta_mutable;
  num::Tensor delta_full;
};

// Masked generator: an encoder maps the mutable features of a sample to a
// latent code; a mask head (final ReLU, values in [0, inf)) and a perturbation
// head (final tanh scaled by the amplitude cap) read that code in parallel.
// The perturbation is their elementwise product clamped to the amplitude cap,
// scattered into the mutable positions of an otherwise zero vector. The input
// carries no noise, so generation is a pure function of the sample.
class GeneratorNet {
 public:
  GeneratorNet() = default;
  GeneratorNet(num::Mlp encoder, num::Mlp mask_head, num::Mlp perturb_head,
               std::vector<std::size_t> mutable_indices, std::size_t dimension,
               double max_amplitude);

  static GeneratorNet create(const data::FeatureSchema& schema, const GeneratorShape& shape,
                             num::Rng& rng);

  // batch: full feature vectors (n x d).
  GeneratorPass forward(num::Tape& tape, const num::Tensor& batch);
  GeneratorOutput generate(const num::Tensor& batch) const;

  std::vector<num::Parameter*> parameters();
  // Zeroes the output layers of both heads: the mask becomes 0 everywhere and
  // the generator emits the null perturbation.
  void zero_output_layers();

  const std::vector<std::size_t>& mutable_indices() const { return mutable_; }
  std::size_t dimension() const { return dimension_; }
  double max_amplitude() const { return max_amplitude_; }
  const num::Mlp& encoder() const { return encoder_; }
  const num::Mlp& mask_head() const { return mask_head_; }
  const num::Mlp& perturb_head() const { return perturb_head_; }

  void write(std::ostream& os) const;
  static GeneratorNet read(std::istream& is);
  void save(const std::filesystem::path& path) const;
  static GeneratorNet load(const std::filesystem::path& path);

  friend bool operator==(const GeneratorNet&, const GeneratorNet&);

 private:
  void check_batch(const num::Tensor& batch) const;
  num::Tensor gather_mutable(const num::Tensor& batch) const;

  num::Mlp encoder_;
  num::Mlp mask_head_;
  num::Mlp perturb_head_;
  std::vector<std::size_t> mutable_;
  std::size_t dimension_ = 0;
  double max_amplitude_ = 1.0;
};

// Substitute classifier distilled from black-box labels.
class DiscriminatorNet {
 public:
  DiscriminatorNet() = default;
  explicit DiscriminatorNet(num::Mlp net);

  static DiscriminatorNet create(std::size_t dimension, std::size_t classes,
                                 const std::vector<std::size_t>& hidden, num::Rng& rng);

  num::Var logits(num::Var x);               // trainable
  num::Var logits_frozen(num::Var x) const;  // parameters as constants
  num::Tensor predict_proba(const num::Tensor& batch) const;

  std::vector<num::Parameter*> parameters() { return net_.parameters(); }
  const num::Mlp& network() const { return net_; }
  std::size_t dimension() const { return net_.input_dim(); }
  std::size_t class_count() const { return net_.output_dim(); }

  void write(std::ostream& os) const;
  static DiscriminatorNet read(std::istream& is);
  void save(const std::filesystem::path& path) const;
  static DiscriminatorNet load(const std::filesystem::path& path);

 private:
  num::Mlp net_;
};

}  // namespace ffa::gan
