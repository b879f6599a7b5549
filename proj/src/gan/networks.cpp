#include "ffa/gan/networks.hpp"

#include <algorithm>
#include <fstream>

#include "ffa/error.hpp"
#include "ffa/numerics/kernels.hpp"
#include "ffa/numerics/serialize.hpp"

namespace ffa::gan {

using num::Activation;
using num::Tensor;
using num::Var;
namespace ops = num::ops;

GeneratorNet::GeneratorNet(num::Mlp encoder, num::Mlp mask_head, num::Mlp perturb_head,
                           std::vector<std::size_t> mutable_indices, std::size_t dimension,
                           double max_amplitude)
    : encoder_(std::move(encoder)),
      mask_head_(std::move(mask_head)),
      perturb_head_(std::move(perturb_head)),
      mutable_(std::move(mutable_indices)),
      dimension_(dimension),
      max_amplitude_(max_amplitude) {
  const std::size_t m = mutable_.size();
  if (m == 0) throw ContractError("generator needs at least one mutable feature");
  if (!std::is_sorted(mutable_.begin(), mutable_.end()) || mutable_.back() >= dimension_) {
    throw ContractError("mutable indices must be ascending and inside the dimension");
  }
  if (encoder_.input_dim() != m) throw DimensionError("encoder input width != mutable count");
  if (mask_head_.input_dim() != encoder_.output_dim() ||
      perturb_head_.input_dim() != encoder_.output_dim()) {
    throw DimensionError("head input width != encoder output width");
  }
  if (mask_head_.output_dim() != m || perturb_head_.output_dim() != m) {
    throw DimensionError("head output width != mutable count");
  }
  if (mask_head_.layers().back().activation != Activation::relu) {
    throw ContractError("mask head must end in ReLU");
  }
  if (perturb_head_.layers().back().activation != Activation::tanh) {
    throw ContractError("perturbation head must end in tanh");
  }
  if (!(max_amplitude_ > 0.0 && max_amplitude_ <= 1.0)) {
    throw ConfigError("max amplitude must lie in (0,1]");
  }
}

GeneratorNet GeneratorNet::create(const data::FeatureSchema& schema, const GeneratorShape& shape,
                                  num::Rng& rng) {
  schema.require_attackable();
  const auto& mut = schema.mutable_indices();
  const std::size_t m = mut.size();
  std::vector<std::size_t> enc{m};
  enc.insert(enc.end(), shape.encoder_hidden.begin(), shape.encoder_hidden.end());
  auto encoder = num::Mlp::build(enc, Activation::relu, Activation::relu, rng);
  std::vector<std::size_t> head{encoder.output_dim()};
  head.insert(head.end(), shape.head_hidden.begin(), shape.head_hidden.end());
  head.push_back(m);
  auto mask = num::Mlp::build(head, Activation::relu, Activation::relu, rng);
  auto perturb = num::Mlp::build(head, Activation::relu, Activation::tanh, rng);
  mask.layers().back().bias.value.fill(shape.mask_bias_init);
  return GeneratorNet(std::move(encoder), std::move(mask), std::move(perturb), mut,
                      schema.dimension(), shape.max_amplitude);
}

void GeneratorNet::check_batch(const Tensor& batch) const {
  if (batch.cols() != dimension_) {
    throw DimensionError("generator expects " + std::to_string(dimension_) +
                         " features per sample, got " + std::to_string(batch.cols()));
  }
}

Tensor GeneratorNet::gather_mutable(const Tensor& batch) const {
  Tensor out = Tensor::matrix(batch.rows(), mutable_.size());
  for (std::size_t i = 0; i < batch.rows(); ++i) {
    for (std::size_t j = 0; j < mutable_.size(); ++j) out.at(i, j) = batch.at(i, mutable_[j]);
  }
  return out;
}

GeneratorPass GeneratorNet::forward(num::Tape& tape, const Tensor& batch) {
  check_batch(batch);
  Var z = encoder_.forward(tape.constant(gather_mutable(batch)));
  GeneratorPass pass;
  pass.mask = mask_head_.forward(z);
  pass.perturb = ops::scale(perturb_head_.forward(z), max_amplitude_);
  pass.delta_mutable =
      ops::clamp(ops::mul(pass.mask, pass.perturb), -max_amplitude_, max_amplitude_);
  pass.delta_full = ops::scatter_columns(pass.delta_mutable, mutable_, dimension_);
  return pass;
}

GeneratorOutput GeneratorNet::generate(const Tensor& batch) const {
  check_batch(batch);
  const Tensor z = encoder_.predict(gather_mutable(batch));
  GeneratorOutput out;
  out.mask = mask_head_.predict(z);
  out.perturb = perturb_head_.predict(z);
  for (auto& v : out.perturb.values()) v *= max_amplitude_;
  out.delta_mutable = out.mask;
  for (std::size_t k = 0; k < out.delta_mutable.size(); ++k) {
    const double v = out.mask[k] * out.perturb[k];
    out.delta_mutable[k] = std::clamp(v, -max_amplitude_, max_amplitude_);
  }
  out.delta_full = Tensor::matrix(batch.rows(), dimension_);
  for (std::size_t i = 0; i < batch.rows(); ++i) {
    for (std::size_t j = 0; j < mutable_.size(); ++j) {
      out.delta_full.at(i, mutable_[j]) = out.delta_mutable.at(i, j);
    }
  }
  return out;
}

std::vector<num::Parameter*> GeneratorNet::parameters() {
  auto out = encoder_.parameters();
  for (auto* p : mask_head_.parameters()) out.push_back(p);
  for (auto* p : perturb_head_.parameters()) out.push_back(p);
  return out;
}

void GeneratorNet::zero_output_layers() {
  for (auto* head : {&mask_head_, &perturb_head_}) {
    head->layers().back().weights.value.fill(0.0);
    head->layers().back().bias.value.fill(0.0);
  }
}

void GeneratorNet::write(std::ostream& os) const {
  num::io::write_header(os, "generator");
  os << "dimension " << dimension_ << "\namplitude " << num::io::format_double(max_amplitude_)
     << "\nmutable " << mutable_.size();
  for (auto i : mutable_) os << ' ' << i;
  os << '\n';
  encoder_.write(os);
  mask_head_.write(os);
  perturb_head_.write(os);
}

GeneratorNet GeneratorNet::read(std::istream& is) {
  if (num::io::read_header(is) != "generator") throw FormatError("not a generator file");
  const auto dim = std::stoul(num::io::expect_key(is, "dimension"));
  const double amp = num::io::parse_double(num::io::expect_key(is, "amplitude"));
  const auto m = std::stoul(num::io::expect_key(is, "mutable"));
  std::vector<std::size_t> idx(m);
  for (auto& i : idx) {
    if (!(is >> i)) throw FormatError("truncated mutable index list");
  }
  auto enc = num::Mlp::read(is);
  auto mask = num::Mlp::read(is);
  auto pert = num::Mlp::read(is);
  return GeneratorNet(std::move(enc), std::move(mask), std::move(pert), std::move(idx), dim, amp);
}

void GeneratorNet::save(const std::filesystem::path& path) const {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw Error("cannot write " + path.string());
  write(os);
}

GeneratorNet GeneratorNet::load(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw Error("cannot open " + path.string());
  return read(is);
}

bool operator==(const GeneratorNet& a, const GeneratorNet& b) {
  return a.encoder_ == b.encoder_ && a.mask_head_ == b.mask_head_ &&
         a.perturb_head_ == b.perturb_head_ && a.mutable_ == b.mutable_ &&
         a.dimension_ == b.dimension_ && a.max_amplitude_ == b.max_amplitude_;
}

DiscriminatorNet::DiscriminatorNet(num::Mlp net) : net_(std::move(net)) {
  if (net_.layers().empty() || net_.layers().back().activation != Activation::identity) {
    throw ContractError("discriminator must end in a logits layer");
  }
}

DiscriminatorNet DiscriminatorNet::create(std::size_t dimension, std::size_t classes,
                                          const std::vector<std::size_t>& hidden, num::Rng& rng) {
  std::vector<std::size_t> sizes{dimension};
  sizes.insert(sizes.end(), hidden.begin(), hidden.end());
  sizes.push_back(classes);
  return DiscriminatorNet(num::Mlp::build(sizes, Activation::relu, Activation::identity, rng));
}

Var DiscriminatorNet::logits(Var x) { return net_.forward(x); }

Var DiscriminatorNet::logits_frozen(Var x) const { return net_.forward_frozen(x); }

Tensor DiscriminatorNet::predict_proba(const Tensor& batch) const {
  if (batch.cols() != dimension()) {
    throw DimensionError("discriminator expects " + std::to_string(dimension()) + " features");
  }
  Tensor out = net_.predict(batch);
  num::kernels::softmax_rows_inplace(out);
  return out;
}

void DiscriminatorNet::write(std::ostream& os) const {
  num::io::write_header(os, "discriminator");
  net_.write(os);
}

DiscriminatorNet DiscriminatorNet::read(std::istream& is) {
  if (num::io::read_header(is) != "discriminator") throw FormatError("not a discriminator file");
  return DiscriminatorNet(num::Mlp::read(is));
}

void DiscriminatorNet::save(const std::filesystem::path& path) const {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw Error("cannot write " + path.string());
  write(os);
}

DiscriminatorNet DiscriminatorNet::load(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw Error("cannot open " + path.string());
  return read(is);
}

}  // namespace ffa::gan
