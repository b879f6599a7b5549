#include <algorithm>
#include <numeric>
#include <ostream>

#include "ffa/error.hpp"
#include "ffa/numerics/kernels.hpp"
#include "ffa/numerics/optim.hpp"
#include "ffa/numerics/serialize.hpp"
#include "ffa/targets/target.hpp"

namespace ffa::targets {

NetworkModel::NetworkModel(TargetKind kind, num::Mlp net) : kind_(kind), net_(std::move(net)) {
  if (kind_ == TargetKind::tree) throw ContractError("NetworkModel cannot be a tree");
  if (net_.layers().empty()) throw ContractError("NetworkModel needs at least one layer");
  if (net_.layers().back().activation != num::Activation::identity) {
    throw ContractError("NetworkModel output layer must produce raw logits");
  }
}

num::Tensor NetworkModel::predict_proba(const num::Tensor& batch) const {
  if (batch.cols() != input_dim()) {
    throw DimensionError("predict_proba: expected " + std::to_string(input_dim()) +
                         " features, got " + std::to_string(batch.cols()));
  }
  num::Tensor logits = net_.predict(batch);
  num::kernels::softmax_rows_inplace(logits);
  return logits;
}

void NetworkModel::write(std::ostream& os) const {
  num::io::write_header(os, to_string(kind_));
  net_.write(os);
}

NetworkModel fit_network(TargetKind kind, const data::Dataset& train, const TargetHyperparams& hp) {
  if (train.empty()) throw TrainingError("empty training set");
  auto init_rng = num::make_rng(hp.seed, "target-init");
  std::vector<std::size_t> sizes{train.dimension()};
  if (kind == TargetKind::mlp) sizes.insert(sizes.end(), hp.hidden.begin(), hp.hidden.end());
  sizes.push_back(train.class_count());
  NetworkModel model(kind, num::Mlp::build(sizes, num::Activation::relu,
                                           num::Activation::identity, init_rng));

  auto params = model.network().parameters();
  num::Optimizer opt(num::OptimizerRule::adam, hp.learning_rate);
  auto batch_rng = num::make_rng(hp.seed, "target-batches");
  const num::Tensor x = train.features();
  const std::vector<int> y = train.labels();
  const std::size_t n = train.size();
  const std::size_t bs = std::max<std::size_t>(1, std::min(hp.batch_size, n));
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);

  for (std::size_t epoch = 0; epoch < hp.epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), batch_rng);
    for (std::size_t start = 0; start < n; start += bs) {
      const std::size_t end = std::min(n, start + bs);
      num::Tensor xb = num::Tensor::matrix(end - start, x.cols());
      std::vector<int> yb(end - start);
      for (std::size_t r = start; r < end; ++r) {
        auto src = x.row_span(order[r]);
        std::copy(src.begin(), src.end(), xb.row_span(r - start).begin());
        yb[r - start] = y[order[r]];
      }
      num::zero_grad(params);
      num::Tape tape;
      auto logits = model.network().forward(tape.constant(std::move(xb)));
      auto loss = num::ops::mean(num::ops::softmax_cross_entropy(logits, yb));
      tape.backward(loss);
      opt.step(params);
    }
  }
  return model;
}

}  // namespace ffa::targets
