#include "ffa/gan/training.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "json.hpp"

#include "ffa/attack/perturbation.hpp"
#include "ffa/error.hpp"

namespace ffa::gan {

namespace ops = num::ops;
using num::Tensor;

namespace {

Tensor gather_rows(const Tensor& x, std::span<const std::size_t> rows) {
  Tensor out = Tensor::matrix(rows.size(), x.cols());
  for (std::size_t r = 0; r < rows.size(); ++r) {
    auto src = x.row_span(rows[r]);
    std::copy(src.begin(), src.end(), out.row_span(r).begin());
  }
  return out;
}

Tensor stack_rows(const Tensor& a, const Tensor& b) {
  Tensor out = Tensor::matrix(a.rows() + b.rows(), a.cols());
  std::copy(a.values().begin(), a.values().end(), out.values().begin());
  std::copy(b.values().begin(), b.values().end(), out.values().begin() + static_cast<long>(a.size()));
  return out;
}

// Cycles through a shuffled index list, reshuffling after each full pass.
class BatchSampler {
 public:
  BatchSampler(std::size_t n, num::Rng& rng) : order_(n), rng_(rng) {
    std::iota(order_.begin(), order_.end(), 0);
    std::shuffle(order_.begin(), order_.end(), rng_);
  }
  std::vector<std::size_t> next(std::size_t count) {
    std::vector<std::size_t> out;
    out.reserve(count);
    while (out.size() < count) {
      if (pos_ == order_.size()) {
        std::shuffle(order_.begin(), order_.end(), rng_);
        pos_ = 0;
      }
      out.push_back(order_[pos_++]);
    }
    return out;
  }

 private:
  std::vector<std::size_t> order_;
  std::size_t pos_ = 0;
  num::Rng& rng_;
};

struct Validation {
  double bypass = 0.0;
  double mean_l0 = 0.0;
  double changed_fraction = 0.0;
};

Validation validate(const GeneratorNet& gen, const BlackBox& blackbox, const Tensor& originals,
                    double detection_original, int attack_class, double dead_zone) {
  const auto out = gen.generate(originals);
  const Tensor attacked = attack::apply_perturbation(originals, out.delta_full);
  Validation v;
  v.bypass = attack::bypass_rate(detection_original,
                                 detection_rate(blackbox, attacked, attack_class));
  std::size_t changed = 0;
  for (std::size_t i = 0; i < out.delta_full.rows(); ++i) {
    changed += attack::changed_length(out.delta_full.row_span(i), dead_zone);
  }
  v.mean_l0 = static_cast<double>(changed) / static_cast<double>(originals.rows());
  v.changed_fraction = v.mean_l0 / static_cast<double>(gen.dimension());
  return v;
}

bool finite(const LossBreakdown& l) {
  return std::isfinite(l.l_clf) && std::isfinite(l.l_perturb) &&
         std::isfinite(l.l_mask_surrogate) && std::isfinite(l.total);
}

}  // namespace

std::string to_log_line(const EpochRecord& r) {
  nlohmann::ordered_json j;
  j["epoch"] = r.epoch;
  j["w_clf"] = r.weights.clf;
  j["w_perturb"] = r.weights.perturb;
  j["w_mask"] = r.weights.mask;
  j["l_clf"] = r.losses.l_clf;
  j["l_perturb"] = r.losses.l_perturb;
  j["l_mask_surrogate"] = r.losses.l_mask_surrogate;
  j["l_mask_l0"] = r.losses.l_mask_l0;
  j["total"] = r.losses.total;
  j["distill_loss"] = r.distill_loss;
  j["batch_bypass"] = r.batch_bypass;
  j["val_bypass"] = r.val_bypass;
  j["val_mean_l0"] = r.val_mean_l0;
  j["val_changed_fraction"] = r.val_changed_fraction;
  return j.dump();
}

double distill_step(DiscriminatorNet& disc, num::Optimizer& opt, const Tensor& batch,
                    const BlackBox& blackbox) {
  const auto labels = predict_classes(blackbox, batch);
  auto params = disc.parameters();
  num::zero_grad(params);
  num::Tape tape;
  auto loss = ops::mean(ops::softmax_cross_entropy(disc.logits(tape.constant(batch)), labels));
  const double value = loss.value()[0];
  if (!std::isfinite(value)) throw NumericError("distillation loss is not finite");
  tape.backward(loss);
  opt.step(params);
  return value;
}

LossBreakdown generator_step(GeneratorNet& gen, num::Optimizer& opt, const DiscriminatorNet& disc,
                             const Tensor& attack_batch, const attack::AttackGoal& goal,
                             const LossWeights& weights, double dead_zone) {
  auto params = gen.parameters();
  num::zero_grad(params);
  num::Tape tape;
  auto pass = gen.forward(tape, attack_batch);
  auto attacked = ops::clamp(ops::add(tape.constant(attack_batch), pass.delta_full), 0.0, 1.0);
  auto loss = compute_losses(pass, disc.logits_frozen(attacked), goal, weights, dead_zone);
  if (!finite(loss.values)) {
    throw NumericError("generator loss is not finite (l_clf=" + std::to_string(loss.values.l_clf) +
                       ", l_perturb=" + std::to_string(loss.values.l_perturb) + ")");
  }
  tape.backward(loss.total);
  opt.step(params);
  return loss.values;
}

double agreement(const DiscriminatorNet& disc, const BlackBox& blackbox, const Tensor& batch) {
  if (batch.empty()) throw ContractError("agreement: empty batch");
  const auto truth = predict_classes(blackbox, batch);
  const auto probs = disc.predict_proba(batch);
  std::size_t same = 0;
  for (std::size_t i = 0; i < truth.size(); ++i) same += argmax_class(probs.row_span(i)) == truth[i];
  return static_cast<double>(same) / static_cast<double>(truth.size());
}

void warm_start(DiscriminatorNet& disc, num::Optimizer& opt, const BlackBox& blackbox,
                const data::Dataset& data, std::size_t epochs, std::size_t batch_size,
                num::Rng& rng) {
  if (epochs == 0) return;
  const Tensor x = data.features();
  std::vector<std::size_t> order(x.rows());
  std::iota(order.begin(), order.end(), 0);
  const std::size_t bs = std::max<std::size_t>(1, batch_size);
  for (std::size_t e = 0; e < epochs; ++e) {
    std::shuffle(order.begin(), order.end(), rng);
    for (std::size_t s = 0; s < order.size(); s += bs) {
      const std::size_t end = std::min(order.size(), s + bs);
      distill_step(disc, opt, gather_rows(x, std::span(order).subspan(s, end - s)), blackbox);
    }
  }
}

TrainingResult train_attack(GeneratorNet& gen, DiscriminatorNet& disc, const BlackBox& blackbox,
                            const data::Dataset& train, const attack::AttackGoal& goal,
                            const PhaseSchedule& schedule, const TrainingOptions& options,
                            const EpochCallback& on_epoch) {
  goal.validate(blackbox.class_count());
  if (train.dimension() != gen.dimension() || blackbox.input_dim() != gen.dimension() ||
      disc.dimension() != gen.dimension()) {
    throw DimensionError("generator, discriminator, black box and data disagree on dimension");
  }
  if (!(options.validation_fraction > 0.0 && options.validation_fraction < 1.0)) {
    throw ConfigError("validation fraction must lie in (0,1)");
  }

  // Attack-class samples split into generator-training and validation slices.
  std::vector<std::size_t> attack_idx;
  for (std::size_t i = 0; i < train.size(); ++i) {
    if (train[i].label == goal.attack_class) attack_idx.push_back(i);
  }
  if (attack_idx.size() < 2) throw TrainingError("need at least two attack-class samples");
  auto split_rng = num::make_rng(options.seed, "gan-validation");
  std::shuffle(attack_idx.begin(), attack_idx.end(), split_rng);
  auto n_val = static_cast<std::size_t>(
      std::llround(options.validation_fraction * static_cast<double>(attack_idx.size())));
  n_val = std::clamp<std::size_t>(n_val, 1, attack_idx.size() - 1);
  n_val = std::min(n_val, options.validation_cap);
  const Tensor all_x = train.features();
  const Tensor val_x = gather_rows(all_x, std::span(attack_idx).first(n_val));
  const Tensor gen_x = gather_rows(all_x, std::span(attack_idx).subspan(n_val));
  const double val_detection = detection_rate(blackbox, val_x, goal.attack_class);
  if (!(val_detection > 0.0)) {
    throw TrainingError("black box never detects the validation attack samples");
  }

  num::Optimizer gen_opt(num::OptimizerRule::adam, options.generator_lr);
  num::Optimizer disc_opt(num::OptimizerRule::adam, options.discriminator_lr);
  auto warm_rng = num::make_rng(options.seed, "gan-warm-start");
  warm_start(disc, disc_opt, blackbox, train, options.warm_start_epochs, options.batch_size,
             warm_rng);

  TrainingResult result;
  result.warm_start_agreement = agreement(disc, blackbox, val_x);

  auto attack_rng = num::make_rng(options.seed, "gan-attack-batches");
  auto normal_rng = num::make_rng(options.seed, "gan-normal-batches");
  BatchSampler attack_sampler(gen_x.rows(), attack_rng);
  BatchSampler normal_sampler(all_x.rows(), normal_rng);
  const std::size_t bs = std::max<std::size_t>(1, std::min(options.batch_size, gen_x.rows()));
  const std::size_t steps = std::max<std::size_t>(1, options.steps_per_epoch);
  const auto& stop = schedule.stop();

  GeneratorNet best = gen;
  bool have_best = false;
  bool best_meets_bypass = false;
  double best_key = -INFINITY;

  for (std::size_t epoch = 0; epoch < stop.max_epochs; ++epoch) {
    EpochRecord rec;
    rec.epoch = epoch;
    rec.weights = schedule.weights_at(epoch);
    for (std::size_t s = 0; s < steps; ++s) {
      const Tensor xb = gather_rows(gen_x, attack_sampler.next(bs));
      // Substitute sees the current adversarial batch next to ordinary samples.
      const Tensor adv = attack::apply_perturbation(xb, gen.generate(xb).delta_full);
      const Tensor normal = gather_rows(all_x, normal_sampler.next(bs));
      rec.distill_loss += distill_step(disc, disc_opt, stack_rows(adv, normal), blackbox);
      const double f_orig = detection_rate(blackbox, xb, goal.attack_class);
      rec.batch_bypass = f_orig > 0.0
                             ? attack::bypass_rate(f_orig, detection_rate(blackbox, adv, goal.attack_class))
                             : 0.0;
      const auto lb =
          generator_step(gen, gen_opt, disc, xb, goal, rec.weights, options.dead_zone);
      rec.losses.l_clf += lb.l_clf;
      rec.losses.l_perturb += lb.l_perturb;
      rec.losses.l_mask_surrogate += lb.l_mask_surrogate;
      rec.losses.l_mask_l0 += lb.l_mask_l0;
      rec.losses.total += lb.total;
    }
    const double inv = 1.0 / static_cast<double>(steps);
    rec.distill_loss *= inv;
    rec.losses.l_clf *= inv;
    rec.losses.l_perturb *= inv;
    rec.losses.l_mask_surrogate *= inv;
    rec.losses.l_mask_l0 *= inv;
    rec.losses.total *= inv;

    const auto v = validate(gen, blackbox, val_x, val_detection, goal.attack_class,
                            options.dead_zone);
    rec.val_bypass = v.bypass;
    rec.val_mean_l0 = v.mean_l0;
    rec.val_changed_fraction = v.changed_fraction;
    result.log.push_back(rec);
    result.epochs_run = epoch + 1;
    if (on_epoch) on_epoch(rec);

    if (v.bypass >= stop.bypass_threshold && v.changed_fraction <= stop.changed_fraction) {
      result.converged = true;
      result.selected_epoch = epoch;
      return result;
    }
    // Best-so-far: any generator meeting the bypass threshold beats one that
    // does not; among those, fewer changed features wins, otherwise higher bypass.
    const bool meets = v.bypass >= stop.bypass_threshold;
    const double key = meets ? -v.changed_fraction : v.bypass;
    if (!have_best || (meets && !best_meets_bypass) || (meets == best_meets_bypass && key > best_key)) {
      best = gen;
      have_best = true;
      best_meets_bypass = meets;
      best_key = key;
      result.selected_epoch = epoch;
    }
  }
  if (have_best) gen = std::move(best);
  return result;
}

}  // namespace ffa::gan
