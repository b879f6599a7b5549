#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "ffa/attack/goal.hpp"
#include "ffa/blackbox.hpp"
#include "ffa/data/dataset.hpp"
#include "ffa/gan/losses.hpp"
#include "ffa/gan/networks.hpp"
#include "ffa/gan/schedule.hpp"
#include "ffa/numerics/optim.hpp"

namespace ffa::gan {

struct TrainingOptions {
  std::size_t batch_size = 128;
  // Minibatch steps (one distillation + one generator step each) per epoch.
  std::size_t steps_per_epoch = 1;
  double generator_lr = 1e-3;
  double discriminator_lr = 1e-3;
  // Passes over the training set used to pre-distill the discriminator.
  std::size_t warm_start_epochs = 5;
  // Share of the attack-class training samples held out for the stop rule.
  double validation_fraction = 0.2;
  std::size_t validation_cap = 512;
  double dead_zone = 1e-6;
  std::uint64_t seed = 0;
};

struct EpochRecord {
  std::size_t epoch = 0;
  LossWeights weights;
  LossBreakdown losses;      // generator losses, averaged over the epoch's steps
  double distill_loss = 0.0;
  double batch_bypass = 0.0;  // black-box bypass on the epoch's last training batch
  double val_bypass = 0.0;
  double val_mean_l0 = 0.0;
  double val_changed_fraction = 0.0;
};

// One JSON object per line; field order is fixed.
std::string to_log_line(const EpochRecord& record);

struct TrainingResult {
  std::vector<EpochRecord> log;
  bool converged = false;
  std::size_t epochs_run = 0;
  // Epoch whose generator was returned (the stopping epoch when converged).
  std::size_t selected_epoch = 0;
  double warm_start_agreement = 0.0;  // discriminator vs black box on the validation slice
};

// One cross-entropy step of the substitute towards the black box's hard labels
// on `batch`. Returns the loss before the update.
double distill_step(DiscriminatorNet& disc, num::Optimizer& opt, const num::Tensor& batch,
                    const BlackBox& blackbox);

// One step of the generator against the frozen substitute. The substitute's
// parameters are read but never written.
LossBreakdown generator_step(GeneratorNet& gen, num::Optimizer& opt, const DiscriminatorNet& disc,
                             const num::Tensor& attack_batch, const attack::AttackGoal& goal,
                             const LossWeights& weights, double dead_zone);

// Fraction of rows on which the substitute and the black box predict the same class.
double agreement(const DiscriminatorNet& disc, const BlackBox& blackbox, const num::Tensor& batch);

// Pre-distills `disc` for `epochs` passes over `data` (black-box labels).
void warm_start(DiscriminatorNet& disc, num::Optimizer& opt, const BlackBox& blackbox,
                const data::Dataset& data, std::size_t epochs, std::size_t batch_size,
                num::Rng& rng);

using EpochCallback = std::function<void(const EpochRecord&)>;

// Full adversarial training. `train` holds scaled training samples of every
// class; the attack-class ones are perturbed, all of them feed distillation.
// When the stop rule never fires the best generator seen is restored and
// `converged` is false.
TrainingResult train_attack(GeneratorNet& gen, DiscriminatorNet& disc, const BlackBox& blackbox,
                            const data::Dataset& train, const attack::AttackGoal& goal,
                            const PhaseSchedule& schedule, const TrainingOptions& options,
                            const EpochCallback& on_epoch = {});

}  // namespace ffa::gan
