#include <cmath>
#include <filesystem>
#include <random>
#include <sstream>

#include "doctest.h"
#include "ffa/data/preprocess.hpp"
#include "ffa/error.hpp"
#include "ffa/gan/losses.hpp"
#include "ffa/gan/networks.hpp"
#include "ffa/gan/schedule.hpp"
#include "ffa/gan/training.hpp"
#include "ffa/numerics/random.hpp"
#include "json.hpp"

using namespace ffa;
using namespace ffa::gan;
using num::Tensor;

namespace {

data::FeatureSchema schema_with_frozen() {
  return data::FeatureSchema({{"a", data::FeatureKind::continuous, true},
                              {"s", data::FeatureKind::symbolic, false},
                              {"b", data::FeatureKind::continuous, true},
                              {"c", data::FeatureKind::continuous, false},
                              {"d", data::FeatureKind::continuous, true}});
}

Tensor random_batch(std::size_t n, std::size_t d, std::uint64_t seed) {
  num::Rng rng(seed);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  Tensor t = Tensor::matrix(n, d);
  for (auto& v : t.values()) v = u(rng);
  return t;
}

// Linear black box on feature 0: attack class when x0 > 0.5.
class LinearBox final : public BlackBox {
 public:
  explicit LinearBox(std::size_t d) : d_(d) {}
  std::size_t input_dim() const override { return d_; }
  std::size_t class_count() const override { return 2; }
  Tensor predict_proba(const Tensor& x) const override {
    Tensor out = Tensor::matrix(x.rows(), 2);
    for (std::size_t r = 0; r < x.rows(); ++r) {
      const double p = 1.0 / (1.0 + std::exp(-20.0 * (x.at(r, 0) - 0.5)));
      out.at(r, 1) = p;
      out.at(r, 0) = 1.0 - p;
    }
    return out;
  }

 private:
  std::size_t d_;
};

}  // namespace

TEST_CASE("generator respects the mutable layout and amplitude") {
  auto rng = num::make_rng(1, "g");
  GeneratorShape shape;
  shape.max_amplitude = 0.3;
  auto gen = GeneratorNet::create(schema_with_frozen(), shape, rng);
  CHECK(gen.mutable_indices() == std::vector<std::size_t>{0, 2, 4});
  const Tensor x = random_batch(6, 5, 2);
  const auto out = gen.generate(x);
  CHECK(out.mask.cols() == 3);
  CHECK(out.delta_full.cols() == 5);
  for (std::size_t r = 0; r < 6; ++r) {
    CHECK(out.delta_full.at(r, 1) == 0.0);
    CHECK(out.delta_full.at(r, 3) == 0.0);
    for (std::size_t k = 0; k < 3; ++k) {
      CHECK(out.mask.at(r, k) >= 0.0);
      CHECK(std::fabs(out.delta_mutable.at(r, k)) <= 0.3);
      // delta = clamp(mask * perturb)
      const double expect = std::clamp(out.mask.at(r, k) * out.perturb.at(r, k), -0.3, 0.3);
      CHECK(out.delta_mutable.at(r, k) == doctest::Approx(expect));
    }
    CHECK(out.delta_full.at(r, 2) == out.delta_mutable.at(r, 1));
  }
  // Taped and untaped forward passes agree bit for bit.
  num::Tape tape;
  const auto pass = gen.forward(tape, x);
  CHECK(pass.delta_full.value() == out.delta_full);
  CHECK_THROWS_AS(gen.generate(random_batch(2, 4, 1)), DimensionError);
}

TEST_CASE("generator and discriminator files round-trip") {
  auto rng = num::make_rng(3, "g");
  const auto gen = GeneratorNet::create(schema_with_frozen(), {}, rng);
  const auto dir = std::filesystem::temp_directory_path() / "ffa-unit-gan";
  std::filesystem::create_directories(dir);
  gen.save(dir / "g.model");
  CHECK(GeneratorNet::load(dir / "g.model") == gen);
  const auto disc = DiscriminatorNet::create(5, 2, {8}, rng);
  disc.save(dir / "d.model");
  const auto back = DiscriminatorNet::load(dir / "d.model");
  CHECK(back.network() == disc.network());
  CHECK_THROWS_AS(GeneratorNet::load(dir / "d.model"), FormatError);
}

TEST_CASE("loss values match a direct computation") {
  const Tensor delta = Tensor::matrix(2, 2, std::vector<double>{0.2, 0.0, -0.4, 1e-8});
  const Tensor mask = Tensor::matrix(2, 2, std::vector<double>{1.0, 0.0, 0.5, 0.01});
  const Tensor probs = Tensor::matrix(2, 2, std::vector<double>{0.25, 0.75, 0.5, 0.5});
  const LossWeights w{1.0, 2.0, 0.5};
  const auto t = compute_losses(delta, mask, probs, attack::AttackGoal::targeted(1, 0), w, 1e-6);
  const double clf = (-std::log(0.25) - std::log(0.5)) / 2.0;
  CHECK(t.l_clf == doctest::Approx(clf));
  CHECK(t.l_perturb == doctest::Approx((0.2 + 0.4 + 1e-8) / 4.0));
  const double sur = (1.0 / 1.01 + 0.0 + 0.5 / 0.51 + 0.01 / 0.02) / 2.0;
  CHECK(t.l_mask_surrogate == doctest::Approx(sur));
  CHECK(t.l_mask_l0 == 1.0);
  CHECK(t.total == doctest::Approx(clf + 2.0 * t.l_perturb + 0.5 * sur));

  // Untargeted: minus the attack-class cross-entropy, capped at 10.
  const Tensor sure = Tensor::matrix(1, 2, std::vector<double>{1.0, 1e-30});
  const auto u = compute_losses(Tensor::matrix(1, 1), Tensor::matrix(1, 1), sure,
                                attack::AttackGoal::untargeted(1), w, 1e-6);
  CHECK(u.l_clf == -kUntargetedCeiling);
}

TEST_CASE("taped losses equal the value-only losses") {
  auto rng = num::make_rng(4, "g");
  auto gen = GeneratorNet::create(schema_with_frozen(), {}, rng);
  const auto disc = DiscriminatorNet::create(5, 2, {8}, rng);
  const Tensor x = random_batch(5, 5, 9);
  const LossWeights w{0.8, 0.1, 0.05};
  for (const auto goal : {attack::AttackGoal::targeted(1, 0), attack::AttackGoal::untargeted(1)}) {
    num::Tape tape;
    auto pass = gen.forward(tape, x);
    auto attacked = num::ops::clamp(num::ops::add(tape.constant(x), pass.delta_full), 0.0, 1.0);
    const auto taped = compute_losses(pass, disc.logits_frozen(attacked), goal, w, 1e-6);
    const auto plain = compute_losses(pass.delta_mutable.value(), pass.mask.value(),
                                      disc.predict_proba(attacked.value()), goal, w, 1e-6);
    CHECK(taped.values.l_clf == doctest::Approx(plain.l_clf).epsilon(1e-10));
    CHECK(taped.values.total == doctest::Approx(plain.total).epsilon(1e-10));
    CHECK(taped.total.value()[0] == doctest::Approx(plain.total).epsilon(1e-10));
  }
}

TEST_CASE("schedule boundaries and validation") {
  StopCondition stop;
  stop.max_epochs = 2500;
  const auto s = PhaseSchedule::scaled(stop);
  REQUIRE(s.phases().size() == 6);
  const std::vector<std::size_t> starts{0, 500, 750, 1000, 1500, 2000};
  for (std::size_t i = 0; i < 6; ++i) CHECK(s.phases()[i].start_epoch == starts[i]);
  CHECK(s.phase_index(499) == 0);
  CHECK(s.phase_index(500) == 1);
  CHECK(s.phase_index(100000) == 5);
  CHECK(schedule_weights(s, 2000) == s.phases()[5].weights);

  CHECK_THROWS_AS(PhaseSchedule({}, stop), ConfigError);
  CHECK_THROWS_AS(PhaseSchedule({{5, {}}}, stop), ConfigError);
  CHECK_THROWS_AS(PhaseSchedule({{0, {1, 0, 0.1}}, {10, {1, 0, 0.05}}}, stop), ConfigError);
  CHECK_THROWS_AS(PhaseSchedule({{0, {0.5, 0, 0.1}}, {10, {0.9, 0, 0.1}}}, stop), ConfigError);
  CHECK_THROWS_AS(PhaseSchedule({{0, {}}, {0, {}}}, stop), ConfigError);
  StopCondition bad = stop;
  bad.bypass_threshold = 1.5;
  CHECK_THROWS_AS(PhaseSchedule::scaled(bad), ConfigError);
}

TEST_CASE("generator step leaves the discriminator untouched") {
  auto rng = num::make_rng(6, "g");
  auto gen = GeneratorNet::create(schema_with_frozen(), {}, rng);
  const auto disc = DiscriminatorNet::create(5, 2, {8}, rng);
  const auto disc_before = disc.network();
  const auto gen_before = gen;
  num::Optimizer opt(num::OptimizerRule::adam, 1e-2);
  const auto l = generator_step(gen, opt, disc, random_batch(8, 5, 1),
                                attack::AttackGoal::targeted(1, 0), {1, 0.1, 0.1}, 1e-6);
  CHECK(std::isfinite(l.total));
  CHECK(disc.network() == disc_before);
  CHECK_FALSE(gen == gen_before);
}

TEST_CASE("distillation learns the black box") {
  const std::size_t d = 3;
  LinearBox box(d);
  auto rng = num::make_rng(7, "g");
  auto disc = DiscriminatorNet::create(d, 2, {16}, rng);
  num::Optimizer opt(num::OptimizerRule::adam, 1e-2);
  double first = 0.0, last = 0.0;
  for (int i = 0; i < 300; ++i) {
    const double loss = distill_step(disc, opt, random_batch(64, d, 100 + i), box);
    if (i == 0) first = loss;
    last = loss;
  }
  CHECK(last < first);
  CHECK(agreement(disc, box, random_batch(500, d, 1)) >= 0.9);
}

TEST_CASE("training loop: log per epoch, fallback when max epochs is hit") {
  data::SynthSpec spec;
  spec.samples = 200;
  spec.dimension = 6;
  spec.mutable_count = 4;
  spec.informative = 2;
  spec.seed = 1;
  const auto train = data::synth_tabular(spec);
  LinearBox box(6);
  // Attack class must be detectable, so relabel with the box's own output.
  std::vector<data::Sample> relabeled;
  const auto pred = predict_classes(box, train.features());
  for (std::size_t i = 0; i < train.size(); ++i) relabeled.push_back({train[i].features, pred[i]});
  const data::Dataset data(data::FeatureSchema::continuous(6), 2, relabeled);
  REQUIRE(data.count_label(1) > 4);

  StopCondition stop;
  stop.max_epochs = 1;
  const auto schedule = PhaseSchedule::scaled(stop);
  TrainingOptions opts;
  opts.batch_size = 16;
  opts.warm_start_epochs = 1;
  opts.seed = 2;
  GeneratorShape shape;
  shape.encoder_hidden = {16};
  shape.head_hidden = {8};
  auto rng = num::make_rng(2, "g");
  auto gen = GeneratorNet::create(data.schema(), shape, rng);
  auto disc = DiscriminatorNet::create(6, 2, {16}, rng);
  gen.zero_output_layers();
  std::size_t callbacks = 0;
  const auto r = train_attack(gen, disc, box, data, attack::AttackGoal::targeted(1, 0), schedule,
                              opts, [&](const EpochRecord&) { ++callbacks; });
  CHECK(r.epochs_run == 1);
  CHECK(r.log.size() == 1);
  CHECK(callbacks == 1);
  CHECK_FALSE(r.converged);

  const auto j = nlohmann::json::parse(to_log_line(r.log[0]));
  CHECK(j.at("epoch") == 0);
  CHECK(j.contains("val_bypass"));
  CHECK(j.contains("l_mask_l0"));

  stop.max_epochs = 400;
  stop.changed_fraction = 1.0;
  stop.bypass_threshold = 0.8;
  auto gen2 = GeneratorNet::create(data.schema(), shape, rng);
  const auto r2 = train_attack(gen2, disc, box, data, attack::AttackGoal::targeted(1, 0),
                               PhaseSchedule::scaled(stop), opts);
  CHECK(r2.converged);
  CHECK(r2.log.size() == r2.epochs_run);
  CHECK(r2.log.back().val_bypass >= 0.8);
}

TEST_CASE("training refuses an undetectable attack class") {
  const auto schema = data::FeatureSchema::continuous(6);
  std::vector<data::Sample> s;
  for (int i = 0; i < 20; ++i) s.push_back({std::vector<double>(6, 0.1), i % 2});
  const data::Dataset d(schema, 2, s);
  LinearBox box(6);
  auto rng = num::make_rng(2, "g");
  auto gen = GeneratorNet::create(schema, {}, rng);
  auto disc = DiscriminatorNet::create(6, 2, {8}, rng);
  CHECK_THROWS_AS(train_attack(gen, disc, box, d, attack::AttackGoal::targeted(1, 0),
                               PhaseSchedule::scaled({}), {}),
                  TrainingError);
}
