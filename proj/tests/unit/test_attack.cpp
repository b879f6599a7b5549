#include <cmath>

#include "doctest.h"
#include "ffa/attack/evaluate.hpp"
#include "ffa/attack/perturbation.hpp"
#include "ffa/error.hpp"
#include "ffa/numerics/random.hpp"

using namespace ffa;
using namespace ffa::attack;
using num::Tensor;

namespace {

// Attack class 1 whenever feature 0 exceeds 0.5.
class ThresholdBox final : public BlackBox {
 public:
  explicit ThresholdBox(std::size_t d) : d_(d) {}
  std::size_t input_dim() const override { return d_; }
  std::size_t class_count() const override { return 2; }
  Tensor predict_proba(const Tensor& x) const override {
    Tensor out = Tensor::matrix(x.rows(), 2);
    for (std::size_t r = 0; r < x.rows(); ++r) {
      const double p = x.at(r, 0) > 0.5 ? 0.9 : 0.1;
      out.at(r, 1) = p;
      out.at(r, 0) = 1.0 - p;
    }
    return out;
  }

 private:
  std::size_t d_;
};

}  // namespace

TEST_CASE("apply_perturbation clamps after adding") {
  const data::Sample s{{0.9, 0.2, 0.5}, 1};
  const auto ex = apply_perturbation(s, Perturbation{{0.5, -0.3, 0.0}});
  CHECK(ex.attacked[0] == 1.0);
  CHECK(ex.attacked[1] == 0.0);
  CHECK(ex.attacked[2] == 0.5);
  const auto id = apply_perturbation(s, Perturbation{{0.0, 0.0, 0.0}});
  CHECK(id.attacked == s.features);
  CHECK_THROWS_AS(apply_perturbation(s, Perturbation{{0.1}}), DimensionError);
}

TEST_CASE("bypass rate") {
  CHECK(bypass_rate(1.0, 0.0) == 1.0);
  CHECK(bypass_rate(0.7, 0.7) == 0.0);
  CHECK(bypass_rate(0.5, 0.9) == 0.0);
  // 1 - 0.103 / 0.996
  CHECK(bypass_rate(0.996, 0.103) == doctest::Approx(0.896586345).epsilon(1e-9));
  CHECK_THROWS_AS(bypass_rate(0.0, 0.0), ContractError);
  const ThresholdBox box(2);
  const Tensor orig = Tensor::matrix(2, 2, std::vector<double>{0.9, 0, 0.8, 0});
  const Tensor adv = Tensor::matrix(2, 2, std::vector<double>{0.1, 0, 0.8, 0});
  CHECK(bypass_rate(box, orig, adv, 1) == 0.5);
}

TEST_CASE("changed length counts entries beyond the dead zone") {
  const std::vector<double> d{0.0, 0.3, 0.0, -0.1};
  CHECK(changed_length(d, 1e-6) == 2);
  CHECK(changed_length(std::vector<double>(4, 0.0), 1e-6) == 0);
  CHECK(changed_length(std::vector<double>{1e-7, -1e-7}, 1e-6) == 0);
  CHECK(Perturbation{d}.nonzero(1e-6) == std::vector<std::size_t>{1, 3});
}

TEST_CASE("top-k truncation keeps the largest magnitudes, lower index on ties") {
  Tensor d = Tensor::matrix(2, 4, std::vector<double>{0.1, -0.5, 0.3, 0.2, 0.2, 0.2, 0.2, 0.0});
  truncate_top_k(d, 2);
  CHECK(d.at(0, 0) == 0.0);
  CHECK(d.at(0, 1) == -0.5);
  CHECK(d.at(0, 2) == 0.3);
  CHECK(d.at(0, 3) == 0.0);
  CHECK(d.at(1, 0) == 0.2);
  CHECK(d.at(1, 1) == 0.2);
  CHECK(d.at(1, 2) == 0.0);
}

TEST_CASE("goals and constraints validate") {
  CHECK_THROWS_AS(AttackGoal::targeted(1, 1).validate(2), ConfigError);
  CHECK_THROWS_AS(AttackGoal::targeted(1, 5).validate(2), ConfigError);
  CHECK_NOTHROW(AttackGoal::untargeted(1).validate(2));
  CHECK(AttackGoal::targeted(1, 0).fooled(0));
  CHECK_FALSE(AttackGoal::targeted(2, 0).fooled(1));
  CHECK(AttackGoal::untargeted(2).fooled(1));
  AttackConstraints c;
  CHECK(c.max_changed_count(20) == 1);
  c.max_changed = 3;
  CHECK(c.max_changed_count(20) == 3);
  c.max_amplitude = 1.5;
  CHECK_THROWS_AS(c.validate(), ConfigError);
}

TEST_CASE("null generator leaves accuracy unchanged with zero length") {
  const auto schema = data::FeatureSchema::continuous(3);
  auto rng = num::make_rng(1, "t");
  auto gen = gan::GeneratorNet::create(schema, {}, rng);
  gen.zero_output_layers();
  const ThresholdBox box(3);
  Tensor x = Tensor::matrix(4, 3, std::vector<double>{0.9, 0.1, 0.1, 0.8, 0.5, 0.5, 0.2, 0.3, 0.3, 0.7, 0.0, 1.0});
  const auto ev = evaluate_attack(gen, box, x, {}, AttackGoal::targeted(1, 0));
  CHECK(ev.metrics.accuracy_after == ev.metrics.accuracy_before);
  CHECK(ev.metrics.accuracy_before == 0.75);
  CHECK(ev.metrics.mean_changed == 0.0);
  CHECK(ev.metrics.bypass == 0.0);
  CHECK(ev.attacked == x);
  CHECK(ev.metrics.amplitude_violations == 0);
  CHECK_THROWS_AS(evaluate_attack(gen, box, Tensor(), {}, AttackGoal::targeted(1, 0)), ContractError);
  CHECK_THROWS_AS(evaluate_attack(gen, ThresholdBox(3), Tensor::matrix(2, 4), {}, AttackGoal::targeted(1, 0)),
                  DimensionError);
}

TEST_CASE("summarize audits amplitude and budget") {
  const ThresholdBox box(3);
  const Tensor x = Tensor::matrix(2, 3, std::vector<double>{0.9, 0.5, 0.5, 0.9, 0.5, 0.5});
  const Tensor d = Tensor::matrix(2, 3, std::vector<double>{-0.6, 0.2, 0.1, 0.0, 0.0, 0.0});
  AttackConstraints c;
  c.max_amplitude = 0.5;
  c.max_changed = 2;
  const auto m = summarize(box, x, d, c, AttackGoal::targeted(1, 0), 0.2);
  CHECK(m.amplitude_violations == 1);
  CHECK(m.budget_violation_fraction == 0.5);
  CHECK(m.mean_changed == 1.5);
  CHECK(m.accuracy_after == 0.5);
  CHECK(m.bypass == 0.5);
  CHECK(m.seconds_per_sample == doctest::Approx(0.1));
  // acc* and bypass come from the same predictions.
  CHECK(1.0 - m.bypass == doctest::Approx(m.detection_after / m.detection_before));
}
