#include "properties.hpp"

#include <cmath>
#include <random>
#include <sstream>

#include "ffa/attack/perturbation.hpp"
#include "ffa/baselines/de.hpp"
#include "ffa/data/preprocess.hpp"
#include "ffa/error.hpp"
#include "ffa/gan/networks.hpp"
#include "ffa/gan/schedule.hpp"
#include "ffa/numerics/random.hpp"

namespace ffa::testing {

using num::Tensor;

namespace {

struct Instance {
  data::FeatureSchema schema;
  gan::GeneratorNet gen;
  Tensor batch;
  gan::GeneratorOutput out;
};

// Small generator over a random schema, with random weights and biases so
// that masks and perturbations vary in sign and size.
Instance random_instance(std::uint64_t seed) {
  num::Rng rng(seed);
  std::uniform_int_distribution<std::size_t> dim(2, 12);
  const std::size_t d = dim(rng);
  std::vector<data::FeatureSpec> features(d);
  std::bernoulli_distribution coin(0.6);
  bool any = false;
  for (std::size_t i = 0; i < d; ++i) {
    const bool symbolic = !coin(rng) && coin(rng);
    features[i].name = "f" + std::to_string(i);
    features[i].kind = symbolic ? data::FeatureKind::symbolic : data::FeatureKind::continuous;
    features[i].is_mutable = !symbolic && coin(rng);
    any = any || features[i].is_mutable;
  }
  if (!any) {
    features[0].kind = data::FeatureKind::continuous;
    features[0].is_mutable = true;
  }
  data::FeatureSchema schema(features);
  gan::GeneratorShape shape;
  shape.encoder_hidden = {16, 16};
  shape.head_hidden = {8};
  shape.max_amplitude = std::uniform_real_distribution<double>(0.01, 1.0)(rng);
  auto gen = gan::GeneratorNet::create(schema, shape, rng);
  std::normal_distribution<double> noise(0.0, 1.5);
  for (auto* p : gen.parameters()) {
    for (auto& v : p->value.values()) v += noise(rng);
  }
  std::uniform_int_distribution<std::size_t> rows(1, 6);
  Tensor batch = Tensor::matrix(rows(rng), d);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  for (auto& v : batch.values()) v = unit(rng);
  auto out = gen.generate(batch);
  return {std::move(schema), std::move(gen), std::move(batch), std::move(out)};
}

template <class Fn>
PropertyResult run(const std::string& name, std::size_t cases, std::uint64_t seed, Fn&& check) {
  PropertyResult r{name, 0, 0, {}};
  for (std::size_t i = 0; i < cases; ++i) {
    const std::uint64_t case_seed = num::substream_seed(seed, name + "/" + std::to_string(i));
    std::string why;
    bool ok = false;
    try {
      ok = check(case_seed, why);
    } catch (const std::exception& e) {
      why = std::string("exception: ") + e.what();
    }
    ++r.cases;
    if (!ok) {
      if (r.failures == 0) r.first_failure = "case " + std::to_string(i) + ": " + why;
      ++r.failures;
    }
  }
  return r;
}

}  // namespace

PropertyResult check_mask_nonnegative(std::size_t cases, std::uint64_t seed) {
  return run("mask-nonnegative", cases, seed, [](std::uint64_t s, std::string& why) {
    const auto inst = random_instance(s);
    for (double v : inst.out.mask.values()) {
      if (!(v >= 0.0)) {
        why = "mask value " + std::to_string(v);
        return false;
      }
    }
    return true;
  });
}

PropertyResult check_frozen_zeroing(std::size_t cases, std::uint64_t seed) {
  return run("frozen-zeroing", cases, seed, [](std::uint64_t s, std::string& why) {
    const auto inst = random_instance(s);
    const Tensor attacked = attack::apply_perturbation(inst.batch, inst.out.delta_full);
    for (auto j : inst.schema.frozen_indices()) {
      for (std::size_t r = 0; r < inst.batch.rows(); ++r) {
        if (inst.out.delta_full.at(r, j) != 0.0 || attacked.at(r, j) != inst.batch.at(r, j)) {
          why = "frozen feature " + std::to_string(j) + " changed";
          return false;
        }
      }
    }
    return true;
  });
}

PropertyResult check_amplitude_cap(std::size_t cases, std::uint64_t seed) {
  return run("amplitude-cap", cases, seed, [](std::uint64_t s, std::string& why) {
    const auto inst = random_instance(s);
    const double cap = inst.gen.max_amplitude();
    for (double v : inst.out.delta_full.values()) {
      if (!(std::fabs(v) <= cap)) {
        why = "|delta| = " + std::to_string(std::fabs(v)) + " > " + std::to_string(cap);
        return false;
      }
    }
    return true;
  });
}

PropertyResult check_clamp_range(std::size_t cases, std::uint64_t seed) {
  return run("clamp-range", cases, seed, [](std::uint64_t s, std::string& why) {
    num::Rng rng(s);
    std::uniform_int_distribution<std::size_t> dim(1, 30);
    const std::size_t d = dim(rng);
    std::uniform_real_distribution<double> unit(0.0, 1.0), wide(-2.0, 2.0);
    std::bernoulli_distribution zero(0.3);
    data::Sample sample{std::vector<double>(d), 0};
    attack::Perturbation p{std::vector<double>(d)};
    for (std::size_t i = 0; i < d; ++i) {
      sample.features[i] = unit(rng);
      p.delta[i] = zero(rng) ? 0.0 : wide(rng);
    }
    const auto ex = attack::apply_perturbation(sample, p);
    for (std::size_t i = 0; i < d; ++i) {
      if (!(ex.attacked[i] >= 0.0 && ex.attacked[i] <= 1.0)) {
        why = "attacked value out of range";
        return false;
      }
      if (p.delta[i] == 0.0 && ex.attacked[i] != sample.features[i]) {
        why = "zero delta changed a feature";
        return false;
      }
    }
    // Idempotence: re-applying the null perturbation is the identity.
    const data::Sample again{ex.attacked, 0};
    const auto ex2 = attack::apply_perturbation(again, attack::Perturbation{std::vector<double>(d)});
    if (ex2.attacked != ex.attacked) {
      why = "null perturbation not idempotent";
      return false;
    }
    return true;
  });
}

PropertyResult check_bypass_range(std::size_t cases, std::uint64_t seed) {
  return run("bypass-range", cases, seed, [](std::uint64_t s, std::string& why) {
    num::Rng rng(s);
    std::uniform_int_distribution<std::size_t> count(1, 200);
    const std::size_t n = count(rng);
    std::uniform_int_distribution<std::size_t> hits(1, n), hits0(0, n);
    const double f = static_cast<double>(hits(rng)) / static_cast<double>(n);
    const double f_adv = static_cast<double>(hits0(rng)) / static_cast<double>(n);
    const double b = attack::bypass_rate(f, f_adv);
    if (!(b >= 0.0 && b <= 1.0)) {
      why = "bypass " + std::to_string(b);
      return false;
    }
    if (f_adv <= f && std::fabs((1.0 - b) - f_adv / f) > 1e-12) {
      why = "1 - bypass differs from the detection ratio";
      return false;
    }
    return true;
  });
}

PropertyResult check_schedule_monotonic(std::size_t cases, std::uint64_t seed) {
  return run("schedule-monotonic", cases, seed, [](std::uint64_t s, std::string& why) {
    num::Rng rng(s);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    std::uniform_int_distribution<std::size_t> phases(1, 8), epochs(1, 5000);
    const std::size_t k = phases(rng);
    gan::StopCondition stop;
    stop.max_epochs = epochs(rng);
    std::vector<gan::LossWeights> ladder(6);
    double clf = 0.5 + unit(rng), mask = 0.0;
    for (auto& w : ladder) {
      clf -= 0.1 * unit(rng);
      mask += 0.01 * unit(rng);
      w = {std::max(clf, 0.01), 0.05 * unit(rng), mask};
    }
    const auto check_schedule = [&](const gan::PhaseSchedule& sch) {
      const auto* prev = &sch.weights_at(0);
      for (std::size_t e = 1; e < stop.max_epochs + 10; e += 1 + e / 50) {
        const auto& cur = sch.weights_at(e);
        if (cur.mask < prev->mask || cur.clf > prev->clf) return false;
        prev = &cur;
      }
      return true;
    };
    if (!check_schedule(gan::PhaseSchedule::scaled(stop, ladder))) {
      why = "scaled schedule not monotone";
      return false;
    }
    // Random explicit phases: valid when monotone, rejected otherwise.
    std::vector<gan::Phase> list;
    std::size_t start = 0;
    bool monotone = true;
    for (std::size_t i = 0; i < k; ++i) {
      gan::Phase p;
      p.start_epoch = start;
      p.weights = {0.1 + unit(rng), 0.0, unit(rng) * 0.1};
      if (!list.empty()) {
        monotone = monotone && p.weights.mask >= list.back().weights.mask &&
                   p.weights.clf <= list.back().weights.clf;
      }
      list.push_back(p);
      start += 1 + epochs(rng) % 300;
    }
    try {
      const gan::PhaseSchedule sch(list, stop);
      if (!monotone) {
        why = "non-monotone phases accepted";
        return false;
      }
      if (!check_schedule(sch)) {
        why = "explicit schedule not monotone";
        return false;
      }
    } catch (const ConfigError&) {
      if (monotone) {
        why = "monotone phases rejected";
        return false;
      }
    }
    return true;
  });
}

namespace {

// Minimal black box for the determinism check: logistic score on the sum of
// the first two features.
class SumBox final : public BlackBox {
 public:
  explicit SumBox(std::size_t d) : d_(d) {}
  std::size_t input_dim() const override { return d_; }
  std::size_t class_count() const override { return 2; }
  Tensor predict_proba(const Tensor& x) const override {
    Tensor out = Tensor::matrix(x.rows(), 2);
    for (std::size_t r = 0; r < x.rows(); ++r) {
      const double z = 6.0 * (x.at(r, 0) + x.at(r, 1) - 1.0);
      const double p1 = 1.0 / (1.0 + std::exp(-z));
      out.at(r, 0) = 1.0 - p1;
      out.at(r, 1) = p1;
    }
    return out;
  }

 private:
  std::size_t d_;
};

}  // namespace

PropertyResult check_determinism(std::size_t cases, std::uint64_t seed) {
  return run("determinism", cases, seed, [](std::uint64_t s, std::string& why) {
    switch (s % 3) {
      case 0: {
        const auto a = random_instance(s);
        const auto b = random_instance(s);
        if (!(a.gen == b.gen) || !(a.out.delta_full == b.out.delta_full)) {
          why = "generator differs under the same seed";
          return false;
        }
        return true;
      }
      case 1: {
        data::SynthSpec spec;
        spec.samples = 40;
        spec.dimension = 6;
        spec.mutable_count = 4;
        spec.informative = 2;
        spec.seed = s;
        const auto a = data::split(data::synth_tabular(spec), {0.75, s, false});
        const auto b = data::split(data::synth_tabular(spec), {0.75, s, false});
        if (!(a.first.features() == b.first.features()) || a.second.labels() != b.second.labels()) {
          why = "synthetic split differs under the same seed";
          return false;
        }
        return true;
      }
      default: {
        const SumBox box(5);
        const data::Sample sample{{0.9, 0.8, 0.1, 0.2, 0.3}, 1};
        const std::vector<std::size_t> mutables{0, 1, 2, 3};
        baselines::DEConfig cfg;
        cfg.budget = 1;
        cfg.population = 6;
        cfg.iterations = 3;
        cfg.seed = s;
        const auto goal = attack::AttackGoal::targeted(1, 0);
        const auto a = baselines::de_attack(box, sample, mutables, goal, cfg);
        const auto b = baselines::de_attack(box, sample, mutables, goal, cfg);
        if (a.example.attacked != b.example.attacked || a.queries != b.queries) {
          why = "DE differs under the same seed";
          return false;
        }
        return true;
      }
    }
  });
}

std::vector<PropertyResult> run_all_properties(std::size_t cases, std::uint64_t seed) {
  return {check_mask_nonnegative(cases, seed), check_frozen_zeroing(cases, seed),
          check_amplitude_cap(cases, seed),    check_clamp_range(cases, seed),
          check_bypass_range(cases, seed),     check_schedule_monotonic(cases, seed),
          check_determinism(cases, seed)};
}

}  // namespace ffa::testing
