#include "ffa/baselines/de.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>

#include "ffa/error.hpp"
#include "ffa/numerics/random.hpp"

namespace ffa::baselines {

using num::Tensor;

double attack_objective(std::span<const double> probabilities, const attack::AttackGoal& goal) {
  if (goal.mode == attack::GoalMode::targeted) {
    return -probabilities[static_cast<std::size_t>(goal.target_class)];
  }
  return probabilities[static_cast<std::size_t>(goal.attack_class)];
}

void DEConfig::validate(std::size_t mutable_count) const {
  if (budget == 0) throw ConfigError("de: budget must be positive");
  if (budget > mutable_count) {
    throw ConfigError("de: budget " + std::to_string(budget) + " exceeds the " +
                      std::to_string(mutable_count) + " mutable features");
  }
  if (population < 4) throw ConfigError("de: population must be at least 4");
  if (iterations == 0) throw ConfigError("de: iterations must be positive");
  if (!(differential_weight > 0.0 && differential_weight <= 2.0)) {
    throw ConfigError("de: differential weight must lie in (0,2]");
  }
  if (!(crossover >= 0.0 && crossover <= 1.0)) throw ConfigError("de: crossover must lie in [0,1]");
  if (!(max_amplitude > 0.0 && max_amplitude <= 1.0)) {
    throw ConfigError("de: max_amplitude must lie in (0,1]");
  }
}

namespace {

// Genome layout: [pos_0, val_0, pos_1, val_1, ...].
using Genome = std::vector<double>;

struct Decoder {
  const data::Sample& sample;
  std::span<const std::size_t> mutables;
  double max_amplitude;

  double position_upper() const { return static_cast<double>(mutables.size()); }

  CandidateSolution decode(const Genome& g) const {
    CandidateSolution c;
    for (std::size_t s = 0; s + 1 < g.size(); s += 2) {
      auto slot = static_cast<std::size_t>(std::floor(g[s]));
      slot = std::min(slot, mutables.size() - 1);
      const std::size_t feature = mutables[slot];
      if (std::find(c.indices.begin(), c.indices.end(), feature) != c.indices.end()) continue;
      c.indices.push_back(feature);
      c.values.push_back(g[s + 1]);
    }
    return c;
  }

  std::vector<double> delta(const CandidateSolution& c) const {
    std::vector<double> d(sample.features.size(), 0.0);
    for (std::size_t i = 0; i < c.indices.size(); ++i) {
      const double x = sample.features[c.indices[i]];
      d[c.indices[i]] = std::clamp(c.values[i] - x, -max_amplitude, max_amplitude);
    }
    return d;
  }

  void write_row(const CandidateSolution& c, std::span<double> row) const {
    const auto d = delta(c);
    for (std::size_t j = 0; j < row.size(); ++j) {
      row[j] = d[j] == 0.0 ? sample.features[j] : std::clamp(sample.features[j] + d[j], 0.0, 1.0);
    }
  }
};

struct Scores {
  std::vector<double> fitness;
  std::vector<int> predicted;
};

Scores score(const BlackBox& blackbox, const Decoder& dec, const std::vector<Genome>& genomes,
             const attack::AttackGoal& goal, std::size_t& queries) {
  Tensor batch = Tensor::matrix(genomes.size(), dec.sample.features.size());
  for (std::size_t i = 0; i < genomes.size(); ++i) {
    dec.write_row(dec.decode(genomes[i]), batch.row_span(i));
  }
  const Tensor probs = blackbox.predict_proba(batch);
  queries += genomes.size();
  Scores out{std::vector<double>(genomes.size()), std::vector<int>(genomes.size())};
  for (std::size_t i = 0; i < genomes.size(); ++i) {
    out.fitness[i] = attack_objective(probs.row_span(i), goal);
    out.predicted[i] = argmax_class(probs.row_span(i));
  }
  return out;
}

}  // namespace

DEResult de_attack(const BlackBox& blackbox, const data::Sample& sample,
                   std::span<const std::size_t> mutable_indices, const attack::AttackGoal& goal,
                   const DEConfig& config) {
  config.validate(mutable_indices.size());
  goal.validate(blackbox.class_count());
  if (sample.features.size() != blackbox.input_dim()) {
    throw DimensionError("de_attack: sample has " + std::to_string(sample.features.size()) +
                         " features, black box expects " + std::to_string(blackbox.input_dim()));
  }
  const auto start = std::chrono::steady_clock::now();
  const Decoder dec{sample, mutable_indices, config.max_amplitude};
  const std::size_t genes = 2 * config.budget;
  const double pos_hi = std::nextafter(dec.position_upper(), 0.0);
  const auto bound = [&](std::size_t gene, double v) {
    return gene % 2 == 0 ? std::clamp(v, 0.0, pos_hi) : std::clamp(v, 0.0, 1.0);
  };

  num::Rng rng = num::make_rng(config.seed, "de");
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::uniform_int_distribution<std::size_t> pick(0, config.population - 1);
  std::uniform_int_distribution<std::size_t> pick_gene(0, genes - 1);

  std::vector<Genome> pop(config.population, Genome(genes));
  for (auto& g : pop) {
    for (std::size_t j = 0; j < genes; ++j) {
      g[j] = j % 2 == 0 ? bound(j, unit(rng) * dec.position_upper()) : unit(rng);
    }
  }
  DEResult result;
  auto scored = score(blackbox, dec, pop, goal, result.queries);
  std::vector<double> fitness = std::move(scored.fitness);
  std::vector<int> predicted = std::move(scored.predicted);

  const auto best_index = [&] {
    return static_cast<std::size_t>(std::min_element(fitness.begin(), fitness.end()) -
                                    fitness.begin());
  };

  std::vector<Genome> trial(config.population, Genome(genes));
  for (std::size_t it = 0; it < config.iterations; ++it) {
    if (config.early_stop && goal.fooled(predicted[best_index()])) break;
    for (std::size_t i = 0; i < config.population; ++i) {
      std::size_t r1, r2, r3;
      do r1 = pick(rng); while (r1 == i);
      do r2 = pick(rng); while (r2 == i || r2 == r1);
      do r3 = pick(rng); while (r3 == i || r3 == r1 || r3 == r2);
      const std::size_t forced = pick_gene(rng);
      for (std::size_t j = 0; j < genes; ++j) {
        if (j == forced || unit(rng) < config.crossover) {
          trial[i][j] =
              bound(j, pop[r1][j] + config.differential_weight * (pop[r2][j] - pop[r3][j]));
        } else {
          trial[i][j] = pop[i][j];
        }
      }
    }
    const auto trial_scores = score(blackbox, dec, trial, goal, result.queries);
    for (std::size_t i = 0; i < config.population; ++i) {
      if (trial_scores.fitness[i] <= fitness[i]) {
        pop[i] = trial[i];
        fitness[i] = trial_scores.fitness[i];
        predicted[i] = trial_scores.predicted[i];
      }
    }
    ++result.generations;
  }

  const std::size_t b = best_index();
  result.best = dec.decode(pop[b]);
  result.best.fitness = fitness[b];
  result.example = attack::apply_perturbation(sample, attack::Perturbation{dec.delta(result.best)});
  result.fooled = goal.fooled(predicted[b]);
  result.seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return result;
}

std::vector<DEResult> de_attack_batch(const BlackBox& blackbox, const data::Dataset& samples,
                                      const attack::AttackGoal& goal, const DEConfig& config) {
  const auto& mutables = samples.schema().mutable_indices();
  config.validate(mutables.size());
  std::vector<DEResult> out(samples.size());
  std::vector<std::string> errors(samples.size());
  const auto n = static_cast<long>(samples.size());
#pragma omp parallel for schedule(dynamic)
  for (long i = 0; i < n; ++i) {
    DEConfig c = config;
    c.seed = num::substream_seed(config.seed, "de-sample-" + std::to_string(i));
    try {
      out[static_cast<std::size_t>(i)] =
          de_attack(blackbox, samples[static_cast<std::size_t>(i)], mutables, goal, c);
    } catch (const std::exception& e) {
      errors[static_cast<std::size_t>(i)] = e.what();
    }
  }
  for (const auto& e : errors) {
    if (!e.empty()) throw Error("de_attack_batch: " + e);
  }
  return out;
}

}  // namespace ffa::baselines
