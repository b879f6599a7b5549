#pragma once

#include <span>
#include <vector>

#include "ffa/blackbox.hpp"
#include "ffa/data/dataset.hpp"

namespace ffa::attack {

struct Perturbation {
  std::vector<double> delta;

  std::vector<std::size_t> nonzero(double dead_zone) const;
};

struct AdversarialExample {
  data::Sample original;
  Perturbation perturbation;
  std::vector<double> attacked;
};

// attacked = clamp(original + delta, 0, 1). Entries with delta exactly 0 are
// copied bit-for-bit.
AdversarialExample apply_perturbation(const data::Sample& sample, const Perturbation& p);
// Same composition on a whole batch: (n x d) + (n x d).
num::Tensor apply_perturbation(const num::Tensor& originals, const num::Tensor& deltas);

// Number of entries with |delta_i| > dead_zone.
std::size_t changed_length(std::span<const double> delta, double dead_zone);
inline std::size_t changed_length(const Perturbation& p, double dead_zone) {
  return changed_length(p.delta, dead_zone);
}

// max(1 - f_attacked / f_original, 0). Throws ContractError when
// f_original is 0.
double bypass_rate(double detection_original, double detection_attacked);
double bypass_rate(const BlackBox& model, const num::Tensor& originals,
                   const num::Tensor& attacked, int attack_class);

// Zeroes all but the k largest |delta_i| of each row (ties keep the lower index).
void truncate_top_k(num::Tensor& deltas, std::size_t k);

}  // namespace ffa::attack
