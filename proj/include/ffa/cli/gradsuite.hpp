#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "ffa/numerics/gradcheck.hpp"

namespace ffa::cli {

struct GradCase {
  std::string name;
  std::uint64_t seed = 0;
  num::GradCheckReport report;
};

// Names of the checked cases: each dense activation, softmax cross-entropy,
// the elementwise ops, distillation, and the generator loss in both goal modes.
std::vector<std::string> grad_case_names();

// Runs every case once per seed (seeds root_seed .. root_seed + seeds - 1).
std::vector<GradCase> run_grad_suite(std::uint64_t root_seed, std::size_t seeds, double tolerance,
                                     double step = 1e-5);

}  // namespace ffa::cli
