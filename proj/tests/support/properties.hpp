#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

namespace ffa::testing {

struct PropertyResult {
  std::string name;
  std::size_t cases = 0;
  std::size_t failures = 0;
  std::string first_failure;

  bool ok() const { return failures == 0 && cases > 0; }
};

// Randomized invariant checks; each runs `cases` independent cases derived
// from `seed`.
PropertyResult check_mask_nonnegative(std::size_t cases, std::uint64_t seed);
PropertyResult check_frozen_zeroing(std::size_t cases, std::uint64_t seed);
PropertyResult check_amplitude_cap(std::size_t cases, std::uint64_t seed);
PropertyResult check_clamp_range(std::size_t cases, std::uint64_t seed);
PropertyResult check_bypass_range(std::size_t cases, std::uint64_t seed);
PropertyResult check_schedule_monotonic(std::size_t cases, std::uint64_t seed);
PropertyResult check_determinism(std::size_t cases, std::uint64_t seed);

std::vector<PropertyResult> run_all_properties(std::size_t cases, std::uint64_t seed);

}  // namespace ffa::testing
