#include "doctest.h"
#include "properties.hpp"

using namespace ffa::testing;

namespace {

void require_ok(const PropertyResult& r) {
  INFO(r.name << ": " << r.first_failure);
  CHECK(r.cases >= 1000);
  CHECK(r.failures == 0);
}

constexpr std::size_t kCases = 1000;

}  // namespace

TEST_CASE("property: mask is nonnegative") { require_ok(check_mask_nonnegative(kCases, 1)); }
TEST_CASE("property: frozen features are never changed") { require_ok(check_frozen_zeroing(kCases, 2)); }
TEST_CASE("property: perturbation amplitude is capped") { require_ok(check_amplitude_cap(kCases, 3)); }
TEST_CASE("property: attacked samples stay in [0,1]") { require_ok(check_clamp_range(kCases, 4)); }
TEST_CASE("property: bypass rate stays in [0,1]") { require_ok(check_bypass_range(kCases, 5)); }
TEST_CASE("property: schedules are monotone") { require_ok(check_schedule_monotonic(kCases, 6)); }
TEST_CASE("property: fixed seeds reproduce results") { require_ok(check_determinism(kCases, 7)); }
