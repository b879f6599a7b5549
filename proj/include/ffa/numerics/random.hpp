#pragma once

#include <cstdint>
#include <random>
#include <string_view>

namespace ffa::num {

using Rng = std::mt19937_64;

// Seed of the named substream derived from a root seed. Components draw from
// their own substream so each can be reproduced in isolation.
std::uint64_t substream_seed(std::uint64_t root, std::string_view name);

inline Rng make_rng(std::uint64_t root, std::string_view name) {
  return Rng(substream_seed(root, name));
}

// FNV-1a over raw bytes; used for seeds and config digests.
std::uint64_t fnv1a(std::string_view bytes);

}  // namespace ffa::num
