#pragma once

#include <cstdint>
#include <random>

namespace fedmon::rng {

// Tags separating the independent random streams of one experiment.
enum class Purpose : std::uint64_t {
  init = 1,
  train = 2,
  role = 3,
  fabricate = 4,
  subset = 5,
  data = 6,
  split = 7,
};

std::uint64_t splitmix64(std::uint64_t x) noexcept;

// Counter-based derivation: the result depends only on the arguments, so
// substreams are independent of scheduling order and thread count.
std::uint64_t derive_seed(std::uint64_t base, Purpose purpose, std::uint64_t a = 0,
                          std::uint64_t b = 0) noexcept;

inline std::mt19937_64 stream(std::uint64_t base, Purpose purpose, std::uint64_t a = 0,
                              std::uint64_t b = 0) {
  return std::mt19937_64(derive_seed(base, purpose, a, b));
}

}  // namespace fedmon::rng
