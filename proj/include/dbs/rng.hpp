#pragma once

#include <cstdint>
#include <random>
#include <string_view>

namespace dbs {

using Rng = std::mt19937_64;

// Derives an independent stream seed from a master seed, a label naming the
// consumer ("users", "channel", ...) and an index. The mapping is fixed so
// serial and parallel runs draw identical streams.
std::uint64_t derive_seed(std::uint64_t master, std::string_view label, std::uint64_t index = 0);

inline Rng make_rng(std::uint64_t master, std::string_view label, std::uint64_t index = 0) {
  return Rng(derive_seed(master, label, index));
}

}  // namespace dbs
