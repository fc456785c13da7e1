#pragma once

#include <cstdint>
#include <string_view>

#include "rqshot/qaoa.hpp"

namespace rqshot {

/// Stream seed for one (instance, label, index) triple under a master seed.
/// Strings are hashed with FNV-1a and folded through splitmix64 finalizers, so
/// distinct triples give unrelated mt19937_64 streams.
std::uint64_t derive_seed(std::uint64_t master, std::string_view instance_id,
                          std::string_view label, std::uint64_t index);

inline Rng make_rng(std::uint64_t master, std::string_view instance_id, std::string_view label,
                    std::uint64_t index) {
  return Rng(derive_seed(master, instance_id, label, index));
}

} // namespace rqshot
