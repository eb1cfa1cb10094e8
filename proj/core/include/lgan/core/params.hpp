#pragma once

#include <cstdint>
#include <random>
#include <span>
#include <string_view>
#include <vector>

#include "lgan/core/graph.hpp"

namespace lgan::core {

/// Fill with independent draws from Uniform[-bound, bound].
void init_uniform(Tensor& t, double bound, std::mt19937_64& rng);

inline constexpr std::uint64_t kFnvOffset = 0xcbf29ce484222325ULL;

/// FNV-1a 64, continuing from `h`.
std::uint64_t fnv1a(std::string_view bytes, std::uint64_t h = kFnvOffset);

/// FNV-1a 64 over the raw bytes of every parameter value, in order.
std::uint64_t checksum(std::span<const Parameter* const> params);

void zero_grads(std::span<Parameter* const> params);

}  // namespace lgan::core
