#pragma once

#include <cstdint>
#include <random>
#include <string_view>

namespace spinsense {

/// Derive an independent generator from a master seed and a stream label.
/// Rule: state = splitmix64(seed XOR fnv1a64(label)), used to seed mt19937_64.
/// Identical (seed, label) pairs always yield identical streams.
std::mt19937_64 random_stream(std::uint64_t seed, std::string_view label);

std::uint64_t fnv1a64(std::string_view text);
std::uint64_t splitmix64(std::uint64_t x);

}  // namespace spinsense
