#pragma once

#include <cstddef>
#include <cstdint>
#include <random>
#include <span>
#include <vector>

namespace pcm {

using Rng = std::mt19937_64;

std::uint64_t splitmix64(std::uint64_t x) noexcept;

/// Seed for stream `index` under `master`. Independent of evaluation order,
/// so iterations can run on any worker.
std::uint64_t derive_seed(std::uint64_t master, std::uint64_t index) noexcept;

/// Uniform on [0, 1) from the top 53 bits; identical on every platform,
/// unlike std::uniform_real_distribution.
double uniform01(Rng &rng) noexcept;

/// Uniform on {0, ..., n-1}, n > 0, by rejection.
std::size_t uniform_index(Rng &rng, std::size_t n) noexcept;

/// `count` distinct indices from {0, ..., n-1} by partial Fisher-Yates.
std::vector<std::size_t> sample_without_replacement(Rng &rng, std::size_t n, std::size_t count);

/// Integer quotas summing exactly to `total`, proportional to `weights`.
/// Leftover units go to the largest fractional parts, earlier entries first on ties.
std::vector<std::size_t> largest_remainder(std::size_t total, std::span<const double> weights);

} // namespace pcm
