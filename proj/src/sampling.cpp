#include "pcmatch/sampling.hpp"

#include "pcmatch/error.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace pcm {

std::uint64_t splitmix64(std::uint64_t x) noexcept {
    x += 0x9E3779B97F4A7C15ULL;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
}

std::uint64_t derive_seed(std::uint64_t master, std::uint64_t index) noexcept {
    return splitmix64(splitmix64(master) ^ splitmix64(~index));
}

double uniform01(Rng &rng) noexcept {
    return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

std::size_t uniform_index(Rng &rng, std::size_t n) noexcept {
    const auto range = static_cast<std::uint64_t>(n);
    const auto limit = Rng::max() - Rng::max() % range;
    std::uint64_t draw = rng();
    while (draw >= limit) {
        draw = rng();
    }
    return static_cast<std::size_t>(draw % range);
}

std::vector<std::size_t> sample_without_replacement(Rng &rng, std::size_t n, std::size_t count) {
    if (count > n) {
        throw ValidationError{"cannot draw " + std::to_string(count) + " of " +
                              std::to_string(n) + " without replacement"};
    }
    std::vector<std::size_t> pool(n);
    std::iota(pool.begin(), pool.end(), std::size_t{0});
    for (std::size_t i = 0; i < count; ++i) {
        std::swap(pool[i], pool[i + uniform_index(rng, n - i)]);
    }
    pool.resize(count);
    return pool;
}

std::vector<std::size_t> largest_remainder(std::size_t total, std::span<const double> weights) {
    if (weights.empty()) {
        throw ValidationError{"largest_remainder: no weights"};
    }
    double sum = 0.0;
    for (double w : weights) {
        if (!(w >= 0.0) || !std::isfinite(w)) {
            throw ValidationError{"largest_remainder: weights must be finite and nonnegative"};
        }
        sum += w;
    }
    if (!(sum > 0.0)) {
        throw ValidationError{"largest_remainder: weights sum to zero"};
    }
    const auto n = weights.size();
    std::vector<std::size_t> quotas(n);
    std::vector<double> remainders(n);
    std::size_t assigned = 0;
    for (std::size_t i = 0; i < n; ++i) {
        const double exact = static_cast<double>(total) * weights[i] / sum;
        // absorbs representation error such as 1000 * 0.998 = 997.9999...
        const double base = std::floor(exact + 1e-9);
        quotas[i] = static_cast<std::size_t>(base);
        remainders[i] = exact - base;
        assigned += quotas[i];
    }
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    while (assigned > total) {
        std::size_t pick = n;
        for (std::size_t i = 0; i < n; ++i) {
            if (quotas[i] > 0 && (pick == n || remainders[i] < remainders[pick])) {
                pick = i;
            }
        }
        --quotas[pick];
        remainders[pick] += 1.0;
        --assigned;
    }
    std::stable_sort(order.begin(), order.end(),
                     [&](auto l, auto r) { return remainders[l] > remainders[r]; });
    for (std::size_t k = 0; assigned < total; k = (k + 1) % n, ++assigned) {
        ++quotas[order[k]];
    }
    return quotas;
}

} // namespace pcm
