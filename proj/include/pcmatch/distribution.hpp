#pragma once

#include "pcmatch/core_model.hpp"
#include "pcmatch/estimator.hpp"
#include "pcmatch/matching.hpp"

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace pcm {

struct Summary {
    double median = 0.0;
    double iqr = 0.0;
    double sd = 0.0;
    double min = 0.0;
    double max = 0.0;

    friend bool operator==(const Summary &, const Summary &) = default;
};

/// Median (midpoint rule), IQR from linearly interpolated quartiles, sd with
/// n - 1 in the denominator (0 for a single sample).
Summary summarize(std::span<const double> samples);

/// Linear-interpolation quantile of sorted data, p in [0, 1].
double quantile_sorted(std::span<const double> sorted, double p);

struct IterationResult {
    std::size_t iteration = 0;
    bool skipped = false;
    std::string skip_reason;
    double pc_raw = 0.0;
    double pc_clamped = 0.0;
    double lower = 0.0;
    double upper = 1.0;
};

struct PCDistribution {
    std::string method;
    std::uint64_t master_seed = 0;
    std::vector<IterationResult> iterations;
    std::size_t skipped = 0;
    Summary summary; // over pc_raw of completed iterations
    /// Min of per-iteration lower bounds and max of upper bounds.
    double envelope_lower = 0.0;
    double envelope_upper = 1.0;

    [[nodiscard]] std::vector<double> samples() const;
};

/// Target share of y = 1 inside each arm.
struct StrataRatios {
    double p_effect_given_cause0 = 0.0;
    double p_effect_given_cause1 = 0.0;
};

StrataRatios strata_from_data(const Dataset &dataset);

/// Worker threads for iteration loops; 0 picks the hardware concurrency.
/// Results never depend on this value.
struct Parallelism {
    std::size_t workers = 0;
};

/// Resamples each arm with replacement at its original size, per iteration.
PCDistribution bootstrap_distribution(const Dataset &dataset, const MatchSpec &spec,
                                      std::size_t iterations, std::uint64_t seed,
                                      Parallelism parallelism = {});

/// Draws `arm_size` units per arm without replacement, either uniformly or with
/// per-cell quotas from `strata`.
PCDistribution resampling_distribution(const Dataset &dataset, std::size_t arm_size,
                                       const MatchSpec &spec, std::size_t iterations,
                                       const std::optional<StrataRatios> &strata,
                                       std::uint64_t seed, Parallelism parallelism = {});

/// One estimate per matcher on the full dataset.
PCDistribution ensemble_distribution(const Dataset &dataset, std::span<const MatchSpec> specs,
                                     std::uint64_t seed);

/// Monte Carlo over freshly generated samples: `make_sample` receives the
/// derived seed of each iteration.
PCDistribution replicate_distribution(
    const std::function<PartitionedSample(std::uint64_t)> &make_sample, const MatchSpec &spec,
    std::size_t iterations, std::uint64_t seed, Parallelism parallelism = {});

/// Concatenates runs (one per input file), renumbering iterations in order.
PCDistribution concatenate(std::span<const PCDistribution> runs);

} // namespace pcm
