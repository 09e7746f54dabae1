#pragma once

#include "pcmatch/core_model.hpp"

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace pcm {

enum class Metric {
    identity_threshold,     // Chebyshev distance; zero only for identical covariates
    absolute_difference,    // sum of absolute differences
    euclidean,              // raw Euclidean
    euclidean_standardized, // Euclidean on pooled z-scores
    mahalanobis,
};

enum class TieRule { fractional, lowest_id };

enum class AssignmentMode { with_replacement, balanced_assignment };

struct MatchSpec {
    Metric metric = Metric::euclidean_standardized;
    int m = 1;
    /// Caliper on similarity; candidates below it are never matched.
    std::optional<double> threshold_t;
    TieRule tie_rule = TieRule::fractional;
    AssignmentMode mode = AssignmentMode::with_replacement;

    friend bool operator==(const MatchSpec &, const MatchSpec &) = default;
};

void validate(const MatchSpec &spec);

/// Pooled covariate statistics over every unit of a sample.
struct DatasetStats {
    std::vector<double> mean;
    std::vector<double> sd;
    /// Row-major inverse covariance, present only when requested and invertible.
    std::optional<std::vector<double>> inverse_covariance;

    [[nodiscard]] std::size_t dimension() const noexcept { return mean.size(); }
};

/// Throws when `metric` is mahalanobis and the pooled covariance is singular.
DatasetStats compute_stats(const PartitionedSample &sample, Metric metric);
DatasetStats compute_stats(std::span<const Unit> units, std::size_t dimension, Metric metric);

double distance(std::span<const double> u, std::span<const double> v, Metric metric,
                const DatasetStats &stats);
double distance(const Unit &u, const Unit &v, Metric metric, const DatasetStats &stats);

/// Maps a distance onto (0, 1]; similarity(0) == 1, strictly decreasing.
double similarity(double distance);

struct MatchEntry {
    std::string id;
    Cell source = Cell::a; // A or B
    std::size_t index = 0; // position inside its source set
    double similarity = 0.0;
    double credit = 0.0;
};

/// Nearest elements of A ∪ B to `z`, ordered by descending similarity then id.
/// Under the fractional rule an equidistant group straddling the m-th place
/// shares the remaining credit; under lowest_id the group is cut by id.
std::vector<MatchEntry> nearest_matches(const Unit &z, std::span<const Unit> pool_a,
                                        std::span<const Unit> pool_b, const MatchSpec &spec,
                                        const DatasetStats &stats);

struct MatchAssignment {
    /// One list per element of set D, in set D order. Empty when a threshold
    /// excluded every candidate.
    std::vector<std::vector<MatchEntry>> matches;
    double weighted_into_a = 0.0;
    double weighted_into_b = 0.0;
    std::size_t unmatched = 0;
    /// Distinct pool elements referenced at least once.
    std::size_t distinct_used_a = 0;
    std::size_t distinct_used_b = 0;

    [[nodiscard]] std::size_t matched() const noexcept { return matches.size() - unmatched; }
};

MatchAssignment match_all(const PartitionedSample &sample, const MatchSpec &spec);
MatchAssignment match_all(const PartitionedSample &sample, const MatchSpec &spec,
                          const DatasetStats &stats);

std::string_view to_string(Metric metric) noexcept;
std::string_view to_string(TieRule rule) noexcept;
std::string_view to_string(AssignmentMode mode) noexcept;
Metric parse_metric(std::string_view text);
TieRule parse_tie_rule(std::string_view text);
AssignmentMode parse_mode(std::string_view text);

} // namespace pcm
