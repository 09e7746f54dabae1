#pragma once

#include "pcmatch/core_model.hpp"
#include "pcmatch/matching.hpp"

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

namespace pcm {

struct PCBounds {
    double lower = 0.0;
    double upper = 1.0;
};

/// Point estimate of the probability of causation with its diagnostics.
///
/// `a` and `b` are the transition coefficients back-derived from `pc_raw`, so
/// a*|A| + b*|B| == |D| holds by construction. In balanced mode the counted
/// fractions of consumed pool elements are reported as well.
struct PCEstimate {
    double pc_raw = 0.0;
    double pc_clamped = 0.0;
    double a = 0.0;
    double b = 0.0;
    std::optional<double> a_counted;
    std::optional<double> b_counted;
    double rr = 0.0; // may be +infinity
    double bound_lower = 0.0;
    double bound_upper = 1.0;
    bool out_of_bounds = false;
    std::size_t n_a = 0;
    std::size_t n_b = 0;
    std::size_t n_c = 0;
    std::size_t n_d = 0;
    std::size_t d_matched = 0; // set D elements that found a match
    bool balanced_arms = false;
    MatchSpec spec;
    std::vector<std::string> warnings;

    friend bool operator==(const PCEstimate &, const PCEstimate &) = default;
};

PCEstimate estimate_pc(const PartitionedSample &sample, const MatchSpec &spec);
PCEstimate estimate_pc(const PartitionedSample &sample, const MatchSpec &spec,
                       const DatasetStats &stats);

/// P(y | x) / P(y | x'). +infinity when the x' column has no y cases.
double risk_ratio(const ContingencyTable &table);
double risk_ratio(const PartitionedSample &sample);

/// max{0, 1 - 1/RR} <= PC <= min{1, P(y'|x') / P(y|x)}.
PCBounds pc_bounds(const ContingencyTable &table);
PCBounds pc_bounds(const PartitionedSample &sample);

/// Value forced when no B element maps to C (b = 1): 1 - 1/RR.
double pc_under_monotonicity(const ContingencyTable &table);
/// Value forced when every B element maps to C (b = 0): 1.
double pc_under_reverse_monotonicity(const ContingencyTable &table);

double pc_from_coefficients(double b, double rr);

} // namespace pcm
