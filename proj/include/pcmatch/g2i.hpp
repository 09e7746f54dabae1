#pragma once

#include "pcmatch/core_model.hpp"
#include "pcmatch/estimator.hpp"
#include "pcmatch/matching.hpp"

#include <cstddef>
#include <utility>
#include <vector>

namespace pcm {

/// Group-to-individual query: set D is restricted to cases whose similarity
/// to `target` is at least `threshold_t`. A, B and C are left untouched.
struct IndividualQuery {
    Unit target;
    double threshold_t = 0.0;
    MatchSpec spec;
};

struct FilteredSample {
    PartitionedSample sample;
    std::size_t original_d = 0;
    std::size_t retained_d = 0;
    double max_similarity = 0.0;
};

FilteredSample filter_set_d(const PartitionedSample &sample, const IndividualQuery &query);

struct IndividualEstimate {
    PCEstimate estimate;
    std::size_t original_d = 0;
    std::size_t retained_d = 0;
};

IndividualEstimate estimate_individual_pc(const PartitionedSample &sample,
                                          const IndividualQuery &query);

/// Retained |D| at T = 0.0, 0.1, ..., 1.0.
std::vector<std::pair<double, std::size_t>> retention_profile(const PartitionedSample &sample,
                                                              const Unit &target,
                                                              const MatchSpec &spec);

} // namespace pcm
