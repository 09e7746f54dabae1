#include "pcmatch/g2i.hpp"

#include "pcmatch/error.hpp"

#include <algorithm>
#include <sstream>

namespace pcm {

namespace {

std::vector<double> similarities_to_d(const PartitionedSample &sample, const Unit &target,
                                      const MatchSpec &spec) {
    if (target.covariates.size() != sample.covariate_names.size()) {
        throw ValidationError{"target has " + std::to_string(target.covariates.size()) +
                              " covariates, dataset schema has " +
                              std::to_string(sample.covariate_names.size())};
    }
    const auto stats = compute_stats(sample, spec.metric);
    std::vector<double> out;
    out.reserve(sample.set_d.size());
    for (const auto &z : sample.set_d) {
        out.push_back(similarity(distance(target, z, spec.metric, stats)));
    }
    return out;
}

} // namespace

FilteredSample filter_set_d(const PartitionedSample &sample, const IndividualQuery &query) {
    validate(query.spec);
    if (!(query.threshold_t >= 0.0 && query.threshold_t <= 1.0)) {
        throw ValidationError{"similarity threshold must lie in [0, 1]"};
    }
    if (sample.set_d.empty()) {
        throw UndefinedError{"no observed positive-cause positive-effect cases (set D is empty)"};
    }
    const auto sims = similarities_to_d(sample, query.target, query.spec);

    FilteredSample out;
    out.original_d = sample.set_d.size();
    out.max_similarity = *std::max_element(sims.begin(), sims.end());
    out.sample.covariate_names = sample.covariate_names;
    out.sample.set_a = sample.set_a;
    out.sample.set_b = sample.set_b;
    out.sample.set_c = sample.set_c;
    for (std::size_t i = 0; i < sims.size(); ++i) {
        if (sims[i] >= query.threshold_t) {
            out.sample.set_d.push_back(sample.set_d[i]);
        }
    }
    out.retained_d = out.sample.set_d.size();
    if (out.retained_d == 0) {
        std::ostringstream msg;
        msg << "no comparable cases above threshold " << query.threshold_t
            << " (maximum attainable similarity " << out.max_similarity << ")";
        throw UndefinedError{msg.str()};
    }
    return out;
}

IndividualEstimate estimate_individual_pc(const PartitionedSample &sample,
                                          const IndividualQuery &query) {
    const auto filtered = filter_set_d(sample, query);
    IndividualEstimate out;
    // matching geometry stays that of the full population
    out.estimate =
        estimate_pc(filtered.sample, query.spec, compute_stats(sample, query.spec.metric));
    out.original_d = filtered.original_d;
    out.retained_d = filtered.retained_d;
    return out;
}

std::vector<std::pair<double, std::size_t>> retention_profile(const PartitionedSample &sample,
                                                              const Unit &target,
                                                              const MatchSpec &spec) {
    const auto sims = similarities_to_d(sample, target, spec);
    std::vector<std::pair<double, std::size_t>> out;
    for (int decile = 0; decile <= 10; ++decile) {
        const double t = decile / 10.0;
        const auto kept = static_cast<std::size_t>(
            std::count_if(sims.begin(), sims.end(), [t](double s) { return s >= t; }));
        out.emplace_back(t, kept);
    }
    return out;
}

} // namespace pcm
