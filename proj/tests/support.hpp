#pragma once

#include "pcmatch/core_model.hpp"

#include <initializer_list>
#include <string>
#include <vector>

namespace testing {

inline pcm::Unit unit(std::string id, int x, int y, std::vector<double> covs) {
    return pcm::Unit{std::move(id), std::move(covs), x, y};
}

// One-covariate sample, ids generated per set: a0, a1, ..., b0, ...
inline pcm::PartitionedSample sample_1d(std::initializer_list<double> a,
                                        std::initializer_list<double> b,
                                        std::initializer_list<double> c,
                                        std::initializer_list<double> d) {
    pcm::PartitionedSample s;
    s.covariate_names = {"Id"};
    auto fill = [](std::vector<pcm::Unit> &out, std::initializer_list<double> ids, char tag,
                   int x, int y) {
        int i = 0;
        for (double v : ids) {
            out.push_back(unit(std::string(1, tag) + std::to_string(i++), x, y, {v}));
        }
    };
    fill(s.set_a, a, 'a', 0, 0);
    fill(s.set_b, b, 'b', 0, 1);
    fill(s.set_c, c, 'c', 1, 0);
    fill(s.set_d, d, 'd', 1, 1);
    return s;
}

inline pcm::ContingencyTable table(std::int64_t xy, std::int64_t xy_not, std::int64_t x_not_y,
                                   std::int64_t x_not_y_not,
                                   pcm::Regime regime = pcm::Regime::experimental) {
    return pcm::ContingencyTable{xy, xy_not, x_not_y, x_not_y_not, regime};
}

} // namespace testing
