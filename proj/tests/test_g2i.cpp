#include "pcmatch/error.hpp"
#include "pcmatch/g2i.hpp"
#include "pcmatch/synth.hpp"
#include "support.hpp"

#include <doctest.h>

#include <cmath>

using namespace pcm;
using testing::sample_1d;
using testing::unit;

namespace {

IndividualQuery query(double id, double t) {
    MatchSpec spec;
    spec.metric = Metric::absolute_difference;
    return IndividualQuery{unit("target", 1, 1, {id}), t, spec};
}

} // namespace

TEST_CASE("filter examples") {
    const auto s = sample_1d({0.1, 0.7}, {0.3}, {0.2}, {0.49, 0.51, 0.90});
    CHECK(filter_set_d(s, query(0.5, 0.0)).retained_d == 3);

    const auto near = filter_set_d(s, query(0.5, 0.9));
    CHECK(near.retained_d == 2);
    CHECK(near.sample.set_d[0].id == "d0");
    CHECK(near.sample.set_d[1].id == "d1");
    CHECK(near.sample.set_a.size() == 2);
    CHECK(near.original_d == 3);

    CHECK(filter_set_d(s, query(0.9, 1.0)).retained_d == 1);

    try {
        (void)filter_set_d(s, query(5.0, 0.9));
        FAIL("expected an error");
    } catch (const UndefinedError &e) {
        const std::string msg = e.what();
        CHECK(msg.find("no comparable cases above threshold") != std::string::npos);
        CHECK(msg.find("maximum attainable similarity") != std::string::npos);
    }
    CHECK_THROWS_AS(filter_set_d(s, query(0.5, 1.5)), ValidationError);
}

TEST_CASE("individual estimates") {
    const auto s = sample_1d({0.1, 0.7}, {0.3}, {0.2}, {0.49, 0.51, 0.90});
    const auto full = estimate_pc(s, query(0.5, 0).spec);
    CHECK(estimate_individual_pc(s, query(0.5, 0.0)).estimate == full);

    const auto one = estimate_individual_pc(s, query(0.9, 1.0));
    CHECK(one.retained_d == 1);
    CHECK(one.estimate.pc_raw == 1.0); // 0.90 is nearest to A's 0.7
}

TEST_CASE("retention is monotone in the threshold") {
    const auto s = partition_dataset(gen_example1(500, 0.8, 0.6, 3));
    const auto profile = retention_profile(s, unit("t", 1, 1, {0.5}), query(0.5, 0).spec);
    REQUIRE(profile.size() == 11);
    CHECK(profile.front().second == s.set_d.size());
    for (std::size_t i = 1; i < profile.size(); ++i) {
        CHECK(profile[i].first == doctest::Approx(i / 10.0));
        CHECK(profile[i].second <= profile[i - 1].second);
    }
}

TEST_CASE("restricting D on example-one data keeps PC near the target") {
    const auto s = partition_dataset(gen_example1(1000, 0.8, 0.6, 21));
    // similarity >= 1/1.1 keeps Ids within 0.1 of the target, about 20% of D
    const auto est = estimate_individual_pc(s, query(0.5, 1.0 / 1.1));
    CHECK(est.retained_d > 50);
    CHECK(est.retained_d < 120);
    CHECK(std::fabs(est.estimate.pc_raw - 0.8) < 0.1);
}
