#include "pcmatch/error.hpp"
#include "pcmatch/estimator.hpp"
#include "pcmatch/sampling.hpp"
#include "pcmatch/synth.hpp"
#include "rational.hpp"
#include "support.hpp"

#include <doctest.h>

#include <cmath>
#include <limits>

using namespace pcm;
using testing::Rational;
using testing::sample_1d;
using testing::table;

namespace {

MatchSpec abs_spec(int m = 1) {
    MatchSpec s;
    s.metric = Metric::absolute_difference;
    s.m = m;
    return s;
}

// Closed-form bounds evaluated in exact arithmetic.
std::pair<Rational, Rational> rational_bounds(const ContingencyTable &t) {
    const Rational p_d{t.n_xy, t.n_x()};
    const Rational p_b{t.n_x_not_y, t.n_x_not()};
    const Rational p_a{t.n_x_not_y_not, t.n_x_not()};
    const Rational lower = t.n_x_not_y == 0 ? Rational{1} : testing::clip01(Rational{1} - p_b / p_d);
    const Rational upper = testing::clip01(p_a / p_d);
    return {lower, upper};
}

} // namespace

TEST_CASE("estimate_pc on the small worked example") {
    const auto s = sample_1d({1.0, 2.0}, {10.0}, {5.0}, {1.1, 9.0});
    const auto est = estimate_pc(s, abs_spec());
    CHECK(est.pc_raw == 0.5);
    CHECK(est.a == 0.5);
    CHECK(est.b == 1.0);
    CHECK(est.a * est.n_a + est.b * est.n_b == 2.0);
    CHECK(est.n_d == 2);
    CHECK(est.balanced_arms);
    CHECK(est.warnings.empty());

    const auto uneven = estimate_pc(sample_1d({1.0, 2.0}, {10.0}, {}, {1.1, 9.0}), abs_spec());
    CHECK_FALSE(uneven.balanced_arms);
    CHECK(uneven.warnings.size() == 2); // unequal arms, clamped
}

TEST_CASE("coincident D and A gives PC 1") {
    const auto s = sample_1d({0.1, 0.2, 0.3}, {5.0, 6.0}, {0.5, 0.6}, {0.1, 0.2, 0.3});
    const auto est = estimate_pc(s, abs_spec());
    CHECK(est.pc_raw == 1.0);
    CHECK(est.b == 0.0);
}

TEST_CASE("unbounded with-replacement estimate is flagged and clamped") {
    // |A| = 1, |D| = 10 all next to the single A element
    const auto s = sample_1d({0.5}, {9, 9.1, 9.2, 9.3, 9.4, 9.5, 9.6, 9.7, 9.8, 9.9},
                             {1},
                             {.5, .5, .5, .5, .5, .5, .5, .5, .5, .5});
    const auto est = estimate_pc(s, abs_spec());
    CHECK(est.pc_raw == 1.0);
    CHECK(est.out_of_bounds);
    CHECK(est.pc_clamped == doctest::Approx(0.1));
    CHECK(est.pc_clamped <= est.bound_upper);
}

TEST_CASE("estimate_pc errors") {
    CHECK_THROWS_AS(estimate_pc(sample_1d({1.0}, {2.0}, {3.0}, {}), abs_spec()), UndefinedError);
    const auto no_a = estimate_pc(sample_1d({}, {2.0}, {3.0}, {2.5}), abs_spec());
    CHECK(no_a.pc_raw == 0.0);
}

TEST_CASE("example-one data recovers the 0.8 target") {
    const auto data = gen_example1(1000, 0.8, 0.6, 42);
    const auto est = estimate_pc(partition_dataset(data), abs_spec());
    CHECK(est.pc_raw == doctest::Approx(0.8).epsilon(0.05));
}

TEST_CASE("risk ratio examples") {
    CHECK(risk_ratio(table(16, 984, 14, 986)) == doctest::Approx(8.0 / 7.0).epsilon(1e-15));
    CHECK(risk_ratio(table(30, 70, 12, 88)) == 2.5);
    CHECK(risk_ratio(table(7, 3, 7, 3)) == 1.0);
    CHECK(std::isinf(risk_ratio(table(7, 3, 0, 10))));
    CHECK_THROWS_AS(risk_ratio(table(0, 3, 0, 10)), UndefinedError);
}

TEST_CASE("pc bounds examples") {
    const auto t1 = pc_bounds(table(16, 984, 14, 986));
    CHECK(t1.lower == 0.125);
    CHECK(t1.upper == 1.0);
    const auto t2 = pc_bounds(table(30, 70, 12, 88));
    CHECK(t2.lower == 0.6);
    CHECK(t2.upper == 1.0);
    const auto flat = pc_bounds(table(5, 5, 5, 5));
    CHECK(flat.lower == 0.0);
    CHECK(flat.upper == 1.0);
    CHECK(pc_bounds(table(5, 5, 0, 10)).lower == 1.0);
    CHECK_THROWS_AS(pc_bounds(table(0, 5, 1, 10)), UndefinedError);
}

TEST_CASE("pc bounds match exact rational arithmetic") {
    Rng rng{31};
    for (int i = 0; i < 5000; ++i) {
        const auto t = table(1 + static_cast<std::int64_t>(uniform_index(rng, 60)),
                             static_cast<std::int64_t>(uniform_index(rng, 60)),
                             static_cast<std::int64_t>(uniform_index(rng, 60)),
                             1 + static_cast<std::int64_t>(uniform_index(rng, 60)));
        const auto got = pc_bounds(t);
        const auto [lower, upper] = rational_bounds(t);
        CHECK(got.lower == lower.to_double());
        CHECK(got.upper == upper.to_double());
    }
}

TEST_CASE("corollaries") {
    CHECK(pc_under_monotonicity(table(30, 70, 12, 88)) == 0.6);
    CHECK(pc_under_monotonicity(table(4, 6, 4, 6)) == 0.0);
    CHECK_THROWS_AS(pc_under_monotonicity(table(3, 7, 4, 6)), InfeasibleError);

    CHECK(pc_under_reverse_monotonicity(table(30, 70, 12, 88)) == 1.0);
    CHECK_THROWS_AS(pc_under_reverse_monotonicity(table(30, 2, 12, 88)), InfeasibleError);
    CHECK(pc_under_reverse_monotonicity(table(30, 0, 0, 88)) == 1.0);

    CHECK(pc_from_coefficients(1.0, 2.5) == doctest::Approx(0.6).epsilon(1e-15));
    CHECK(pc_from_coefficients(0.0, 2.5) == 1.0);
    CHECK(pc_from_coefficients(1.0, 1.0) == 0.0);
    CHECK_THROWS_AS(pc_from_coefficients(1.5, 2.0), ValidationError);
    CHECK_THROWS_AS(pc_from_coefficients(0.5, 0.0), ValidationError);
}

TEST_CASE("estimate invariants over random samples") {
    Rng rng{8};
    for (int trial = 0; trial < 200; ++trial) {
        PartitionedSample s;
        s.covariate_names = {"Id"};
        const auto n = 10 + uniform_index(rng, 40);
        const auto nb = 1 + uniform_index(rng, n - 1);
        const auto nd = 1 + uniform_index(rng, n - 1);
        for (std::size_t i = 0; i < n; ++i) {
            const bool b = i < nb;
            (b ? s.set_b : s.set_a).push_back(testing::unit("p" + std::to_string(i), 0, b ? 1 : 0, {uniform01(rng)}));
            const bool d = i < nd;
            (d ? s.set_d : s.set_c).push_back(testing::unit("q" + std::to_string(i), 1, d ? 1 : 0, {uniform01(rng)}));
        }
        for (auto mode : {AssignmentMode::with_replacement, AssignmentMode::balanced_assignment}) {
            auto spec = abs_spec(1 + trial % 3);
            spec.mode = mode;
            if (mode == AssignmentMode::balanced_assignment &&
                s.n0() < s.set_d.size() * static_cast<std::size_t>(spec.m)) {
                continue;
            }
            const auto est = estimate_pc(s, spec);
            CHECK(est.pc_raw >= 0.0);
            CHECK(est.pc_raw <= 1.0);
            CHECK(est.pc_clamped >= est.bound_lower);
            CHECK(est.pc_clamped <= est.bound_upper);
            CHECK(std::fabs(est.pc_raw - (1.0 - est.b * double(est.n_b) / double(est.n_d))) <= 1e-12);
            if (mode == AssignmentMode::balanced_assignment) {
                CHECK_FALSE(est.out_of_bounds);
                CHECK(est.a <= 1.0 + 1e-12);
                CHECK(est.b <= 1.0 + 1e-12);
                REQUIRE(est.a_counted.has_value());
            }
        }
    }
}
