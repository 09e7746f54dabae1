#include "pcmatch/error.hpp"
#include "pcmatch/pn_robustness.hpp"
#include "pcmatch/sampling.hpp"
#include "rational.hpp"
#include "support.hpp"

#include <doctest.h>

using namespace pcm;
using testing::Rational;
using testing::table;

namespace {

const auto table1_exp = table(16, 984, 14, 986);
const auto table1_obs = table(2, 998, 28, 972, Regime::observational);
const auto table2_exp = table(30, 70, 12, 88);
const auto table2_obs = table(18, 82, 24, 76, Regime::observational);

// Bounds written as probabilities, evaluated exactly.
std::pair<Rational, Rational> rational_pn(const ContingencyTable &e, const ContingencyTable &o) {
    const Rational n{o.total()};
    const Rational p_xy = Rational{o.n_xy} / n;
    const Rational p_y = Rational{o.n_xy + o.n_x_not_y} / n;
    const Rational p_x_not_y_not = Rational{o.n_x_not_y_not} / n;
    const Rational p_y_do_x_not{e.n_x_not_y, e.n_x_not()};
    const Rational p_y_not_do_x_not{e.n_x_not_y_not, e.n_x_not()};
    return {(p_y - p_y_do_x_not) / p_xy, (p_y_not_do_x_not - p_x_not_y_not) / p_xy};
}

} // namespace

TEST_CASE("PN on the Table 1 pair is one, and zero after one extra x' death") {
    const auto r = pn_bounds(table1_exp, table1_obs);
    CHECK(r.raw_lower == 1.0);
    CHECK(r.pn_lower == 1.0);
    CHECK(r.pn_upper == 1.0);
    const auto moved = pn_bounds(table(16, 984, 15, 985), table1_obs);
    CHECK(moved.raw_lower == 0.0);
    CHECK(moved.pn_lower == 0.0);
}

TEST_CASE("PN on the Table 2 pair") {
    const auto r = pn_bounds(table2_exp, table2_obs);
    CHECK(r.raw_lower == 1.0);
    CHECK(r.pn_lower <= r.pn_upper);
    CHECK(r.experimental == table2_exp);
}

TEST_CASE("PN equals the exact rational formula") {
    Rng rng{4};
    for (int i = 0; i < 3000; ++i) {
        auto draw = [&] { return static_cast<std::int64_t>(uniform_index(rng, 50)); };
        const auto e = table(draw(), draw(), draw(), 1 + draw());
        const auto o = table(1 + draw(), draw(), draw(), draw(), Regime::observational);
        const auto got = pn_bounds(e, o);
        const auto [lower, upper] = rational_pn(e, o);
        CHECK(got.raw_lower == lower.to_double());
        CHECK(got.raw_upper == upper.to_double());
        CHECK(got.pn_lower == testing::clip01(lower).to_double());
        CHECK(got.pn_upper == testing::clip01(upper).to_double());
    }
}

TEST_CASE("PN errors") {
    CHECK_THROWS_WITH_AS(pn_bounds(table1_exp, table(0, 998, 28, 972, Regime::observational)),
                         "PN undefined: no observed (x,y) cases", UndefinedError);
}

TEST_CASE("pc_lower_experimental") {
    CHECK(pc_lower_experimental(table1_exp) == 0.125);
    CHECK(pc_lower_experimental(table2_exp) == 0.6);
    CHECK(pc_lower_experimental(table(10, 90, 10, 90)) == 0.0);
    CHECK_THROWS_AS(pc_lower_experimental(table(0, 90, 10, 90)), UndefinedError);
}

TEST_CASE("perturbation keeps column totals") {
    const auto t = perturb(table1_exp, TableCell::x_not_y, 3);
    CHECK(t.n_x_not_y == 17);
    CHECK(t.n_x_not_y_not == 983);
    CHECK(t.n_x_not() == table1_exp.n_x_not());
    CHECK(perturb(table1_exp, TableCell::xy_not, -4).n_xy == 20);
    CHECK_THROWS_WITH_AS(perturb(table1_exp, TableCell::x_not_y, -15),
                         doctest::Contains("k = -15"), ValidationError);
}

TEST_CASE("sweep examples") {
    const PerturbedCell cell{TableCell::x_not_y, Regime::experimental};
    const auto t1 = sensitivity_sweep(table1_exp, table1_obs, cell, 0, 5, SweepEstimator::pn_lower);
    REQUIRE(t1.points.size() == 6);
    CHECK(t1.points[0].value == 1.0);
    for (std::size_t k = 1; k < 6; ++k) {
        CHECK(t1.points[k].k == static_cast<long>(k));
        CHECK(t1.points[k].value == 0.0);
    }

    const auto pc = sensitivity_sweep(table1_exp, std::nullopt, cell, 0, 5,
                                      SweepEstimator::pc_lower_experimental);
    CHECK(pc.points[0].value == doctest::Approx(2.0 / 16.0));
    CHECK(pc.points[1].value == doctest::Approx(1.0 / 16.0));
    CHECK(pc.points[2].value == 0.0);
    CHECK(pc.points[5].value == 0.0);

    const auto t2 = sensitivity_sweep(table2_exp, table2_obs, cell, 0, 9, SweepEstimator::pn_lower);
    REQUIRE(t2.points.size() == 10);
    for (const auto &p : t2.points) {
        CHECK(std::abs(p.value - (9.0 - static_cast<double>(p.k)) / 9.0) <= 1e-12);
    }
    CHECK(t2.points.back().value == 0.0);

    CHECK_THROWS_AS(sensitivity_sweep(table1_exp, std::nullopt, cell, 0, 3, SweepEstimator::pn_lower),
                    ValidationError);
    CHECK_THROWS_AS(sensitivity_sweep(table1_exp, table1_obs, cell, 0, 990, SweepEstimator::pn_lower),
                    ValidationError);
    CHECK_THROWS_AS(sensitivity_sweep(table1_exp, table1_obs, cell, 3, 2, SweepEstimator::pn_lower),
                    ValidationError);
}

TEST_CASE("sweep on the observational table") {
    const PerturbedCell cell{TableCell::xy, Regime::observational};
    const auto curve = sensitivity_sweep(table2_exp, table2_obs, cell, 0, 2, SweepEstimator::pn_lower);
    CHECK(curve.points.size() == 3);
    for (const auto &p : curve.points) {
        CHECK(p.value >= 0.0);
        CHECK(p.value <= 1.0);
    }
}

TEST_CASE("cell names") {
    CHECK(parse_perturbed_cell("x'y@experimental") == PerturbedCell{TableCell::x_not_y, Regime::experimental});
    CHECK(parse_perturbed_cell("xy_not@observational") == PerturbedCell{TableCell::xy_not, Regime::observational});
    CHECK(parse_perturbed_cell("x'y'") == PerturbedCell{TableCell::x_not_y_not, Regime::experimental});
    CHECK(to_string(PerturbedCell{TableCell::x_not_y, Regime::experimental}) == "x'y@experimental");
    CHECK_THROWS_AS(parse_table_cell("yy"), ValidationError);
    CHECK(parse_sweep_estimator("pc_lower_experimental") == SweepEstimator::pc_lower_experimental);
}
