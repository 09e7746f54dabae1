#include "pcmatch/core_model.hpp"
#include "pcmatch/error.hpp"
#include "support.hpp"

#include <doctest.h>

using namespace pcm;
using testing::table;
using testing::unit;

TEST_CASE("partition puts one unit in each cell") {
    Dataset data{{"Id"},
                 {unit("p", 0, 0, {1}), unit("q", 0, 1, {2}), unit("r", 1, 0, {3}),
                  unit("s", 1, 1, {4})}};
    const auto p = partition_dataset(data);
    CHECK(p.set_a.size() == 1);
    CHECK(p.set_b.size() == 1);
    CHECK(p.set_c.size() == 1);
    CHECK(p.set_d.size() == 1);
    CHECK(p.set_d.front().id == "s");
    CHECK(p.balanced());
}

TEST_CASE("partition of the Table 1 observational counts") {
    Dataset data{{}, {}};
    auto add = [&](int x, int y, int count) {
        for (int i = 0; i < count; ++i) {
            data.units.push_back(
                unit(std::to_string(x) + std::to_string(y) + "_" + std::to_string(i), x, y, {}));
        }
    };
    add(1, 1, 2);
    add(1, 0, 998);
    add(0, 1, 28);
    add(0, 0, 972);
    const auto p = partition_dataset(data);
    CHECK(p.set_d.size() == 2);
    CHECK(p.set_b.size() == 28);
    CHECK(p.set_a.size() == 972);
    CHECK(p.set_c.size() == 998);
    const auto t = contingency_from_partition(p);
    CHECK(t == table(2, 998, 28, 972, Regime::observational));
}

TEST_CASE("partition rejects bad input") {
    SUBCASE("duplicate id") {
        Dataset data{{"Id"}, {unit("u", 0, 0, {1}), unit("u", 1, 1, {2})}};
        CHECK_THROWS_AS(partition_dataset(data), ValidationError);
    }
    SUBCASE("non-binary x") {
        Dataset data{{"Id"}, {unit("u", 2, 0, {1})}};
        CHECK_THROWS_AS(partition_dataset(data), ValidationError);
    }
    SUBCASE("non-binary y") {
        Dataset data{{"Id"}, {unit("u", 0, -1, {1})}};
        CHECK_THROWS_AS(partition_dataset(data), ValidationError);
    }
    SUBCASE("covariate arity") {
        Dataset data{{"Id"}, {unit("u", 0, 0, {1, 2})}};
        CHECK_THROWS_AS(partition_dataset(data), ValidationError);
    }
}

TEST_CASE("contingency table edge cases") {
    const auto empty_d = testing::sample_1d({0.1}, {0.2}, {0.3}, {});
    CHECK(contingency_from_partition(empty_d).n_xy == 0);

    const auto five = testing::sample_1d({1, 2, 3, 4, 5}, {1, 2, 3, 4, 5}, {1, 2, 3, 4, 5},
                                         {1, 2, 3, 4, 5});
    CHECK(contingency_from_partition(five) == table(5, 5, 5, 5, Regime::observational));

    CHECK_THROWS_AS(validate(table(-1, 0, 0, 0)), ValidationError);
}

TEST_CASE("conditional probabilities") {
    const auto t1 = conditional_probs(table(16, 984, 14, 986));
    CHECK(t1.p_y_given_x == doctest::Approx(0.016).epsilon(1e-15));
    CHECK(t1.p_y_given_x_not == doctest::Approx(0.014).epsilon(1e-15));

    const auto t2 = conditional_probs(table(30, 70, 12, 88));
    CHECK(t2.p_y_given_x == doctest::Approx(0.30));
    CHECK(t2.p_y_given_x_not == doctest::Approx(0.12));
    CHECK(t2.p_y == doctest::Approx(42.0 / 200.0));

    CHECK(conditional_probs(table(0, 10, 0, 7)).p_y_given_x == 0.0);

    try {
        (void)conditional_probs(table(0, 0, 3, 4));
        FAIL("expected an error");
    } catch (const UndefinedError &e) {
        CHECK(std::string{e.what()}.find("x") != std::string::npos);
    }
}

TEST_CASE("regime names round-trip") {
    CHECK(parse_regime(to_string(Regime::experimental)) == Regime::experimental);
    CHECK(parse_regime("observational") == Regime::observational);
    CHECK_THROWS_AS(parse_regime("clinical"), ValidationError);
}
