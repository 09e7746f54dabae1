#include "pcmatch/error.hpp"
#include "pcmatch/estimator.hpp"
#include "pcmatch/io.hpp"
#include "pcmatch/synth.hpp"
#include "support.hpp"

#include <doctest.h>

#include <cmath>
#include <limits>
#include <sstream>

using namespace pcm;
using nlohmann::json;

namespace {

std::string data_file(const char *name) {
    return std::string{PCMATCH_DATA_DIR} + "/" + name;
}

} // namespace

TEST_CASE("unit csv parsing") {
    const auto one = parse_units_csv("id,x,y,Id\nu1,1,1,0.37\n");
    REQUIRE(one.units.size() == 1);
    CHECK(one.covariate_names == std::vector<std::string>{"Id"});
    CHECK(one.units[0].covariates[0] == 0.37);
    CHECK(partition_dataset(one).set_d.size() == 1);

    const auto bare = parse_units_csv("id,x,y\r\nu1,0,1\r\n\n# trailing comment\n");
    CHECK(bare.covariate_names.empty());
    CHECK(bare.units.size() == 1);

    CHECK_THROWS_WITH_AS(parse_units_csv("id,x,y,Id\nu1,1,1,0.3\nu2,2,0,0.1\n", "f.csv"),
                         doctest::Contains("f.csv:3:"), ValidationError);
    CHECK_THROWS_WITH_AS(parse_units_csv("id,x,y,Id\nu1,1,1\n", "f.csv"),
                         doctest::Contains("f.csv:2: expected 4 fields"), ValidationError);
    CHECK_THROWS_WITH_AS(parse_units_csv("id,x,y,Id\nu1,1,1,0.1\nu1,0,0,0.2\n", "f.csv"),
                         doctest::Contains("duplicate id 'u1'"), ValidationError);
    CHECK_THROWS_AS(parse_units_csv("id,x,y,Id\nu1,1,1,nan\n"), ValidationError);
    CHECK_THROWS_AS(parse_units_csv("x,y,id\n"), ValidationError);
    CHECK_THROWS_AS(parse_units_csv(""), ValidationError);
    CHECK_THROWS_AS(load_units_csv("/nonexistent/units.csv"), IoError);
}

TEST_CASE("arm counts from a network export") {
    std::ostringstream csv;
    csv << "id,x,y,Anxiety\n";
    for (int i = 0; i < 2000; ++i) {
        csv << "r" << i << ',' << (i < 1505 ? 1 : 0) << ',' << (i % 3 == 0 ? 1 : 0) << ','
            << (i % 2) << '\n';
    }
    const auto p = partition_dataset(parse_units_csv(csv.str()));
    CHECK(p.n1() == 1505);
    CHECK(p.n0() == 495);
}

TEST_CASE("unit csv round trip is exact") {
    const auto data = gen_example1(40, 0.8, 0.6, 5);
    std::ostringstream out;
    write_units_csv(out, data);
    const auto back = parse_units_csv(out.str());
    REQUIRE(back.units.size() == data.units.size());
    for (std::size_t i = 0; i < data.units.size(); ++i) {
        CHECK(back.units[i].id == data.units[i].id);
        CHECK(back.units[i].covariates == data.units[i].covariates);
        CHECK(back.units[i].x == data.units[i].x);
    }
    std::ostringstream again;
    write_units_csv(again, back);
    CHECK(again.str() == out.str());
}

TEST_CASE("table files") {
    const auto t1 = load_table(data_file("table1_experimental.csv"));
    CHECK(t1 == testing::table(16, 984, 14, 986));
    const auto t2 = load_table(data_file("table2_observational.csv"));
    CHECK(t2 == testing::table(18, 82, 24, 76, Regime::observational));

    std::ostringstream out;
    write_table(out, t2);
    CHECK(parse_table(out.str()) == t2);
    CHECK(looks_like_table(out.str()));
    CHECK_FALSE(looks_like_table("id,x,y\n"));

    CHECK_THROWS_WITH_AS(parse_table("cell,count\nxy,1\nxy_not,2\nx_not_y,3\nregime,experimental\n"),
                         doctest::Contains("missing cell 'x_not_y_not'"), ValidationError);
    CHECK_THROWS_WITH_AS(parse_table("cell,count\nxy,-1\nxy_not,2\nx_not_y,3\nx_not_y_not,4\nregime,experimental\n"),
                         doctest::Contains("negative"), ValidationError);
    CHECK_THROWS_AS(parse_table("cell,count\nxy,1\nxy_not,2\nx_not_y,3\nx_not_y_not,4\n"),
                    ValidationError);
    CHECK_THROWS_AS(parse_table("cell,count\nxy,1\nxy,1\nxy_not,2\nx_not_y,3\nx_not_y_not,4\nregime,experimental\n"),
                    ValidationError);
}

TEST_CASE("number formatting") {
    CHECK(format_number(0.1) == "0.1");
    CHECK(format_number(1.0) == "1");
    CHECK(format_number(std::numeric_limits<double>::infinity()) == "inf");
    CHECK(format_display(0.65694) == "0.6569");
    CHECK(digest("") == "cbf29ce484222325");
    CHECK(digest("a") == "af63dc4c8601ec8c");
}

TEST_CASE("csv artifacts") {
    PCDistribution dist;
    dist.iterations = {IterationResult{0, false, "", 0.5, 0.5, 0.25, 1.0},
                       IterationResult{1, true, "no D", 0, 0, 0, 1},
                       IterationResult{2, false, "", 0.75, 0.75, 0.5, 1.0}};
    std::ostringstream d;
    write_distribution_csv(d, dist);
    CHECK(d.str() == "iteration,pc_raw,pc_clamped,lower,upper\n0,0.5,0.5,0.25,1\n2,0.75,0.75,0.5,1\n");

    SweepCurve curve;
    curve.points = {{0, 1.0}, {1, 0.5}};
    std::ostringstream s;
    write_sweep_csv(s, curve);
    CHECK(s.str() == "k,estimator,value\n0,pn_lower,1\n1,pn_lower,0.5\n");
}

TEST_CASE("json round trips") {
    const auto s = testing::sample_1d({1.0, 2.0}, {}, {5.0}, {1.1, 9.0});
    auto spec = MatchSpec{};
    spec.threshold_t = 0.01;
    spec.mode = AssignmentMode::balanced_assignment;
    const auto est = estimate_pc(s, spec);
    CHECK(std::isinf(est.rr));
    const json j = est;
    CHECK(j.at("rr") == "inf");
    CHECK(j.get<PCEstimate>() == est);

    const PNResult pn{0.5, 1.0, 0.5, 1.25, testing::table(1, 2, 3, 4),
                      testing::table(5, 6, 7, 8, Regime::observational)};
    CHECK(json(pn).get<PNResult>() == pn);

    SweepCurve curve;
    curve.estimator = SweepEstimator::pc_lower_experimental;
    curve.cell = PerturbedCell{TableCell::xy_not, Regime::observational};
    curve.points = {{-2, 0.125}, {-1, 0.0}};
    CHECK(json(curve).get<SweepCurve>() == curve);
}

TEST_CASE("run report round trip is byte stable") {
    RunReport report;
    report.command = {"pcmatch", "estimate", "units.csv"};
    report.inputs = {InputDigest{"units.csv", digest("abc")}};
    report.seed = 18446744073709551615ULL;
    report.payload = estimate_pc(testing::sample_1d({0.3, 0.9}, {0.5}, {0.1}, {0.35, 0.6}),
                                 MatchSpec{});
    report.timing_ms = 1.25;
    const auto text = report_to_json(report).dump();
    const auto back = report_from_json(json::parse(text));
    CHECK(back == report);
    CHECK(report_to_json(back).dump() == text);

    report.seed.reset();
    CHECK(report_from_json(report_to_json(report)) == report);
}
