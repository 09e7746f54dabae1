// pcmatch: probability of causation from unit-level data via covariate matching.
//
// Every subcommand prints a JSON run report on stdout. Stochastic commands
// require --seed; there is no clock-based default.

#include "pcmatch/core_model.hpp"
#include "pcmatch/distribution.hpp"
#include "pcmatch/error.hpp"
#include "pcmatch/estimator.hpp"
#include "pcmatch/g2i.hpp"
#include "pcmatch/io.hpp"
#include "pcmatch/matching.hpp"
#include "pcmatch/pn_robustness.hpp"
#include "pcmatch/sampling.hpp"
#include "pcmatch/synth.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <chrono>
#include <cmath>
#include <fstream>
#include <functional>
#include <iostream>
#include <sstream>

namespace {

using nlohmann::json;

struct MatchOptions {
    std::string metric = "euclidean_standardized";
    int m = 1;
    std::optional<double> caliper;
    std::string tie_rule = "fractional";
    std::string mode = "with_replacement";

    [[nodiscard]] pcm::MatchSpec spec() const {
        pcm::MatchSpec s;
        s.metric = pcm::parse_metric(metric);
        s.m = m;
        s.threshold_t = caliper;
        s.tie_rule = pcm::parse_tie_rule(tie_rule);
        s.mode = pcm::parse_mode(mode);
        pcm::validate(s);
        return s;
    }
};

void add_match_options(CLI::App *cmd, MatchOptions &opts) {
    cmd->add_option("--metric", opts.metric,
                    "identity_threshold | absolute_difference | euclidean | "
                    "euclidean_standardized | mahalanobis")
        ->capture_default_str();
    cmd->add_option("--m", opts.m, "matches per set D element")->capture_default_str();
    cmd->add_option("--caliper", opts.caliper, "minimum similarity for a match, in [0, 1]");
    cmd->add_option("--tie-rule", opts.tie_rule, "fractional | lowest_id")->capture_default_str();
    cmd->add_option("--mode", opts.mode, "with_replacement | balanced_assignment")
        ->capture_default_str();
}

struct Input {
    std::string path;
    std::string text;
};

Input read_input(const std::string &path) {
    return Input{path, pcm::read_source(path)};
}

class Reporter {
  public:
    explicit Reporter(std::vector<std::string> command) { report_.command = std::move(command); }

    const std::string &record(const Input &in) {
        report_.inputs.push_back(pcm::InputDigest{in.path, pcm::digest(in.text)});
        return in.text;
    }
    void seed(std::uint64_t s) { report_.seed = s; }
    void payload(json p) { report_.payload = std::move(p); }

    void emit(std::chrono::steady_clock::time_point start) {
        report_.timing_ms = std::chrono::duration<double, std::milli>(
                                std::chrono::steady_clock::now() - start)
                                .count();
        std::cout << pcm::report_to_json(report_).dump(2) << '\n';
    }

  private:
    pcm::RunReport report_;
};

// "-" writes to stdout.
void write_artifact(const std::string &path, const std::function<void(std::ostream &)> &writer) {
    if (path == "-") {
        writer(std::cout);
        std::cout.flush();
        return;
    }
    std::ofstream out{path, std::ios::binary};
    if (!out) {
        throw pcm::IoError{"cannot write '" + path + "'"};
    }
    writer(out);
}

pcm::StrataRatios parse_strata(const std::string &text, const pcm::Dataset &data) {
    if (text == "data") {
        return pcm::strata_from_data(data);
    }
    const auto comma = text.find(',');
    if (comma == std::string::npos) {
        throw pcm::ValidationError{"--strata expects \"p0,p1\" or \"data\""};
    }
    try {
        return pcm::StrataRatios{std::stod(text.substr(0, comma)), std::stod(text.substr(comma + 1))};
    } catch (const std::exception &) {
        throw pcm::ValidationError{"--strata expects \"p0,p1\" or \"data\""};
    }
}

pcm::Unit parse_target(const std::string &text, const pcm::Dataset &data) {
    std::istringstream in{text};
    std::string header;
    std::getline(in, header);
    if (header.rfind("id,", 0) != 0) {
        // covariate-only row: give it placeholder id and cell
        std::string body;
        std::getline(in, body);
        return parse_target("id,x,y," + header + "\ntarget,1,1," + body + "\n", data);
    }
    const auto parsed = pcm::parse_units_csv(text, "target");
    if (parsed.units.size() != 1) {
        throw pcm::ValidationError{"target file must contain exactly one row"};
    }
    if (parsed.covariate_names != data.covariate_names) {
        throw pcm::ValidationError{"target covariates do not match the dataset schema"};
    }
    return parsed.units.front();
}

} // namespace

int main(int argc, char **argv) {
    CLI::App app{"pcmatch: probability of causation via covariate matching"};
    app.require_subcommand(1);
    std::vector<std::string> command(argv, argv + argc);
    Reporter reporter{command};

    // partition
    std::string partition_path;
    auto *partition_cmd = app.add_subcommand("partition", "set counts and arm balance");
    partition_cmd->add_option("units", partition_path, "unit CSV ('-' for stdin)")->required();

    // estimate
    std::string estimate_path;
    MatchOptions estimate_opts;
    auto *estimate_cmd = app.add_subcommand("estimate", "PC point estimate by matching");
    estimate_cmd->add_option("units", estimate_path, "unit CSV ('-' for stdin)")->required();
    add_match_options(estimate_cmd, estimate_opts);

    // bounds
    std::string bounds_path;
    auto *bounds_cmd =
        app.add_subcommand("bounds", "PC bounds, risk ratio and values under monotonicity assumptions");
    bounds_cmd->add_option("input", bounds_path, "unit CSV or table CSV")->required();

    // pn
    std::string pn_exp;
    std::string pn_obs;
    auto *pn_cmd = app.add_subcommand("pn", "PN bounds from experimental + observational tables");
    pn_cmd->add_option("experimental", pn_exp)->required();
    pn_cmd->add_option("observational", pn_obs)->required();

    // sweep
    std::string sweep_exp;
    std::string sweep_obs;
    std::string sweep_cell = "x'y@experimental";
    long sweep_k_min = 0;
    long sweep_k_max = 0;
    std::string sweep_estimator = "pn_lower";
    std::string sweep_csv;
    auto *sweep_cmd = app.add_subcommand("sweep", "perturbation sweep of one table cell");
    sweep_cmd->add_option("experimental", sweep_exp)->required();
    sweep_cmd->add_option("observational", sweep_obs);
    sweep_cmd->add_option("--cell", sweep_cell, "cell@table, e.g. x'y@experimental")
        ->capture_default_str();
    sweep_cmd->add_option("--k-min", sweep_k_min)->capture_default_str();
    sweep_cmd->add_option("--k-max", sweep_k_max)->required();
    sweep_cmd->add_option("--estimator", sweep_estimator, "pn_lower | pc_lower_experimental")
        ->capture_default_str();
    sweep_cmd->add_option("--csv", sweep_csv, "write the curve as CSV ('-' for stdout)");

    // distribution
    std::vector<std::string> dist_paths;
    std::string dist_method = "bootstrap";
    std::size_t dist_iterations = 1000;
    std::size_t dist_arm_size = 0;
    std::string dist_strata;
    std::uint64_t dist_seed = 0;
    std::size_t dist_workers = 0;
    std::vector<int> ensemble_m;
    std::vector<std::string> ensemble_metrics;
    std::string dist_csv;
    MatchOptions dist_opts;
    auto *dist_cmd = app.add_subcommand("distribution", "PC distribution by resampling");
    dist_cmd->add_option("units", dist_paths, "one or more unit CSVs; samples are concatenated")
        ->required();
    dist_cmd->add_option("--method", dist_method, "bootstrap | resample | ensemble")
        ->capture_default_str();
    dist_cmd->add_option("--iterations", dist_iterations)->capture_default_str();
    dist_cmd->add_option("--arm-size", dist_arm_size, "units per arm (resample)");
    dist_cmd->add_option("--strata", dist_strata, "\"p0,p1\" or \"data\" (resample)");
    dist_cmd->add_option("--seed", dist_seed)->required();
    dist_cmd->add_option("--workers", dist_workers, "0 = all cores")->capture_default_str();
    dist_cmd->add_option("--ensemble-m", ensemble_m, "match counts for the ensemble")
        ->delimiter(',');
    dist_cmd->add_option("--ensemble-metrics", ensemble_metrics, "metrics for the ensemble")
        ->delimiter(',');
    dist_cmd->add_option("--csv", dist_csv, "write per-iteration samples ('-' for stdout)");
    add_match_options(dist_cmd, dist_opts);

    // simulate
    bool sim_example1 = false;
    std::string sim_network;
    std::size_t sim_n = 0;
    double sim_ab = 0.8;
    double sim_cd = 0.6;
    std::uint64_t sim_seed = 0;
    std::string sim_out = "-";
    auto *sim_cmd = app.add_subcommand("simulate", "generate a unit CSV");
    auto *ex1_flag = sim_cmd->add_flag("--example1", sim_example1, "uniform-Id generator");
    auto *net_opt = sim_cmd->add_option("--network", sim_network, "binary network JSON");
    ex1_flag->excludes(net_opt);
    sim_cmd->add_option("--n", sim_n, "units per arm (--example1) or in total (--network)")
        ->required();
    sim_cmd->add_option("--ab-split", sim_ab, "share of set A in the x = 0 arm")
        ->capture_default_str();
    sim_cmd->add_option("--cd-split", sim_cd, "share of set C in the x = 1 arm")
        ->capture_default_str();
    sim_cmd->add_option("--seed", sim_seed)->required();
    sim_cmd->add_option("--out", sim_out, "output path ('-' for stdout)")->capture_default_str();

    // g2i
    std::string g2i_units;
    std::string g2i_target;
    double g2i_threshold = 0.0;
    MatchOptions g2i_opts;
    auto *g2i_cmd = app.add_subcommand("g2i", "individual PC on a similarity-filtered set D");
    g2i_cmd->add_option("units", g2i_units)->required();
    g2i_cmd->add_option("target", g2i_target, "one-row CSV with the dataset's covariates")
        ->required();
    g2i_cmd->add_option("--threshold", g2i_threshold, "similarity threshold T in [0, 1]")
        ->required();
    add_match_options(g2i_cmd, g2i_opts);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError &e) {
        return app.exit(e);
    }

    const auto start = std::chrono::steady_clock::now();
    try {
        if (*partition_cmd) {
            const auto in = read_input(partition_path);
            const auto sample = pcm::partition_dataset(
                pcm::parse_units_csv(reporter.record(in), partition_path));
            reporter.payload({{"counts",
                               {{"A", sample.set_a.size()},
                                {"B", sample.set_b.size()},
                                {"C", sample.set_c.size()},
                                {"D", sample.set_d.size()}}},
                              {"n0", sample.n0()},
                              {"n1", sample.n1()},
                              {"balanced", sample.balanced()},
                              {"table", pcm::contingency_from_partition(sample)}});
        } else if (*estimate_cmd) {
            const auto in = read_input(estimate_path);
            const auto sample = pcm::partition_dataset(
                pcm::parse_units_csv(reporter.record(in), estimate_path));
            reporter.payload(pcm::estimate_pc(sample, estimate_opts.spec()));
        } else if (*bounds_cmd) {
            const auto in = read_input(bounds_path);
            const auto &text = reporter.record(in);
            const auto table =
                pcm::looks_like_table(text)
                    ? pcm::parse_table(text, bounds_path)
                    : pcm::contingency_from_partition(
                          pcm::partition_dataset(pcm::parse_units_csv(text, bounds_path)));
            const auto bounds = pcm::pc_bounds(table);
            auto assumed = [](const std::function<double()> &f) {
                try {
                    return json{{"feasible", true}, {"value", f()}};
                } catch (const pcm::Error &e) {
                    return json{{"feasible", false}, {"error", e.what()}};
                }
            };
            reporter.payload(
                {{"table", table},
                 {"rr", std::isinf(pcm::risk_ratio(table)) ? json("inf")
                                                            : json(pcm::risk_ratio(table))},
                 {"bounds", {{"lower", bounds.lower}, {"upper", bounds.upper}}},
                 {"monotonicity", assumed([&] { return pcm::pc_under_monotonicity(table); })},
                 {"reverse_monotonicity",
                  assumed([&] { return pcm::pc_under_reverse_monotonicity(table); })}});
        } else if (*pn_cmd) {
            const auto exp_in = read_input(pn_exp);
            const auto obs_in = read_input(pn_obs);
            const auto exp = pcm::parse_table(reporter.record(exp_in), pn_exp);
            const auto obs = pcm::parse_table(reporter.record(obs_in), pn_obs);
            if (exp.regime != pcm::Regime::experimental ||
                obs.regime != pcm::Regime::observational) {
                throw pcm::ValidationError{
                    "pn expects an experimental table followed by an observational table"};
            }
            reporter.payload(pcm::pn_bounds(exp, obs));
        } else if (*sweep_cmd) {
            const auto exp_in = read_input(sweep_exp);
            const auto exp = pcm::parse_table(reporter.record(exp_in), sweep_exp);
            std::optional<pcm::ContingencyTable> obs;
            if (!sweep_obs.empty()) {
                const auto obs_in = read_input(sweep_obs);
                obs = pcm::parse_table(reporter.record(obs_in), sweep_obs);
            }
            const auto curve = pcm::sensitivity_sweep(
                exp, obs, pcm::parse_perturbed_cell(sweep_cell), sweep_k_min, sweep_k_max,
                pcm::parse_sweep_estimator(sweep_estimator));
            if (!sweep_csv.empty()) {
                write_artifact(sweep_csv, [&](std::ostream &os) { pcm::write_sweep_csv(os, curve); });
                if (sweep_csv == "-") {
                    return 0;
                }
            }
            reporter.payload(curve);
        } else if (*dist_cmd) {
            reporter.seed(dist_seed);
            const auto base = dist_opts.spec();
            const pcm::Parallelism parallelism{dist_workers};
            std::vector<pcm::PCDistribution> runs;
            for (std::size_t f = 0; f < dist_paths.size(); ++f) {
                const auto in = read_input(dist_paths[f]);
                const auto data = pcm::parse_units_csv(reporter.record(in), dist_paths[f]);
                const auto seed =
                    dist_paths.size() == 1 ? dist_seed : pcm::derive_seed(dist_seed, f);
                if (dist_method == "bootstrap") {
                    runs.push_back(
                        pcm::bootstrap_distribution(data, base, dist_iterations, seed, parallelism));
                } else if (dist_method == "resample") {
                    if (dist_arm_size == 0) {
                        throw pcm::ValidationError{"--arm-size is required for resample"};
                    }
                    std::optional<pcm::StrataRatios> strata;
                    if (!dist_strata.empty()) {
                        strata = parse_strata(dist_strata, data);
                    }
                    runs.push_back(pcm::resampling_distribution(
                        data, dist_arm_size, base, dist_iterations, strata, seed, parallelism));
                } else if (dist_method == "ensemble") {
                    std::vector<pcm::MatchSpec> specs;
                    const auto ms = ensemble_m.empty() ? std::vector<int>{base.m} : ensemble_m;
                    const auto metrics = ensemble_metrics.empty()
                                             ? std::vector<std::string>{dist_opts.metric}
                                             : ensemble_metrics;
                    for (const auto &metric : metrics) {
                        for (int m : ms) {
                            auto spec = base;
                            spec.metric = pcm::parse_metric(metric);
                            spec.m = m;
                            specs.push_back(spec);
                        }
                    }
                    runs.push_back(pcm::ensemble_distribution(data, specs, seed));
                } else {
                    throw pcm::ValidationError{"unknown --method '" + dist_method + "'"};
                }
            }
            const auto dist = pcm::concatenate(runs);
            if (!dist_csv.empty()) {
                write_artifact(dist_csv,
                               [&](std::ostream &os) { pcm::write_distribution_csv(os, dist); });
                if (dist_csv == "-") {
                    return 0;
                }
            }
            json payload = dist;
            payload["spec"] = base;
            reporter.payload(std::move(payload));
        } else if (*sim_cmd) {
            reporter.seed(sim_seed);
            pcm::Dataset data;
            if (sim_example1) {
                data = pcm::gen_example1(sim_n, sim_ab, sim_cd, sim_seed);
            } else if (!sim_network.empty()) {
                const auto in = read_input(sim_network);
                data = pcm::sample_bayesnet(pcm::load_network_spec(reporter.record(in)), sim_n,
                                            sim_seed);
            } else {
                throw pcm::ValidationError{"simulate needs --example1 or --network"};
            }
            write_artifact(sim_out, [&](std::ostream &os) { pcm::write_units_csv(os, data); });
            if (sim_out == "-") {
                return 0;
            }
            reporter.payload({{"output", sim_out}, {"units", data.units.size()}});
        } else if (*g2i_cmd) {
            const auto units_in = read_input(g2i_units);
            const auto target_in = read_input(g2i_target);
            const auto data = pcm::parse_units_csv(reporter.record(units_in), g2i_units);
            const auto target = parse_target(reporter.record(target_in), data);
            const auto sample = pcm::partition_dataset(data);
            const pcm::IndividualQuery query{target, g2i_threshold, g2i_opts.spec()};
            const auto result = pcm::estimate_individual_pc(sample, query);
            auto profile = json::array();
            for (const auto &[t, kept] : pcm::retention_profile(sample, target, query.spec)) {
                profile.push_back({{"threshold", t}, {"retained_d", kept}});
            }
            reporter.payload({{"estimate", result.estimate},
                              {"original_d", result.original_d},
                              {"retained_d", result.retained_d},
                              {"threshold", g2i_threshold},
                              {"retention_profile", std::move(profile)}});
        }
        reporter.emit(start);
    } catch (const pcm::Error &e) {
        std::cerr << json{{"error", {{"kind", pcm::to_string(e.kind())}, {"message", e.what()}}}}.dump()
                  << '\n';
        return 2;
    } catch (const std::exception &e) {
        std::cerr << json{{"error", {{"kind", "internal"}, {"message", e.what()}}}}.dump() << '\n';
        return 3;
    }
    return 0;
}
