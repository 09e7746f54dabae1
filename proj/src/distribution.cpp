#include "pcmatch/distribution.hpp"

#include "pcmatch/error.hpp"
#include "pcmatch/sampling.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <mutex>
#include <thread>

namespace pcm {

namespace {

IterationResult run_one(std::size_t iteration, const PartitionedSample &sample,
                        const MatchSpec &spec) {
    IterationResult result;
    result.iteration = iteration;
    try {
        const auto est = estimate_pc(sample, spec);
        result.pc_raw = est.pc_raw;
        result.pc_clamped = est.pc_clamped;
        result.lower = est.bound_lower;
        result.upper = est.bound_upper;
    } catch (const UndefinedError &e) {
        result.skipped = true;
        result.skip_reason = e.what();
    }
    return result;
}

std::vector<IterationResult> run_iterations(std::size_t iterations, Parallelism parallelism,
                                            const std::function<IterationResult(std::size_t)> &body) {
    std::vector<IterationResult> results(iterations);
    auto workers = parallelism.workers == 0 ? std::thread::hardware_concurrency()
                                            : parallelism.workers;
    workers = std::clamp<std::size_t>(workers, 1, std::max<std::size_t>(iterations, 1));
    if (workers == 1) {
        for (std::size_t i = 0; i < iterations; ++i) {
            results[i] = body(i);
        }
        return results;
    }
    std::atomic<std::size_t> next{0};
    std::exception_ptr failure;
    std::mutex failure_mutex;
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (std::size_t w = 0; w < workers; ++w) {
        pool.emplace_back([&] {
            for (auto i = next.fetch_add(1); i < iterations; i = next.fetch_add(1)) {
                try {
                    results[i] = body(i);
                } catch (...) {
                    const std::lock_guard lock{failure_mutex};
                    if (!failure) {
                        failure = std::current_exception();
                    }
                    next = iterations;
                }
            }
        });
    }
    for (auto &t : pool) {
        t.join();
    }
    if (failure) {
        std::rethrow_exception(failure);
    }
    return results;
}

PCDistribution finish(std::string method, std::uint64_t seed,
                      std::vector<IterationResult> results, bool enforce_majority) {
    PCDistribution dist;
    dist.method = std::move(method);
    dist.master_seed = seed;
    dist.iterations = std::move(results);
    std::vector<double> samples;
    samples.reserve(dist.iterations.size());
    dist.envelope_lower = 1.0;
    dist.envelope_upper = 0.0;
    for (const auto &it : dist.iterations) {
        if (it.skipped) {
            ++dist.skipped;
            continue;
        }
        samples.push_back(it.pc_raw);
        dist.envelope_lower = std::min(dist.envelope_lower, it.lower);
        dist.envelope_upper = std::max(dist.envelope_upper, it.upper);
    }
    if (samples.empty() || (enforce_majority && 2 * dist.skipped > dist.iterations.size())) {
        std::string reason =
            dist.iterations.empty() || !dist.iterations.front().skipped
                ? std::string{}
                : ": " + dist.iterations.front().skip_reason;
        throw UndefinedError{std::to_string(dist.skipped) + " of " +
                             std::to_string(dist.iterations.size()) +
                             " iterations were skipped" + reason};
    }
    dist.summary = summarize(samples);
    return dist;
}

struct Arms {
    std::vector<const Unit *> control; // x = 0
    std::vector<const Unit *> treated; // x = 1
};

Arms split_arms(const Dataset &dataset) {
    // validates schema, binary x/y and id uniqueness
    (void)partition_dataset(dataset);
    Arms arms;
    for (const auto &u : dataset.units) {
        (u.x == 0 ? arms.control : arms.treated).push_back(&u);
    }
    return arms;
}

std::vector<const Unit *> cell_members(const Dataset &dataset, int x, int y) {
    std::vector<const Unit *> out;
    for (const auto &u : dataset.units) {
        if (u.x == x && u.y == y) {
            out.push_back(&u);
        }
    }
    return out;
}

void draw_into(std::vector<const Unit *> &out, const std::vector<const Unit *> &from,
               std::size_t count, Rng &rng) {
    for (auto idx : sample_without_replacement(rng, from.size(), count)) {
        out.push_back(from[idx]);
    }
}

} // namespace

double quantile_sorted(std::span<const double> sorted, double p) {
    if (sorted.empty()) {
        throw ValidationError{"quantile of an empty sample"};
    }
    const double h = static_cast<double>(sorted.size() - 1) * p;
    const auto lo = static_cast<std::size_t>(std::floor(h));
    const auto hi = std::min(lo + 1, sorted.size() - 1);
    return sorted[lo] + (h - static_cast<double>(lo)) * (sorted[hi] - sorted[lo]);
}

Summary summarize(std::span<const double> samples) {
    if (samples.empty()) {
        throw ValidationError{"cannot summarize an empty sample"};
    }
    std::vector<double> sorted(samples.begin(), samples.end());
    std::sort(sorted.begin(), sorted.end());
    const auto n = sorted.size();
    Summary s;
    s.min = sorted.front();
    s.max = sorted.back();
    s.median = n % 2 == 1 ? sorted[n / 2] : 0.5 * (sorted[n / 2 - 1] + sorted[n / 2]);
    s.iqr = quantile_sorted(sorted, 0.75) - quantile_sorted(sorted, 0.25);
    if (n > 1) {
        // shifted by the median so constant samples give exactly zero
        const double shift = s.median;
        double mean = 0.0;
        for (double v : sorted) {
            mean += v - shift;
        }
        mean /= static_cast<double>(n);
        double ss = 0.0;
        for (double v : sorted) {
            ss += (v - shift - mean) * (v - shift - mean);
        }
        s.sd = std::sqrt(ss / static_cast<double>(n - 1));
    }
    return s;
}

std::vector<double> PCDistribution::samples() const {
    std::vector<double> out;
    out.reserve(iterations.size());
    for (const auto &it : iterations) {
        if (!it.skipped) {
            out.push_back(it.pc_raw);
        }
    }
    return out;
}

StrataRatios strata_from_data(const Dataset &dataset) {
    const auto sample = partition_dataset(dataset);
    if (sample.n0() == 0 || sample.n1() == 0) {
        throw ValidationError{"strata ratios need both arms to be nonempty"};
    }
    return StrataRatios{
        static_cast<double>(sample.set_b.size()) / static_cast<double>(sample.n0()),
        static_cast<double>(sample.set_d.size()) / static_cast<double>(sample.n1())};
}

PCDistribution bootstrap_distribution(const Dataset &dataset, const MatchSpec &spec,
                                      std::size_t iterations, std::uint64_t seed,
                                      Parallelism parallelism) {
    validate(spec);
    if (iterations == 0) {
        throw ValidationError{"iterations must be positive"};
    }
    const auto arms = split_arms(dataset);
    if (cell_members(dataset, 1, 1).empty()) {
        throw ValidationError{"bootstrap needs at least one unit in set D"};
    }
    if (arms.control.empty()) {
        throw ValidationError{"bootstrap needs a nonempty x = 0 arm"};
    }
    auto results = run_iterations(iterations, parallelism, [&](std::size_t i) {
        Rng rng{derive_seed(seed, i)};
        std::vector<const Unit *> drawn;
        drawn.reserve(dataset.units.size());
        for (const auto *arm : {&arms.control, &arms.treated}) {
            for (std::size_t k = 0; k < arm->size(); ++k) {
                drawn.push_back((*arm)[uniform_index(rng, arm->size())]);
            }
        }
        return run_one(i, partition_unchecked(dataset.covariate_names, drawn), spec);
    });
    return finish("bootstrap", seed, std::move(results), true);
}

PCDistribution resampling_distribution(const Dataset &dataset, std::size_t arm_size,
                                       const MatchSpec &spec, std::size_t iterations,
                                       const std::optional<StrataRatios> &strata,
                                       std::uint64_t seed, Parallelism parallelism) {
    validate(spec);
    if (iterations == 0 || arm_size == 0) {
        throw ValidationError{"iterations and arm_size must be positive"};
    }
    const auto arms = split_arms(dataset);

    std::function<IterationResult(std::size_t)> body;
    if (!strata) {
        for (const auto &[arm, name] : {std::pair{&arms.control, "x = 0"},
                                        std::pair{&arms.treated, "x = 1"}}) {
            if (arm->size() < arm_size) {
                throw ValidationError{"arm " + std::string{name} + " has " +
                                      std::to_string(arm->size()) + " units, fewer than arm_size " +
                                      std::to_string(arm_size)};
            }
        }
        body = [&](std::size_t i) {
            Rng rng{derive_seed(seed, i)};
            std::vector<const Unit *> drawn;
            drawn.reserve(2 * arm_size);
            draw_into(drawn, arms.control, arm_size, rng);
            draw_into(drawn, arms.treated, arm_size, rng);
            return run_one(i, partition_unchecked(dataset.covariate_names, drawn), spec);
        };
        return finish("resample", seed, run_iterations(iterations, parallelism, body), true);
    }

    const double p0 = strata->p_effect_given_cause0;
    const double p1 = strata->p_effect_given_cause1;
    if (!(p0 >= 0.0 && p0 <= 1.0 && p1 >= 0.0 && p1 <= 1.0)) {
        throw ValidationError{"strata ratios must lie in [0, 1]"};
    }
    const std::vector<double> w0{1.0 - p0, p0};
    const std::vector<double> w1{1.0 - p1, p1};
    const auto q0 = largest_remainder(arm_size, w0);
    const auto q1 = largest_remainder(arm_size, w1);
    struct Stratum {
        Cell cell;
        std::vector<const Unit *> members;
        std::size_t quota;
    };
    const std::vector<Stratum> strata_cells{{Cell::a, cell_members(dataset, 0, 0), q0[0]},
                                            {Cell::b, cell_members(dataset, 0, 1), q0[1]},
                                            {Cell::c, cell_members(dataset, 1, 0), q1[0]},
                                            {Cell::d, cell_members(dataset, 1, 1), q1[1]}};
    for (const auto &s : strata_cells) {
        if (s.members.size() < s.quota) {
            throw ValidationError{"set " + std::string{to_string(s.cell)} + " has " +
                                  std::to_string(s.members.size()) + " units but quota " +
                                  std::to_string(s.quota) + " is required"};
        }
    }
    body = [&](std::size_t i) {
        Rng rng{derive_seed(seed, i)};
        std::vector<const Unit *> drawn;
        drawn.reserve(2 * arm_size);
        for (const auto &s : strata_cells) {
            draw_into(drawn, s.members, s.quota, rng);
        }
        return run_one(i, partition_unchecked(dataset.covariate_names, drawn), spec);
    };
    return finish("resample_stratified", seed, run_iterations(iterations, parallelism, body),
                  true);
}

PCDistribution ensemble_distribution(const Dataset &dataset, std::span<const MatchSpec> specs,
                                     std::uint64_t seed) {
    if (specs.size() < 2) {
        throw ValidationError{"an ensemble needs at least two match specs"};
    }
    for (const auto &spec : specs) {
        validate(spec);
    }
    const auto sample = partition_dataset(dataset);
    std::vector<IterationResult> results;
    results.reserve(specs.size());
    for (std::size_t i = 0; i < specs.size(); ++i) {
        IterationResult r;
        try {
            r = run_one(i, sample, specs[i]);
        } catch (const ValidationError &e) {
            r.iteration = i;
            r.skipped = true;
            r.skip_reason = e.what();
        }
        results.push_back(std::move(r));
    }
    return finish("ensemble", seed, std::move(results), false);
}

PCDistribution replicate_distribution(
    const std::function<PartitionedSample(std::uint64_t)> &make_sample, const MatchSpec &spec,
    std::size_t iterations, std::uint64_t seed, Parallelism parallelism) {
    validate(spec);
    if (iterations == 0) {
        throw ValidationError{"iterations must be positive"};
    }
    auto results = run_iterations(iterations, parallelism, [&](std::size_t i) {
        return run_one(i, make_sample(derive_seed(seed, i)), spec);
    });
    return finish("replicate", seed, std::move(results), true);
}

PCDistribution concatenate(std::span<const PCDistribution> runs) {
    if (runs.empty()) {
        throw ValidationError{"nothing to concatenate"};
    }
    if (runs.size() == 1) {
        return runs.front();
    }
    std::vector<IterationResult> all;
    for (const auto &run : runs) {
        for (auto it : run.iterations) {
            it.iteration = all.size();
            all.push_back(std::move(it));
        }
    }
    return finish(runs.front().method, runs.front().master_seed, std::move(all), false);
}

} // namespace pcm
