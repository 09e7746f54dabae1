#include "pcmatch/matching.hpp"

#include "pcmatch/error.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <limits>
#include <tuple>

namespace pcm {

namespace {

// Distances closer than this are one equidistance group.
constexpr double tie_tolerance = 1e-12;

struct Candidate {
    double distance;
    Cell source;
    std::size_t index;
    const std::string *id;
};

bool by_distance_then_id(const Candidate &lhs, const Candidate &rhs) {
    return std::tie(lhs.distance, *lhs.id) < std::tie(rhs.distance, *rhs.id);
}

MatchEntry make_entry(const Candidate &c, double credit) {
    return MatchEntry{*c.id, c.source, c.index, similarity(c.distance), credit};
}

// Picks the m nearest candidates; `candidates` must contain every element of
// the pool whose distance is within tolerance of the m-th smallest distance.
std::vector<MatchEntry> select_matches(std::vector<Candidate> &candidates, int m,
                                       TieRule tie_rule) {
    std::vector<MatchEntry> out;
    if (candidates.empty()) {
        return out;
    }
    const auto wanted = std::min<std::size_t>(static_cast<std::size_t>(m), candidates.size());
    const auto nth = candidates.begin() + static_cast<std::ptrdiff_t>(wanted - 1);
    std::nth_element(candidates.begin(), nth, candidates.end(),
                     [](const Candidate &l, const Candidate &r) { return l.distance < r.distance; });
    const double boundary = nth->distance;

    std::vector<Candidate> closer;
    std::vector<Candidate> tied;
    for (const auto &c : candidates) {
        if (c.distance < boundary - tie_tolerance) {
            closer.push_back(c);
        } else if (c.distance <= boundary + tie_tolerance) {
            tied.push_back(c);
        }
    }
    std::sort(closer.begin(), closer.end(), by_distance_then_id);
    std::sort(tied.begin(), tied.end(), by_distance_then_id);

    const double unit_credit = 1.0 / static_cast<double>(wanted);
    const std::size_t slots = wanted - closer.size();
    out.reserve(wanted + tied.size());
    for (const auto &c : closer) {
        out.push_back(make_entry(c, unit_credit));
    }
    if (tie_rule == TieRule::lowest_id || tied.size() == slots) {
        std::sort(tied.begin(), tied.end(), [](const Candidate &l, const Candidate &r) {
            return *l.id < *r.id;
        });
        tied.resize(slots);
        std::sort(tied.begin(), tied.end(), by_distance_then_id);
        for (const auto &c : tied) {
            out.push_back(make_entry(c, unit_credit));
        }
    } else {
        const double shared = static_cast<double>(slots) /
                              (static_cast<double>(tied.size()) * static_cast<double>(wanted));
        for (const auto &c : tied) {
            out.push_back(make_entry(c, shared));
        }
    }
    return out;
}

bool passes_threshold(double d, const MatchSpec &spec) {
    return !spec.threshold_t || similarity(d) >= *spec.threshold_t;
}

std::vector<Candidate> all_candidates(const Unit &z, std::span<const Unit> pool_a,
                                      std::span<const Unit> pool_b, const MatchSpec &spec,
                                      const DatasetStats &stats) {
    std::vector<Candidate> candidates;
    candidates.reserve(pool_a.size() + pool_b.size());
    auto add = [&](std::span<const Unit> pool, Cell source) {
        for (std::size_t i = 0; i < pool.size(); ++i) {
            const double d = distance(z, pool[i], spec.metric, stats);
            if (passes_threshold(d, spec)) {
                candidates.push_back(Candidate{d, source, i, &pool[i].id});
            }
        }
    };
    add(pool_a, Cell::a);
    add(pool_b, Cell::b);
    return candidates;
}

// Single-covariate pool sorted by value. Every metric is monotone in |u - v|
// in one dimension, so the nearest candidates are found by walking outwards.
class SortedLine {
  public:
    SortedLine(std::span<const Unit> pool_a, std::span<const Unit> pool_b) {
        entries_.reserve(pool_a.size() + pool_b.size());
        for (std::size_t i = 0; i < pool_a.size(); ++i) {
            entries_.push_back({&pool_a[i], Cell::a, i});
        }
        for (std::size_t i = 0; i < pool_b.size(); ++i) {
            entries_.push_back({&pool_b[i], Cell::b, i});
        }
        std::sort(entries_.begin(), entries_.end(), [](const Entry &l, const Entry &r) {
            return l.unit->covariates[0] < r.unit->covariates[0];
        });
    }

    std::vector<Candidate> candidates(const Unit &z, const MatchSpec &spec,
                                      const DatasetStats &stats) const {
        std::vector<Candidate> out;
        const double v = z.covariates[0];
        auto right = static_cast<std::ptrdiff_t>(
            std::lower_bound(entries_.begin(), entries_.end(), v,
                             [](const Entry &e, double value) {
                                 return e.unit->covariates[0] < value;
                             }) -
            entries_.begin());
        auto left = right - 1;
        const auto n = static_cast<std::ptrdiff_t>(entries_.size());
        double boundary = std::numeric_limits<double>::infinity();
        while (left >= 0 || right < n) {
            const double gap_left =
                left >= 0 ? std::fabs(v - entries_[static_cast<std::size_t>(left)].unit->covariates[0])
                          : std::numeric_limits<double>::infinity();
            const double gap_right =
                right < n
                    ? std::fabs(v - entries_[static_cast<std::size_t>(right)].unit->covariates[0])
                    : std::numeric_limits<double>::infinity();
            const bool take_left = gap_left <= gap_right;
            const auto &e = entries_[static_cast<std::size_t>(take_left ? left : right)];
            const double d = distance(z, *e.unit, spec.metric, stats);
            if (d > boundary + tie_tolerance || !passes_threshold(d, spec)) {
                break;
            }
            out.push_back(Candidate{d, e.source, e.index, &e.unit->id});
            if (out.size() == static_cast<std::size_t>(spec.m)) {
                boundary = d;
            }
            take_left ? --left : ++right;
        }
        return out;
    }

  private:
    struct Entry {
        const Unit *unit;
        Cell source;
        std::size_t index;
    };
    std::vector<Entry> entries_;
};

void tally(MatchAssignment &assignment, std::size_t pool_a, std::size_t pool_b) {
    std::vector<bool> used_a(pool_a, false);
    std::vector<bool> used_b(pool_b, false);
    for (const auto &list : assignment.matches) {
        if (list.empty()) {
            ++assignment.unmatched;
            continue;
        }
        double into_a = 0.0;
        double into_b = 0.0;
        for (const auto &entry : list) {
            if (entry.source == Cell::a) {
                into_a += entry.credit;
                used_a[entry.index] = true;
            } else {
                into_b += entry.credit;
                used_b[entry.index] = true;
            }
        }
        // credits sum to one up to rounding; a one-sided list counts exactly one
        assignment.weighted_into_a += into_a / (into_a + into_b);
        assignment.weighted_into_b += into_b / (into_a + into_b);
    }
    assignment.distinct_used_a = static_cast<std::size_t>(std::count(used_a.begin(), used_a.end(), true));
    assignment.distinct_used_b = static_cast<std::size_t>(std::count(used_b.begin(), used_b.end(), true));
}

MatchAssignment match_with_replacement(const PartitionedSample &sample, const MatchSpec &spec,
                                       const DatasetStats &stats) {
    MatchAssignment assignment;
    assignment.matches.reserve(sample.set_d.size());
    if (sample.covariate_names.size() == 1) {
        const SortedLine line{sample.set_a, sample.set_b};
        for (const auto &z : sample.set_d) {
            auto candidates = line.candidates(z, spec, stats);
            assignment.matches.push_back(select_matches(candidates, spec.m, spec.tie_rule));
        }
    } else {
        for (const auto &z : sample.set_d) {
            auto candidates = all_candidates(z, sample.set_a, sample.set_b, spec, stats);
            assignment.matches.push_back(select_matches(candidates, spec.m, spec.tie_rule));
        }
    }
    return assignment;
}

// Greedy global assignment: candidate pairs in ascending distance, each pool
// element consumed at most once, each D element takes up to m pool elements.
MatchAssignment match_balanced(const PartitionedSample &sample, const MatchSpec &spec,
                               const DatasetStats &stats) {
    struct Pair {
        double distance;
        std::size_t d_index;
        Candidate candidate;
    };
    std::vector<Pair> pairs;
    pairs.reserve(sample.set_d.size() * (sample.set_a.size() + sample.set_b.size()));
    for (std::size_t k = 0; k < sample.set_d.size(); ++k) {
        for (auto &c : all_candidates(sample.set_d[k], sample.set_a, sample.set_b, spec, stats)) {
            pairs.push_back(Pair{c.distance, k, c});
        }
    }
    std::sort(pairs.begin(), pairs.end(), [](const Pair &l, const Pair &r) {
        return std::tie(l.distance, l.d_index, *l.candidate.id) <
               std::tie(r.distance, r.d_index, *r.candidate.id);
    });

    std::vector<bool> used_a(sample.set_a.size(), false);
    std::vector<bool> used_b(sample.set_b.size(), false);
    std::vector<std::vector<Candidate>> chosen(sample.set_d.size());
    const auto m = static_cast<std::size_t>(spec.m);
    for (const auto &pair : pairs) {
        auto &list = chosen[pair.d_index];
        if (list.size() == m) {
            continue;
        }
        auto &used = pair.candidate.source == Cell::a ? used_a : used_b;
        if (used[pair.candidate.index]) {
            continue;
        }
        used[pair.candidate.index] = true;
        list.push_back(pair.candidate);
    }

    MatchAssignment assignment;
    assignment.matches.reserve(chosen.size());
    for (auto &list : chosen) {
        std::vector<MatchEntry> entries;
        const double credit = list.empty() ? 0.0 : 1.0 / static_cast<double>(list.size());
        for (const auto &c : list) {
            entries.push_back(make_entry(c, credit));
        }
        assignment.matches.push_back(std::move(entries));
    }
    return assignment;
}

} // namespace

void validate(const MatchSpec &spec) {
    if (spec.m < 1) {
        throw ValidationError{"match count m must be at least 1"};
    }
    if (spec.threshold_t && !(*spec.threshold_t >= 0.0 && *spec.threshold_t <= 1.0)) {
        throw ValidationError{"similarity threshold must lie in [0, 1]"};
    }
}

namespace {

DatasetStats stats_over(std::initializer_list<std::span<const Unit>> groups,
                        std::size_t dimension, Metric metric) {
    DatasetStats stats;
    stats.mean.assign(dimension, 0.0);
    stats.sd.assign(dimension, 0.0);
    std::size_t n = 0;
    for (const auto group : groups) {
        n += group.size();
    }
    if (metric == Metric::mahalanobis && dimension > 0 && n < 2) {
        throw ValidationError{"covariate covariance is singular; mahalanobis is unavailable, fall "
                              "back to euclidean_standardized"};
    }
    if (n == 0 || dimension == 0) {
        if (metric == Metric::mahalanobis) {
            stats.inverse_covariance = std::vector<double>{};
        }
        return stats;
    }
    for (const auto group : groups) {
        for (const auto &u : group) {
            for (std::size_t j = 0; j < dimension; ++j) {
                stats.mean[j] += u.covariates[j];
            }
        }
    }
    for (auto &m : stats.mean) {
        m /= static_cast<double>(n);
    }
    const auto dim = static_cast<Eigen::Index>(dimension);
    Eigen::MatrixXd cov = Eigen::MatrixXd::Zero(dim, dim);
    Eigen::VectorXd centered(dim);
    for (const auto group : groups) {
        for (const auto &u : group) {
            for (std::size_t j = 0; j < dimension; ++j) {
                centered[static_cast<Eigen::Index>(j)] = u.covariates[j] - stats.mean[j];
            }
            cov.noalias() += centered * centered.transpose();
        }
    }
    if (n > 1) {
        cov /= static_cast<double>(n - 1);
    }
    for (std::size_t j = 0; j < dimension; ++j) {
        const auto jj = static_cast<Eigen::Index>(j);
        stats.sd[j] = n > 1 ? std::sqrt(cov(jj, jj)) : 0.0;
    }
    if (metric == Metric::mahalanobis) {
        Eigen::FullPivLU<Eigen::MatrixXd> lu(cov);
        if (!lu.isInvertible()) {
            throw ValidationError{"covariate covariance is singular; mahalanobis is unavailable, "
                                  "fall back to euclidean_standardized"};
        }
        const Eigen::MatrixXd inverse = lu.inverse();
        std::vector<double> flat(dimension * dimension);
        for (std::size_t r = 0; r < dimension; ++r) {
            for (std::size_t c = 0; c < dimension; ++c) {
                flat[r * dimension + c] =
                    inverse(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c));
            }
        }
        stats.inverse_covariance = std::move(flat);
    }
    return stats;
}

} // namespace

DatasetStats compute_stats(std::span<const Unit> units, std::size_t dimension, Metric metric) {
    return stats_over({units}, dimension, metric);
}

DatasetStats compute_stats(const PartitionedSample &sample, Metric metric) {
    return stats_over({sample.set_a, sample.set_b, sample.set_c, sample.set_d},
                      sample.covariate_names.size(), metric);
}

double distance(std::span<const double> u, std::span<const double> v, Metric metric,
                const DatasetStats &stats) {
    if (u.size() != v.size()) {
        throw ValidationError{"distance: covariate vectors differ in length"};
    }
    double acc = 0.0;
    switch (metric) {
    case Metric::identity_threshold:
        for (std::size_t j = 0; j < u.size(); ++j) {
            acc = std::max(acc, std::fabs(u[j] - v[j]));
        }
        return acc;
    case Metric::absolute_difference:
        for (std::size_t j = 0; j < u.size(); ++j) {
            acc += std::fabs(u[j] - v[j]);
        }
        return acc;
    case Metric::euclidean:
        for (std::size_t j = 0; j < u.size(); ++j) {
            const double diff = u[j] - v[j];
            acc += diff * diff;
        }
        return std::sqrt(acc);
    case Metric::euclidean_standardized:
        if (stats.sd.size() != u.size()) {
            throw ValidationError{"distance: dataset stats do not match covariate schema"};
        }
        for (std::size_t j = 0; j < u.size(); ++j) {
            if (stats.sd[j] > 0.0) {
                const double diff = std::fabs(u[j] - v[j]) / stats.sd[j];
                acc += diff * diff;
            }
        }
        return std::sqrt(acc);
    case Metric::mahalanobis: {
        if (!stats.inverse_covariance || stats.inverse_covariance->size() != u.size() * u.size()) {
            throw ValidationError{"distance: no invertible covariance available for mahalanobis; "
                                  "fall back to euclidean_standardized"};
        }
        const auto &inv = *stats.inverse_covariance;
        const auto dim = u.size();
        for (std::size_t r = 0; r < dim; ++r) {
            double row = 0.0;
            for (std::size_t c = 0; c < dim; ++c) {
                row += inv[r * dim + c] * (u[c] - v[c]);
            }
            acc += (u[r] - v[r]) * row;
        }
        return std::sqrt(std::max(acc, 0.0));
    }
    }
    return acc;
}

double distance(const Unit &u, const Unit &v, Metric metric, const DatasetStats &stats) {
    return distance(std::span<const double>{u.covariates}, std::span<const double>{v.covariates},
                    metric, stats);
}

double similarity(double d) {
    if (!(d >= 0.0)) {
        throw ValidationError{"similarity: distance must be nonnegative"};
    }
    return 1.0 / (1.0 + d);
}

std::vector<MatchEntry> nearest_matches(const Unit &z, std::span<const Unit> pool_a,
                                        std::span<const Unit> pool_b, const MatchSpec &spec,
                                        const DatasetStats &stats) {
    validate(spec);
    if (pool_a.empty() && pool_b.empty()) {
        throw ValidationError{"nearest_matches: matching pool A ∪ B is empty"};
    }
    auto candidates = all_candidates(z, pool_a, pool_b, spec, stats);
    return select_matches(candidates, spec.m, spec.tie_rule);
}

MatchAssignment match_all(const PartitionedSample &sample, const MatchSpec &spec,
                          const DatasetStats &stats) {
    validate(spec);
    if (sample.set_d.empty()) {
        throw ValidationError{"match_all: set D is empty"};
    }
    if (sample.n0() == 0) {
        throw ValidationError{"match_all: matching pool A ∪ B is empty"};
    }
    MatchAssignment assignment;
    if (spec.mode == AssignmentMode::balanced_assignment) {
        const auto needed = sample.set_d.size() * static_cast<std::size_t>(spec.m);
        if (sample.n0() < needed) {
            throw ValidationError{"match_all: balanced_assignment needs |A|+|B| >= m*|D| (" +
                                  std::to_string(sample.n0()) + " < " + std::to_string(needed) +
                                  "); pool A ∪ B is deficient"};
        }
        assignment = match_balanced(sample, spec, stats);
    } else {
        assignment = match_with_replacement(sample, spec, stats);
    }
    tally(assignment, sample.set_a.size(), sample.set_b.size());
    return assignment;
}

MatchAssignment match_all(const PartitionedSample &sample, const MatchSpec &spec) {
    return match_all(sample, spec, compute_stats(sample, spec.metric));
}

std::string_view to_string(Metric metric) noexcept {
    switch (metric) {
    case Metric::identity_threshold:
        return "identity_threshold";
    case Metric::absolute_difference:
        return "absolute_difference";
    case Metric::euclidean:
        return "euclidean";
    case Metric::euclidean_standardized:
        return "euclidean_standardized";
    case Metric::mahalanobis:
        return "mahalanobis";
    }
    return "?";
}

std::string_view to_string(TieRule rule) noexcept {
    return rule == TieRule::fractional ? "fractional" : "lowest_id";
}

std::string_view to_string(AssignmentMode mode) noexcept {
    return mode == AssignmentMode::with_replacement ? "with_replacement" : "balanced_assignment";
}

Metric parse_metric(std::string_view text) {
    for (auto metric : {Metric::identity_threshold, Metric::absolute_difference, Metric::euclidean,
                        Metric::euclidean_standardized, Metric::mahalanobis}) {
        if (text == to_string(metric)) {
            return metric;
        }
    }
    throw ValidationError{"unknown metric '" + std::string{text} + "'"};
}

TieRule parse_tie_rule(std::string_view text) {
    if (text == "fractional") {
        return TieRule::fractional;
    }
    if (text == "lowest_id") {
        return TieRule::lowest_id;
    }
    throw ValidationError{"unknown tie rule '" + std::string{text} + "'"};
}

AssignmentMode parse_mode(std::string_view text) {
    if (text == "with_replacement") {
        return AssignmentMode::with_replacement;
    }
    if (text == "balanced_assignment") {
        return AssignmentMode::balanced_assignment;
    }
    throw ValidationError{"unknown assignment mode '" + std::string{text} + "'"};
}

} // namespace pcm
