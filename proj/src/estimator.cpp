#include "pcmatch/estimator.hpp"

#include "pcmatch/error.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace pcm {

namespace {

constexpr double bound_tolerance = 1e-12;

// In table terms |D| = n_xy, |C| = n_xy', |B| = n_x'y, |A| = n_x'y'.
void require_bounds_inputs(const ContingencyTable &t) {
    validate(t);
    if (t.n_xy == 0) {
        throw UndefinedError{"PC bounds undefined: set D (x, y) is empty"};
    }
    if (t.n_x_not() == 0) {
        throw UndefinedError{"PC bounds undefined: the x' arm is empty"};
    }
}

} // namespace

PCEstimate estimate_pc(const PartitionedSample &sample, const MatchSpec &spec) {
    validate(spec);
    if (sample.set_d.empty()) {
        throw UndefinedError{"no observed positive-cause positive-effect cases (set D is empty)"};
    }
    return estimate_pc(sample, spec, compute_stats(sample, spec.metric));
}

PCEstimate estimate_pc(const PartitionedSample &sample, const MatchSpec &spec,
                       const DatasetStats &stats) {
    validate(spec);
    if (sample.set_d.empty()) {
        throw UndefinedError{"no observed positive-cause positive-effect cases (set D is empty)"};
    }
    if (sample.n0() == 0) {
        throw ValidationError{"estimate_pc: matching pool A ∪ B is empty"};
    }
    const auto assignment = match_all(sample, spec, stats);
    if (assignment.matched() == 0) {
        throw UndefinedError{"no set D element has a match at or above the similarity threshold"};
    }

    PCEstimate est;
    est.spec = spec;
    est.n_a = sample.set_a.size();
    est.n_b = sample.set_b.size();
    est.n_c = sample.set_c.size();
    est.n_d = sample.set_d.size();
    est.d_matched = assignment.matched();
    est.balanced_arms = sample.balanced();

    est.pc_raw = est.n_a == 0 ? 0.0
                              : std::clamp(assignment.weighted_into_a /
                                               static_cast<double>(est.d_matched),
                                           0.0, 1.0);
    // a|A| = pc|D| and b|B| = (1 - pc)|D|, taken from the match weights so that
    // integer weights (balanced mode, m = 1) give exact ratios
    const double scale = static_cast<double>(est.n_d) / static_cast<double>(est.d_matched);
    est.a = est.n_a == 0 ? 0.0
                         : assignment.weighted_into_a * scale / static_cast<double>(est.n_a);
    est.b = est.n_b == 0 ? 0.0
                         : (est.n_a == 0 ? static_cast<double>(est.n_d)
                                         : assignment.weighted_into_b * scale) /
                               static_cast<double>(est.n_b);
    if (spec.mode == AssignmentMode::balanced_assignment) {
        if (est.n_a > 0) {
            est.a_counted = static_cast<double>(assignment.distinct_used_a) /
                            static_cast<double>(est.n_a);
        }
        if (est.n_b > 0) {
            est.b_counted = static_cast<double>(assignment.distinct_used_b) /
                            static_cast<double>(est.n_b);
        }
    }

    const auto table = contingency_from_partition(sample);
    est.rr = risk_ratio(table);
    const auto bounds = pc_bounds(table);
    est.bound_lower = bounds.lower;
    est.bound_upper = bounds.upper;
    est.pc_clamped = std::clamp(est.pc_raw, bounds.lower, bounds.upper);
    est.out_of_bounds = est.pc_raw < bounds.lower - bound_tolerance ||
                        est.pc_raw > bounds.upper + bound_tolerance;

    if (!est.balanced_arms) {
        est.warnings.push_back("arm sizes differ (|A|+|B| = " + std::to_string(sample.n0()) +
                               ", |C|+|D| = " + std::to_string(sample.n1()) + ")");
    }
    if (est.d_matched < est.n_d) {
        est.warnings.push_back(std::to_string(est.n_d - est.d_matched) +
                               " set D elements had no match above the threshold");
    }
    if (est.out_of_bounds) {
        est.warnings.push_back("pc_raw lies outside the theoretical bounds and was clamped");
    }
    return est;
}

double risk_ratio(const ContingencyTable &t) {
    validate(t);
    if (t.n_xy == 0 && t.n_x_not_y == 0) {
        throw UndefinedError{"risk ratio undefined: no y cases in either arm"};
    }
    if (t.n_x() == 0 || t.n_x_not() == 0) {
        throw UndefinedError{"risk ratio undefined: an arm is empty"};
    }
    if (t.n_x_not_y == 0) {
        return std::numeric_limits<double>::infinity();
    }
    return static_cast<double>(t.n_xy * t.n_x_not()) / static_cast<double>(t.n_x_not_y * t.n_x());
}

double risk_ratio(const PartitionedSample &sample) {
    return risk_ratio(contingency_from_partition(sample));
}

PCBounds pc_bounds(const ContingencyTable &t) {
    require_bounds_inputs(t);
    const auto scale = t.n_xy * t.n_x_not();
    PCBounds bounds;
    if (t.n_x_not_y == 0) {
        bounds.lower = 1.0;
    } else {
        const auto numerator = scale - t.n_x_not_y * t.n_x();
        bounds.lower =
            numerator <= 0 ? 0.0 : static_cast<double>(numerator) / static_cast<double>(scale);
    }
    bounds.upper = std::min(1.0, static_cast<double>(t.n_x_not_y_not * t.n_x()) /
                                     static_cast<double>(scale));
    return bounds;
}

PCBounds pc_bounds(const PartitionedSample &sample) {
    return pc_bounds(contingency_from_partition(sample));
}

double pc_under_monotonicity(const ContingencyTable &t) {
    validate(t);
    if (t.n_x_not_y > t.n_xy) {
        throw InfeasibleError{"monotonicity infeasible: |B| > |D|"};
    }
    if (t.n_xy == 0) {
        throw UndefinedError{"risk ratio undefined: no y cases in either arm"};
    }
    if (t.n_x_not() == 0) {
        throw UndefinedError{"risk ratio undefined: an arm is empty"};
    }
    const auto scale = t.n_xy * t.n_x_not();
    return static_cast<double>(scale - t.n_x_not_y * t.n_x()) / static_cast<double>(scale);
}

double pc_under_reverse_monotonicity(const ContingencyTable &t) {
    validate(t);
    if (t.n_x_not_y > t.n_xy_not) {
        throw InfeasibleError{"reverse-monotonicity infeasible: |B| > |C|"};
    }
    return 1.0;
}

double pc_from_coefficients(double b, double rr) {
    if (!(b >= 0.0 && b <= 1.0)) {
        throw ValidationError{"transition coefficient b must lie in [0, 1]"};
    }
    if (!(rr > 0.0)) {
        throw ValidationError{"risk ratio must be positive"};
    }
    return 1.0 - b / rr;
}

} // namespace pcm
