#include "pcmatch/pn_robustness.hpp"

#include "pcmatch/error.hpp"

#include <algorithm>
#include <string>

namespace pcm {

PNResult pn_bounds(const ContingencyTable &experimental, const ContingencyTable &observational) {
    validate(experimental);
    validate(observational);
    if (observational.n_xy == 0) {
        throw UndefinedError{"PN undefined: no observed (x,y) cases"};
    }
    if (experimental.n_x_not() == 0) {
        throw UndefinedError{"PN undefined: the experimental x' arm is empty"};
    }
    // Each ratio is brought over the common denominator P(x,y) * |x' arm| so
    // that only integer products precede the final division.
    const auto arm = experimental.n_x_not();
    const auto total = observational.total();
    const auto denominator = static_cast<double>(observational.n_xy * arm);
    const auto observed_y = observational.n_xy + observational.n_x_not_y;

    PNResult result;
    result.experimental = experimental;
    result.observational = observational;
    result.raw_lower =
        static_cast<double>(observed_y * arm - experimental.n_x_not_y * total) / denominator;
    result.raw_upper =
        static_cast<double>(experimental.n_x_not_y_not * total - observational.n_x_not_y_not * arm) /
        denominator;
    result.pn_lower = std::clamp(result.raw_lower, 0.0, 1.0);
    result.pn_upper = std::clamp(result.raw_upper, 0.0, 1.0);
    return result;
}

double pc_lower_experimental(const ContingencyTable &t) {
    validate(t);
    if (t.n_xy == 0) {
        throw UndefinedError{"PC lower bound undefined: P(y | do(x)) is zero"};
    }
    if (t.n_x_not() == 0) {
        throw UndefinedError{"PC lower bound undefined: the x' arm is empty"};
    }
    const auto scale = t.n_xy * t.n_x_not();
    const auto numerator = scale - t.n_x_not_y * t.n_x();
    return numerator <= 0 ? 0.0 : static_cast<double>(numerator) / static_cast<double>(scale);
}

ContingencyTable perturb(const ContingencyTable &table, TableCell cell, long k) {
    auto out = table;
    std::int64_t *target = nullptr;
    std::int64_t *partner = nullptr;
    switch (cell) {
    case TableCell::xy:
        target = &out.n_xy;
        partner = &out.n_xy_not;
        break;
    case TableCell::xy_not:
        target = &out.n_xy_not;
        partner = &out.n_xy;
        break;
    case TableCell::x_not_y:
        target = &out.n_x_not_y;
        partner = &out.n_x_not_y_not;
        break;
    case TableCell::x_not_y_not:
        target = &out.n_x_not_y_not;
        partner = &out.n_x_not_y;
        break;
    }
    *target += k;
    *partner -= k;
    if (*target < 0 || *partner < 0) {
        throw ValidationError{"perturbation k = " + std::to_string(k) + " on cell " +
                              std::string{to_string(cell)} + " drives a count negative"};
    }
    return out;
}

SweepCurve sensitivity_sweep(const ContingencyTable &experimental,
                             const std::optional<ContingencyTable> &observational,
                             PerturbedCell cell, long k_min, long k_max,
                             SweepEstimator estimator) {
    if (k_min > k_max) {
        throw ValidationError{"sweep range is empty (k_min > k_max)"};
    }
    if (!observational &&
        (estimator == SweepEstimator::pn_lower || cell.table == Regime::observational)) {
        throw ValidationError{"this sweep needs an observational table"};
    }
    SweepCurve curve;
    curve.estimator = estimator;
    curve.cell = cell;
    curve.points.reserve(static_cast<std::size_t>(k_max - k_min + 1));
    for (long k = k_min; k <= k_max; ++k) {
        auto exp = experimental;
        auto obs = observational;
        if (cell.table == Regime::experimental) {
            exp = perturb(experimental, cell.cell, k);
        } else {
            obs = perturb(*observational, cell.cell, k);
        }
        const double value = estimator == SweepEstimator::pn_lower
                                  ? pn_bounds(exp, *obs).pn_lower
                                  : pc_lower_experimental(exp);
        curve.points.push_back(SweepPoint{k, value});
    }
    return curve;
}

std::string_view to_string(TableCell cell) noexcept {
    switch (cell) {
    case TableCell::xy:
        return "xy";
    case TableCell::xy_not:
        return "xy'";
    case TableCell::x_not_y:
        return "x'y";
    case TableCell::x_not_y_not:
        return "x'y'";
    }
    return "?";
}

std::string_view to_string(SweepEstimator estimator) noexcept {
    return estimator == SweepEstimator::pn_lower ? "pn_lower" : "pc_lower_experimental";
}

std::string to_string(const PerturbedCell &cell) {
    return std::string{to_string(cell.cell)} + "@" + std::string{to_string(cell.table)};
}

TableCell parse_table_cell(std::string_view text) {
    if (text == "xy") {
        return TableCell::xy;
    }
    if (text == "xy'" || text == "xy_not") {
        return TableCell::xy_not;
    }
    if (text == "x'y" || text == "x_not_y") {
        return TableCell::x_not_y;
    }
    if (text == "x'y'" || text == "x_not_y_not") {
        return TableCell::x_not_y_not;
    }
    throw ValidationError{"unknown table cell '" + std::string{text} + "'"};
}

PerturbedCell parse_perturbed_cell(std::string_view text) {
    const auto at = text.find('@');
    if (at == std::string_view::npos) {
        return PerturbedCell{parse_table_cell(text), Regime::experimental};
    }
    return PerturbedCell{parse_table_cell(text.substr(0, at)), parse_regime(text.substr(at + 1))};
}

SweepEstimator parse_sweep_estimator(std::string_view text) {
    if (text == "pn_lower") {
        return SweepEstimator::pn_lower;
    }
    if (text == "pc_lower_experimental") {
        return SweepEstimator::pc_lower_experimental;
    }
    throw ValidationError{"unknown sweep estimator '" + std::string{text} + "'"};
}

} // namespace pcm
