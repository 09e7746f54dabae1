#pragma once

#include "pcmatch/core_model.hpp"

#include <optional>
#include <string_view>
#include <vector>

namespace pcm {

/// Bounds on the probability of necessity from an experimental table
/// (P(y | do(x'))) combined with an observational one (P(y), P(x, y), P(x', y')).
struct PNResult {
    double pn_lower = 0.0;
    double pn_upper = 1.0;
    double raw_lower = 0.0;
    double raw_upper = 1.0;
    ContingencyTable experimental;
    ContingencyTable observational;

    friend bool operator==(const PNResult &, const PNResult &) = default;
};

PNResult pn_bounds(const ContingencyTable &experimental, const ContingencyTable &observational);

/// max{0, 1 - P(y | do(x')) / P(y | do(x))}, from the experimental table alone.
double pc_lower_experimental(const ContingencyTable &experimental);

enum class TableCell { xy, xy_not, x_not_y, x_not_y_not };

/// A cell of one of the two tables, e.g. "x'y@experimental".
struct PerturbedCell {
    TableCell cell = TableCell::x_not_y;
    Regime table = Regime::experimental;

    friend bool operator==(const PerturbedCell &, const PerturbedCell &) = default;
};

enum class SweepEstimator { pn_lower, pc_lower_experimental };

struct SweepPoint {
    long k = 0;
    double value = 0.0;

    friend bool operator==(const SweepPoint &, const SweepPoint &) = default;
};

struct SweepCurve {
    SweepEstimator estimator = SweepEstimator::pn_lower;
    PerturbedCell cell;
    std::vector<SweepPoint> points;

    friend bool operator==(const SweepCurve &, const SweepCurve &) = default;
};

/// Adds k to `cell` and removes k from the other row of the same column, so
/// the arm total stays fixed.
ContingencyTable perturb(const ContingencyTable &table, TableCell cell, long k);

SweepCurve sensitivity_sweep(const ContingencyTable &experimental,
                             const std::optional<ContingencyTable> &observational,
                             PerturbedCell cell, long k_min, long k_max,
                             SweepEstimator estimator);

std::string_view to_string(TableCell cell) noexcept;
std::string_view to_string(SweepEstimator estimator) noexcept;
std::string to_string(const PerturbedCell &cell);
TableCell parse_table_cell(std::string_view text);
PerturbedCell parse_perturbed_cell(std::string_view text);
SweepEstimator parse_sweep_estimator(std::string_view text);

} // namespace pcm
