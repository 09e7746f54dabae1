#include "pcmatch/core_model.hpp"

#include "pcmatch/error.hpp"

#include <unordered_set>

namespace pcm {

namespace {

void check_unit(const Unit &unit, std::size_t schema_size) {
    if ((unit.x != 0 && unit.x != 1) || (unit.y != 0 && unit.y != 1)) {
        throw ValidationError{"unit '" + unit.id + "': x and y must be 0 or 1"};
    }
    if (unit.covariates.size() != schema_size) {
        throw ValidationError{"unit '" + unit.id + "': has " +
                              std::to_string(unit.covariates.size()) + " covariates, schema has " +
                              std::to_string(schema_size)};
    }
}

void place(PartitionedSample &sample, const Unit &unit) {
    if (unit.x == 0) {
        (unit.y == 0 ? sample.set_a : sample.set_b).push_back(unit);
    } else {
        (unit.y == 0 ? sample.set_c : sample.set_d).push_back(unit);
    }
}

} // namespace

void validate(const ContingencyTable &table) {
    if (table.n_xy < 0 || table.n_xy_not < 0 || table.n_x_not_y < 0 || table.n_x_not_y_not < 0) {
        throw ValidationError{"contingency table counts must be nonnegative"};
    }
    if (table.total() == 0) {
        throw ValidationError{"contingency table is empty"};
    }
}

PartitionedSample partition_dataset(const Dataset &dataset) {
    if (dataset.units.empty()) {
        throw ValidationError{"cannot partition an empty dataset"};
    }
    PartitionedSample sample;
    sample.covariate_names = dataset.covariate_names;
    std::unordered_set<std::string> seen;
    seen.reserve(dataset.units.size());
    for (const auto &unit : dataset.units) {
        check_unit(unit, dataset.covariate_names.size());
        if (!seen.insert(unit.id).second) {
            throw ValidationError{"duplicate unit id '" + unit.id + "'"};
        }
        place(sample, unit);
    }
    return sample;
}

PartitionedSample partition_unchecked(const std::vector<std::string> &covariate_names,
                                      const std::vector<const Unit *> &units) {
    PartitionedSample sample;
    sample.covariate_names = covariate_names;
    for (const Unit *unit : units) {
        place(sample, *unit);
    }
    return sample;
}

ContingencyTable contingency_from_partition(const PartitionedSample &sample) {
    ContingencyTable table;
    table.n_xy = static_cast<std::int64_t>(sample.set_d.size());
    table.n_xy_not = static_cast<std::int64_t>(sample.set_c.size());
    table.n_x_not_y = static_cast<std::int64_t>(sample.set_b.size());
    table.n_x_not_y_not = static_cast<std::int64_t>(sample.set_a.size());
    table.regime = Regime::observational;
    return table;
}

ConditionalProbs conditional_probs(const ContingencyTable &table) {
    validate(table);
    if (table.n_x() == 0) {
        throw UndefinedError{"undefined conditional: column x has zero total"};
    }
    if (table.n_x_not() == 0) {
        throw UndefinedError{"undefined conditional: column x' has zero total"};
    }
    const auto total = static_cast<double>(table.total());
    ConditionalProbs probs;
    probs.p_y_given_x = static_cast<double>(table.n_xy) / static_cast<double>(table.n_x());
    probs.p_y_given_x_not =
        static_cast<double>(table.n_x_not_y) / static_cast<double>(table.n_x_not());
    probs.p_xy = static_cast<double>(table.n_xy) / total;
    probs.p_x_not_y = static_cast<double>(table.n_x_not_y) / total;
    probs.p_y = static_cast<double>(table.n_xy + table.n_x_not_y) / total;
    probs.p_x_not_y_not = static_cast<double>(table.n_x_not_y_not) / total;
    return probs;
}

std::string_view to_string(Cell cell) noexcept {
    switch (cell) {
    case Cell::a:
        return "A";
    case Cell::b:
        return "B";
    case Cell::c:
        return "C";
    case Cell::d:
        return "D";
    }
    return "?";
}

std::string_view to_string(Regime regime) noexcept {
    return regime == Regime::experimental ? "experimental" : "observational";
}

Regime parse_regime(std::string_view text) {
    if (text == "experimental") {
        return Regime::experimental;
    }
    if (text == "observational") {
        return Regime::observational;
    }
    throw ValidationError{"unknown regime '" + std::string{text} +
                          "' (expected experimental or observational)"};
}

} // namespace pcm
