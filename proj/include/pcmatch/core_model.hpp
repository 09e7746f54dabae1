#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

namespace pcm {

/// One subject: opaque id, covariate values, binary cause and effect.
struct Unit {
    std::string id;
    std::vector<double> covariates;
    int x = 0;
    int y = 0;
};

/// Units sharing one covariate schema.
struct Dataset {
    std::vector<std::string> covariate_names;
    std::vector<Unit> units;
};

enum class Cell { a, b, c, d };

/// The four outcome cells: A (x=0,y=0), B (x=0,y=1), C (x=1,y=0), D (x=1,y=1).
struct PartitionedSample {
    std::vector<std::string> covariate_names;
    std::vector<Unit> set_a;
    std::vector<Unit> set_b;
    std::vector<Unit> set_c;
    std::vector<Unit> set_d;

    [[nodiscard]] std::size_t n0() const noexcept { return set_a.size() + set_b.size(); }
    [[nodiscard]] std::size_t n1() const noexcept { return set_c.size() + set_d.size(); }
    [[nodiscard]] std::size_t size() const noexcept { return n0() + n1(); }
    /// Equal arm sizes. Reported, never enforced here.
    [[nodiscard]] bool balanced() const noexcept { return n0() == n1(); }
};

enum class Regime { experimental, observational };

/// 2x2 counts. x is the cause, y the effect; the primed cells are the negated events.
struct ContingencyTable {
    std::int64_t n_xy = 0;
    std::int64_t n_xy_not = 0;
    std::int64_t n_x_not_y = 0;
    std::int64_t n_x_not_y_not = 0;
    Regime regime = Regime::experimental;

    [[nodiscard]] std::int64_t n_x() const noexcept { return n_xy + n_xy_not; }
    [[nodiscard]] std::int64_t n_x_not() const noexcept { return n_x_not_y + n_x_not_y_not; }
    [[nodiscard]] std::int64_t total() const noexcept { return n_x() + n_x_not(); }

    friend bool operator==(const ContingencyTable &, const ContingencyTable &) = default;
};

/// Throws ValidationError on negative counts or an empty table.
void validate(const ContingencyTable &table);

struct ConditionalProbs {
    double p_y_given_x = 0.0;
    double p_y_given_x_not = 0.0;
    double p_xy = 0.0;
    double p_x_not_y = 0.0;
    double p_y = 0.0;
    double p_x_not_y_not = 0.0;
};

/// Splits units into A/B/C/D. Rejects duplicate ids, non-binary x/y and
/// covariate vectors that do not match the schema.
PartitionedSample partition_dataset(const Dataset &dataset);

/// Same split without the id-uniqueness check; resamplers draw units with
/// replacement and legitimately repeat ids.
PartitionedSample partition_unchecked(const std::vector<std::string> &covariate_names,
                                      const std::vector<const Unit *> &units);

ContingencyTable contingency_from_partition(const PartitionedSample &sample);

ConditionalProbs conditional_probs(const ContingencyTable &table);

std::string_view to_string(Cell cell) noexcept;
std::string_view to_string(Regime regime) noexcept;
Regime parse_regime(std::string_view text);

} // namespace pcm
