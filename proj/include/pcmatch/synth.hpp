#pragma once

#include "pcmatch/core_model.hpp"

#include <cstddef>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace pcm {

/// Uniform-Id dataset with controlled cell sizes: n_per_arm units with x = 0,
/// of which round(ab_split * n) have y = 0 (set A), and n_per_arm units with
/// x = 1, of which round(cd_split * n) have y = 0 (set C). Rounding is by
/// largest remainder. The single covariate "Id" is uniform on [0, 1),
/// independent of the cell, so the expected PC under matching is ab_split.
Dataset gen_example1(std::size_t n_per_arm, double ab_split, double cd_split, std::uint64_t seed);

struct BayesNode {
    std::string name;
    std::vector<std::size_t> parents; // in node declaration order
    /// P(node = 1 | parents), indexed by the parent bit pattern with the first
    /// parent as the most significant bit.
    std::vector<double> cpt;
};

struct BinaryBayesNet {
    std::vector<BayesNode> nodes;
    std::vector<std::size_t> topological_order;
    std::size_t cause = 0;
    std::size_t effect = 0;
    std::vector<std::size_t> covariates;

    [[nodiscard]] std::size_t index_of(std::string_view name) const;
};

/// Parses a network document:
///
///   {"nodes": [...], "edges": [["parent", "child"], ...],
///    "cpt": {"node": {"<parent bits>": p, ...}, ...},
///    "cause": "...", "effect": "...", "covariates": [...]}
///
/// Root nodes use the empty pattern "". "covariates" is optional and
/// defaults to every node except cause and effect.
BinaryBayesNet load_network_spec(std::string_view document);
BinaryBayesNet load_network_file(const std::string &path);

/// Ancestral sampling: x = cause node, y = effect node, covariates = the
/// covariate nodes as 0/1 values.
Dataset sample_bayesnet(const BinaryBayesNet &net, std::size_t n, std::uint64_t seed);

} // namespace pcm
