#include "pcmatch/synth.hpp"

#include "pcmatch/error.hpp"
#include "pcmatch/sampling.hpp"

#include <json.hpp>

#include <algorithm>
#include <fstream>
#include <sstream>

namespace pcm {

namespace {

std::string padded_id(char prefix, std::size_t index, std::size_t count) {
    const auto width = std::to_string(count).size();
    auto digits = std::to_string(index);
    return std::string(1, prefix) + std::string(width - digits.size(), '0') + digits;
}

std::string bit_pattern(std::size_t row, std::size_t width) {
    std::string out(width, '0');
    for (std::size_t k = 0; k < width; ++k) {
        if ((row >> (width - 1 - k)) & 1U) {
            out[k] = '1';
        }
    }
    return out;
}

std::vector<std::size_t> topological_sort(const std::vector<BayesNode> &nodes) {
    std::vector<std::size_t> indegree(nodes.size(), 0);
    std::vector<std::vector<std::size_t>> children(nodes.size());
    for (std::size_t i = 0; i < nodes.size(); ++i) {
        indegree[i] = nodes[i].parents.size();
        for (auto p : nodes[i].parents) {
            children[p].push_back(i);
        }
    }
    std::vector<std::size_t> order;
    std::vector<bool> done(nodes.size(), false);
    while (order.size() < nodes.size()) {
        // lowest declaration index among ready nodes keeps the order stable
        std::size_t next = nodes.size();
        for (std::size_t i = 0; i < nodes.size(); ++i) {
            if (!done[i] && indegree[i] == 0) {
                next = i;
                break;
            }
        }
        if (next == nodes.size()) {
            std::string cycle;
            for (std::size_t i = 0; i < nodes.size(); ++i) {
                if (!done[i]) {
                    cycle += (cycle.empty() ? "" : ", ") + nodes[i].name;
                }
            }
            throw ValidationError{"network graph has a cycle among: " + cycle};
        }
        done[next] = true;
        order.push_back(next);
        for (auto c : children[next]) {
            --indegree[c];
        }
    }
    return order;
}

} // namespace

Dataset gen_example1(std::size_t n_per_arm, double ab_split, double cd_split, std::uint64_t seed) {
    if (n_per_arm == 0) {
        throw ValidationError{"n_per_arm must be positive"};
    }
    if (!(ab_split >= 0.0 && ab_split <= 1.0 && cd_split >= 0.0 && cd_split <= 1.0)) {
        throw ValidationError{"ab_split and cd_split must lie in [0, 1]"};
    }
    const std::vector<double> w0{ab_split, 1.0 - ab_split};
    const std::vector<double> w1{cd_split, 1.0 - cd_split};
    const auto q0 = largest_remainder(n_per_arm, w0);
    const auto q1 = largest_remainder(n_per_arm, w1);
    if (q1[1] == 0) {
        throw ValidationError{"cd_split " + std::to_string(cd_split) + " with n_per_arm " +
                              std::to_string(n_per_arm) + " leaves set D empty"};
    }

    Dataset data;
    data.covariate_names = {"Id"};
    data.units.reserve(2 * n_per_arm);
    Rng rng{derive_seed(seed, 0)};
    const auto total = 2 * n_per_arm;
    const std::size_t sizes[4] = {q0[0], q0[1], q1[0], q1[1]};
    const int xs[4] = {0, 0, 1, 1};
    const int ys[4] = {0, 1, 0, 1};
    for (int cell = 0; cell < 4; ++cell) {
        for (std::size_t k = 0; k < sizes[cell]; ++k) {
            data.units.push_back(
                Unit{padded_id('u', data.units.size(), total), {uniform01(rng)}, xs[cell], ys[cell]});
        }
    }
    return data;
}

std::size_t BinaryBayesNet::index_of(std::string_view name) const {
    for (std::size_t i = 0; i < nodes.size(); ++i) {
        if (nodes[i].name == name) {
            return i;
        }
    }
    throw ValidationError{"unknown network node '" + std::string{name} + "'"};
}

BinaryBayesNet load_network_spec(std::string_view document) {
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(document);
    } catch (const nlohmann::json::parse_error &e) {
        throw ValidationError{std::string{"network document is not valid JSON: "} + e.what()};
    }
    for (const char *field : {"nodes", "cpt", "cause", "effect"}) {
        if (!doc.contains(field)) {
            throw ValidationError{std::string{"network document lacks field '"} + field + "'"};
        }
    }
    BinaryBayesNet net;
    try {
        for (const auto &name : doc.at("nodes")) {
            auto n = name.get<std::string>();
            if (std::any_of(net.nodes.begin(), net.nodes.end(),
                            [&](const BayesNode &b) { return b.name == n; })) {
                throw ValidationError{"duplicate network node '" + n + "'"};
            }
            net.nodes.push_back(BayesNode{std::move(n), {}, {}});
        }
        if (doc.contains("edges")) {
            for (const auto &edge : doc.at("edges")) {
                if (!edge.is_array() || edge.size() != 2) {
                    throw ValidationError{"each edge must be a [parent, child] pair"};
                }
                const auto parent = edge[0].get<std::string>();
                const auto child = edge[1].get<std::string>();
                std::size_t p = 0;
                std::size_t c = 0;
                try {
                    p = net.index_of(parent);
                    c = net.index_of(child);
                } catch (const ValidationError &) {
                    throw ValidationError{"edge " + parent + " -> " + child +
                                          " references an unknown node"};
                }
                if (p == c) {
                    throw ValidationError{"network graph has a cycle: self-loop on " + parent};
                }
                auto &parents = net.nodes[c].parents;
                if (std::find(parents.begin(), parents.end(), p) != parents.end()) {
                    throw ValidationError{"duplicate edge " + parent + " -> " + child};
                }
                parents.push_back(p);
            }
        }
        for (auto &node : net.nodes) {
            std::sort(node.parents.begin(), node.parents.end());
        }
        net.topological_order = topological_sort(net.nodes);

        const auto &cpt = doc.at("cpt");
        for (auto &node : net.nodes) {
            if (!cpt.contains(node.name)) {
                throw ValidationError{"missing CPT for node '" + node.name + "'"};
            }
            const auto &rows = cpt.at(node.name);
            const auto width = node.parents.size();
            const std::size_t row_count = std::size_t{1} << width;
            if (rows.size() != row_count) {
                for (std::size_t r = 0; r < row_count; ++r) {
                    if (!rows.contains(bit_pattern(r, width))) {
                        throw ValidationError{"missing CPT row for node '" + node.name +
                                              "' parent pattern '" + bit_pattern(r, width) + "'"};
                    }
                }
                throw ValidationError{"CPT for node '" + node.name + "' has rows with bad parent "
                                      "patterns (expected " + std::to_string(width) + " bits)"};
            }
            node.cpt.resize(row_count);
            for (std::size_t r = 0; r < row_count; ++r) {
                const auto key = bit_pattern(r, width);
                if (!rows.contains(key)) {
                    throw ValidationError{"missing CPT row for node '" + node.name +
                                          "' parent pattern '" + key + "'"};
                }
                const auto &value = rows.at(key);
                if (!value.is_number()) {
                    throw ValidationError{"CPT row '" + key + "' of node '" + node.name +
                                          "' is not a number"};
                }
                const double p = value.get<double>();
                if (!(p >= 0.0 && p <= 1.0)) {
                    throw ValidationError{"CPT row '" + key + "' of node '" + node.name +
                                          "' lies outside [0, 1]"};
                }
                node.cpt[r] = p;
            }
        }

        net.cause = net.index_of(doc.at("cause").get<std::string>());
        net.effect = net.index_of(doc.at("effect").get<std::string>());
        if (net.cause == net.effect) {
            throw ValidationError{"cause and effect must be different nodes"};
        }
        if (doc.contains("covariates")) {
            for (const auto &name : doc.at("covariates")) {
                const auto idx = net.index_of(name.get<std::string>());
                if (idx == net.cause || idx == net.effect) {
                    throw ValidationError{"cause and effect cannot be covariates"};
                }
                net.covariates.push_back(idx);
            }
        } else {
            for (std::size_t i = 0; i < net.nodes.size(); ++i) {
                if (i != net.cause && i != net.effect) {
                    net.covariates.push_back(i);
                }
            }
        }
    } catch (const nlohmann::json::exception &e) {
        throw ValidationError{std::string{"malformed network document: "} + e.what()};
    }
    return net;
}

BinaryBayesNet load_network_file(const std::string &path) {
    std::ifstream in{path};
    if (!in) {
        throw IoError{"cannot open network file '" + path + "'"};
    }
    std::ostringstream buffer;
    buffer << in.rdbuf();
    return load_network_spec(buffer.str());
}

Dataset sample_bayesnet(const BinaryBayesNet &net, std::size_t n, std::uint64_t seed) {
    if (n == 0) {
        throw ValidationError{"sample size must be positive"};
    }
    Dataset data;
    for (auto idx : net.covariates) {
        data.covariate_names.push_back(net.nodes[idx].name);
    }
    data.units.reserve(n);
    Rng rng{derive_seed(seed, 0)};
    std::vector<int> values(net.nodes.size(), 0);
    for (std::size_t i = 0; i < n; ++i) {
        for (auto idx : net.topological_order) {
            const auto &node = net.nodes[idx];
            std::size_t row = 0;
            for (auto p : node.parents) {
                row = (row << 1U) | static_cast<std::size_t>(values[p]);
            }
            values[idx] = uniform01(rng) < node.cpt[row] ? 1 : 0;
        }
        Unit unit;
        unit.id = padded_id('s', i, n);
        unit.x = values[net.cause];
        unit.y = values[net.effect];
        unit.covariates.reserve(net.covariates.size());
        for (auto idx : net.covariates) {
            unit.covariates.push_back(static_cast<double>(values[idx]));
        }
        data.units.push_back(std::move(unit));
    }
    return data;
}

} // namespace pcm
