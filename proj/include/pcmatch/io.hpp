#pragma once

#include "pcmatch/core_model.hpp"
#include "pcmatch/distribution.hpp"
#include "pcmatch/estimator.hpp"
#include "pcmatch/matching.hpp"
#include "pcmatch/pn_robustness.hpp"

#include <json.hpp>

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace pcm {

/// Whole contents of `path`; "-" reads standard input.
std::string read_source(const std::string &path);

/// Unit CSV: header "id,x,y,<covariate names...>", one unit per row.
Dataset parse_units_csv(std::string_view text, const std::string &source = "<input>");
Dataset load_units_csv(const std::string &path);
void write_units_csv(std::ostream &out, const Dataset &dataset);

/// Table CSV: header "cell,count", rows xy, xy_not, x_not_y, x_not_y_not and
/// a "regime,<experimental|observational>" line.
ContingencyTable parse_table(std::string_view text, const std::string &source = "<input>");
ContingencyTable load_table(const std::string &path);
void write_table(std::ostream &out, const ContingencyTable &table);

/// True when the first header field is "cell".
bool looks_like_table(std::string_view text);

void write_distribution_csv(std::ostream &out, const PCDistribution &dist);
void write_sweep_csv(std::ostream &out, const SweepCurve &curve);

/// Shortest text that parses back to the same double; "inf"/"-inf" for infinities.
std::string format_number(double value);
/// Fixed four decimals, for human-facing summaries.
std::string format_display(double value);

/// 64-bit FNV-1a of the bytes, as 16 hex digits.
std::string digest(std::string_view bytes);

void to_json(nlohmann::json &j, const MatchSpec &spec);
void from_json(const nlohmann::json &j, MatchSpec &spec);
void to_json(nlohmann::json &j, const ContingencyTable &table);
void from_json(const nlohmann::json &j, ContingencyTable &table);
void to_json(nlohmann::json &j, const PCEstimate &est);
void from_json(const nlohmann::json &j, PCEstimate &est);
void to_json(nlohmann::json &j, const PNResult &result);
void from_json(const nlohmann::json &j, PNResult &result);
void to_json(nlohmann::json &j, const SweepCurve &curve);
void from_json(const nlohmann::json &j, SweepCurve &curve);
void to_json(nlohmann::json &j, const Summary &summary);
void from_json(const nlohmann::json &j, Summary &summary);
/// Summary record only; per-iteration samples go to the CSV.
void to_json(nlohmann::json &j, const PCDistribution &dist);

struct InputDigest {
    std::string path;
    std::string digest;

    friend bool operator==(const InputDigest &, const InputDigest &) = default;
};

struct RunReport {
    std::vector<std::string> command;
    std::vector<InputDigest> inputs;
    std::optional<std::uint64_t> seed;
    nlohmann::json payload;
    double timing_ms = 0.0;

    friend bool operator==(const RunReport &, const RunReport &) = default;
};

nlohmann::json report_to_json(const RunReport &report);
RunReport report_from_json(const nlohmann::json &j);

} // namespace pcm
