#include "pcmatch/io.hpp"

#include "pcmatch/error.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <limits>
#include <map>
#include <unordered_map>
#include <sstream>

namespace pcm {

namespace {

std::string_view trim(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) {
        s.remove_prefix(1);
    }
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) {
        s.remove_suffix(1);
    }
    return s;
}

std::vector<std::string_view> split_fields(std::string_view line) {
    std::vector<std::string_view> out;
    std::size_t start = 0;
    while (true) {
        const auto comma = line.find(',', start);
        out.push_back(trim(line.substr(start, comma - start)));
        if (comma == std::string_view::npos) {
            return out;
        }
        start = comma + 1;
    }
}

// Non-empty, non-comment lines with their 1-based line numbers.
std::vector<std::pair<std::size_t, std::string_view>> content_lines(std::string_view text) {
    std::vector<std::pair<std::size_t, std::string_view>> out;
    std::size_t number = 0;
    std::size_t start = 0;
    while (start <= text.size()) {
        const auto end = text.find('\n', start);
        auto line = trim(text.substr(start, end - start));
        ++number;
        if (!line.empty() && line.front() != '#') {
            out.emplace_back(number, line);
        }
        if (end == std::string_view::npos) {
            break;
        }
        start = end + 1;
    }
    return out;
}

[[noreturn]] void fail_at(const std::string &source, std::size_t line, const std::string &what) {
    throw ValidationError{source + ":" + std::to_string(line) + ": " + what};
}

std::optional<double> parse_double(std::string_view s) {
    double value = 0.0;
    const auto *end = s.data() + s.size();
    const auto [ptr, ec] = std::from_chars(s.data(), end, value);
    if (ec != std::errc{} || ptr != end) {
        return std::nullopt;
    }
    return value;
}

std::optional<std::int64_t> parse_int(std::string_view s) {
    std::int64_t value = 0;
    const auto *end = s.data() + s.size();
    const auto [ptr, ec] = std::from_chars(s.data(), end, value);
    if (ec != std::errc{} || ptr != end) {
        return std::nullopt;
    }
    return value;
}

nlohmann::json number_json(double v) {
    if (std::isinf(v)) {
        return v > 0 ? "inf" : "-inf";
    }
    return v;
}

double number_from(const nlohmann::json &j) {
    if (j.is_string()) {
        const auto s = j.get<std::string>();
        if (s == "inf") {
            return std::numeric_limits<double>::infinity();
        }
        if (s == "-inf") {
            return -std::numeric_limits<double>::infinity();
        }
        throw ValidationError{"expected a number, got '" + s + "'"};
    }
    return j.get<double>();
}

} // namespace

std::string read_source(const std::string &path) {
    std::ostringstream buffer;
    if (path == "-") {
        buffer << std::cin.rdbuf();
        return buffer.str();
    }
    std::ifstream in{path, std::ios::binary};
    if (!in) {
        throw IoError{"cannot open '" + path + "'"};
    }
    buffer << in.rdbuf();
    return buffer.str();
}

Dataset parse_units_csv(std::string_view text, const std::string &source) {
    const auto lines = content_lines(text);
    if (lines.empty()) {
        throw ValidationError{source + ": empty unit file"};
    }
    const auto header = split_fields(lines.front().second);
    if (header.size() < 3 || header[0] != "id" || header[1] != "x" || header[2] != "y") {
        fail_at(source, lines.front().first, "header must start with id,x,y");
    }
    Dataset data;
    for (std::size_t k = 3; k < header.size(); ++k) {
        if (header[k].empty()) {
            fail_at(source, lines.front().first, "empty covariate name");
        }
        data.covariate_names.emplace_back(header[k]);
    }
    std::unordered_map<std::string, std::size_t> seen;
    data.units.reserve(lines.size() - 1);
    for (std::size_t r = 1; r < lines.size(); ++r) {
        const auto [number, line] = lines[r];
        const auto fields = split_fields(line);
        if (fields.size() != header.size()) {
            fail_at(source, number,
                    "expected " + std::to_string(header.size()) + " fields, found " +
                        std::to_string(fields.size()));
        }
        Unit unit;
        unit.id = std::string{fields[0]};
        if (unit.id.empty()) {
            fail_at(source, number, "empty id");
        }
        const auto x = parse_int(fields[1]);
        const auto y = parse_int(fields[2]);
        if (!x || (*x != 0 && *x != 1)) {
            fail_at(source, number, "x must be 0 or 1, got '" + std::string{fields[1]} + "'");
        }
        if (!y || (*y != 0 && *y != 1)) {
            fail_at(source, number, "y must be 0 or 1, got '" + std::string{fields[2]} + "'");
        }
        unit.x = static_cast<int>(*x);
        unit.y = static_cast<int>(*y);
        unit.covariates.reserve(fields.size() - 3);
        for (std::size_t k = 3; k < fields.size(); ++k) {
            const auto v = parse_double(fields[k]);
            if (!v || !std::isfinite(*v)) {
                fail_at(source, number,
                        "covariate '" + data.covariate_names[k - 3] + "' is missing or not a number");
            }
            unit.covariates.push_back(*v);
        }
        if (const auto [it, inserted] = seen.emplace(unit.id, number); !inserted) {
            fail_at(source, number,
                    "duplicate id '" + unit.id + "' (first seen on line " +
                        std::to_string(it->second) + ")");
        }
        data.units.push_back(std::move(unit));
    }
    return data;
}

Dataset load_units_csv(const std::string &path) {
    return parse_units_csv(read_source(path), path);
}

void write_units_csv(std::ostream &out, const Dataset &dataset) {
    out << "id,x,y";
    for (const auto &name : dataset.covariate_names) {
        out << ',' << name;
    }
    out << '\n';
    for (const auto &u : dataset.units) {
        out << u.id << ',' << u.x << ',' << u.y;
        for (double v : u.covariates) {
            out << ',' << format_number(v);
        }
        out << '\n';
    }
}

bool looks_like_table(std::string_view text) {
    const auto lines = content_lines(text);
    return !lines.empty() && split_fields(lines.front().second).front() == "cell";
}

ContingencyTable parse_table(std::string_view text, const std::string &source) {
    const auto lines = content_lines(text);
    if (lines.empty()) {
        throw ValidationError{source + ": empty table file"};
    }
    const auto header = split_fields(lines.front().second);
    if (header.size() != 2 || header[0] != "cell" || header[1] != "count") {
        fail_at(source, lines.front().first, "header must be cell,count");
    }
    std::map<std::string, std::int64_t> cells;
    std::optional<Regime> regime;
    for (std::size_t r = 1; r < lines.size(); ++r) {
        const auto [number, line] = lines[r];
        const auto fields = split_fields(line);
        if (fields.size() != 2) {
            fail_at(source, number, "expected two fields");
        }
        if (fields[0] == "regime") {
            try {
                regime = parse_regime(fields[1]);
            } catch (const ValidationError &e) {
                fail_at(source, number, e.what());
            }
            continue;
        }
        const std::string name{fields[0]};
        if (name != "xy" && name != "xy_not" && name != "x_not_y" && name != "x_not_y_not") {
            fail_at(source, number, "unknown cell '" + name + "'");
        }
        const auto count = parse_int(fields[1]);
        if (!count) {
            fail_at(source, number, "count for '" + name + "' is not an integer");
        }
        if (*count < 0) {
            fail_at(source, number, "count for '" + name + "' is negative");
        }
        if (!cells.emplace(name, *count).second) {
            fail_at(source, number, "cell '" + name + "' given twice");
        }
    }
    for (const char *name : {"xy", "xy_not", "x_not_y", "x_not_y_not"}) {
        if (!cells.contains(name)) {
            throw ValidationError{source + ": missing cell '" + name + "'"};
        }
    }
    if (!regime) {
        throw ValidationError{source + ": missing regime line"};
    }
    ContingencyTable t;
    t.n_xy = cells["xy"];
    t.n_xy_not = cells["xy_not"];
    t.n_x_not_y = cells["x_not_y"];
    t.n_x_not_y_not = cells["x_not_y_not"];
    t.regime = *regime;
    validate(t);
    return t;
}

ContingencyTable load_table(const std::string &path) {
    return parse_table(read_source(path), path);
}

void write_table(std::ostream &out, const ContingencyTable &t) {
    out << "cell,count\n"
        << "xy," << t.n_xy << '\n'
        << "xy_not," << t.n_xy_not << '\n'
        << "x_not_y," << t.n_x_not_y << '\n'
        << "x_not_y_not," << t.n_x_not_y_not << '\n'
        << "regime," << to_string(t.regime) << '\n';
}

void write_distribution_csv(std::ostream &out, const PCDistribution &dist) {
    out << "iteration,pc_raw,pc_clamped,lower,upper\n";
    for (const auto &it : dist.iterations) {
        if (it.skipped) {
            continue;
        }
        out << it.iteration << ',' << format_number(it.pc_raw) << ','
            << format_number(it.pc_clamped) << ',' << format_number(it.lower) << ','
            << format_number(it.upper) << '\n';
    }
}

void write_sweep_csv(std::ostream &out, const SweepCurve &curve) {
    out << "k,estimator,value\n";
    for (const auto &p : curve.points) {
        out << p.k << ',' << to_string(curve.estimator) << ',' << format_number(p.value) << '\n';
    }
}

std::string format_number(double value) {
    if (std::isinf(value)) {
        return value > 0 ? "inf" : "-inf";
    }
    char buf[64];
    const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, value);
    return std::string(buf, ptr);
}

std::string format_display(double value) {
    if (std::isinf(value)) {
        return value > 0 ? "inf" : "-inf";
    }
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.4f", value);
    return buf;
}

std::string digest(std::string_view bytes) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

void to_json(nlohmann::json &j, const MatchSpec &spec) {
    j = nlohmann::json{{"metric", to_string(spec.metric)},
                       {"m", spec.m},
                       {"threshold_t", nullptr},
                       {"tie_rule", to_string(spec.tie_rule)},
                       {"mode", to_string(spec.mode)}};
    if (spec.threshold_t) {
        j["threshold_t"] = *spec.threshold_t;
    }
}

void from_json(const nlohmann::json &j, MatchSpec &spec) {
    spec.metric = parse_metric(j.at("metric").get<std::string>());
    spec.m = j.at("m").get<int>();
    spec.threshold_t = j.at("threshold_t").is_null()
                           ? std::nullopt
                           : std::optional<double>{j.at("threshold_t").get<double>()};
    spec.tie_rule = parse_tie_rule(j.at("tie_rule").get<std::string>());
    spec.mode = parse_mode(j.at("mode").get<std::string>());
}

void to_json(nlohmann::json &j, const ContingencyTable &t) {
    j = nlohmann::json{{"xy", t.n_xy},
                       {"xy_not", t.n_xy_not},
                       {"x_not_y", t.n_x_not_y},
                       {"x_not_y_not", t.n_x_not_y_not},
                       {"regime", to_string(t.regime)}};
}

void from_json(const nlohmann::json &j, ContingencyTable &t) {
    t.n_xy = j.at("xy").get<std::int64_t>();
    t.n_xy_not = j.at("xy_not").get<std::int64_t>();
    t.n_x_not_y = j.at("x_not_y").get<std::int64_t>();
    t.n_x_not_y_not = j.at("x_not_y_not").get<std::int64_t>();
    t.regime = parse_regime(j.at("regime").get<std::string>());
}

void to_json(nlohmann::json &j, const PCEstimate &e) {
    j = nlohmann::json{{"pc_raw", e.pc_raw},
                       {"pc_clamped", e.pc_clamped},
                       {"a", e.a},
                       {"b", e.b},
                       {"a_counted", nullptr},
                       {"b_counted", nullptr},
                       {"rr", number_json(e.rr)},
                       {"bound_lower", e.bound_lower},
                       {"bound_upper", e.bound_upper},
                       {"out_of_bounds", e.out_of_bounds},
                       {"counts", {{"A", e.n_a}, {"B", e.n_b}, {"C", e.n_c}, {"D", e.n_d}}},
                       {"d_matched", e.d_matched},
                       {"balanced_arms", e.balanced_arms},
                       {"spec", e.spec},
                       {"warnings", e.warnings},
                       {"display", {{"pc_raw", format_display(e.pc_raw)},
                                    {"pc_clamped", format_display(e.pc_clamped)},
                                    {"bounds", "[" + format_display(e.bound_lower) + ", " +
                                                   format_display(e.bound_upper) + "]"}}}};
    if (e.a_counted) {
        j["a_counted"] = *e.a_counted;
    }
    if (e.b_counted) {
        j["b_counted"] = *e.b_counted;
    }
}

void from_json(const nlohmann::json &j, PCEstimate &e) {
    e.pc_raw = j.at("pc_raw").get<double>();
    e.pc_clamped = j.at("pc_clamped").get<double>();
    e.a = j.at("a").get<double>();
    e.b = j.at("b").get<double>();
    e.a_counted = j.at("a_counted").is_null() ? std::nullopt
                                              : std::optional<double>{j.at("a_counted").get<double>()};
    e.b_counted = j.at("b_counted").is_null() ? std::nullopt
                                              : std::optional<double>{j.at("b_counted").get<double>()};
    e.rr = number_from(j.at("rr"));
    e.bound_lower = j.at("bound_lower").get<double>();
    e.bound_upper = j.at("bound_upper").get<double>();
    e.out_of_bounds = j.at("out_of_bounds").get<bool>();
    const auto &counts = j.at("counts");
    e.n_a = counts.at("A").get<std::size_t>();
    e.n_b = counts.at("B").get<std::size_t>();
    e.n_c = counts.at("C").get<std::size_t>();
    e.n_d = counts.at("D").get<std::size_t>();
    e.d_matched = j.at("d_matched").get<std::size_t>();
    e.balanced_arms = j.at("balanced_arms").get<bool>();
    e.spec = j.at("spec").get<MatchSpec>();
    e.warnings = j.at("warnings").get<std::vector<std::string>>();
}

void to_json(nlohmann::json &j, const PNResult &r) {
    j = nlohmann::json{{"pn_lower", r.pn_lower},   {"pn_upper", r.pn_upper},
                       {"raw_lower", r.raw_lower}, {"raw_upper", r.raw_upper},
                       {"experimental", r.experimental}, {"observational", r.observational}};
}

void from_json(const nlohmann::json &j, PNResult &r) {
    r.pn_lower = j.at("pn_lower").get<double>();
    r.pn_upper = j.at("pn_upper").get<double>();
    r.raw_lower = j.at("raw_lower").get<double>();
    r.raw_upper = j.at("raw_upper").get<double>();
    r.experimental = j.at("experimental").get<ContingencyTable>();
    r.observational = j.at("observational").get<ContingencyTable>();
}

void to_json(nlohmann::json &j, const SweepCurve &c) {
    auto points = nlohmann::json::array();
    for (const auto &p : c.points) {
        points.push_back({{"k", p.k}, {"value", p.value}});
    }
    j = nlohmann::json{{"estimator", to_string(c.estimator)},
                       {"cell", to_string(c.cell)},
                       {"points", std::move(points)}};
}

void from_json(const nlohmann::json &j, SweepCurve &c) {
    c.estimator = parse_sweep_estimator(j.at("estimator").get<std::string>());
    c.cell = parse_perturbed_cell(j.at("cell").get<std::string>());
    c.points.clear();
    for (const auto &p : j.at("points")) {
        c.points.push_back(SweepPoint{p.at("k").get<long>(), p.at("value").get<double>()});
    }
}

void to_json(nlohmann::json &j, const Summary &s) {
    j = nlohmann::json{
        {"median", s.median}, {"iqr", s.iqr}, {"sd", s.sd}, {"min", s.min}, {"max", s.max}};
}

void from_json(const nlohmann::json &j, Summary &s) {
    s.median = j.at("median").get<double>();
    s.iqr = j.at("iqr").get<double>();
    s.sd = j.at("sd").get<double>();
    s.min = j.at("min").get<double>();
    s.max = j.at("max").get<double>();
}

void to_json(nlohmann::json &j, const PCDistribution &d) {
    auto skipped = nlohmann::json::array();
    for (const auto &it : d.iterations) {
        if (it.skipped) {
            skipped.push_back({{"iteration", it.iteration}, {"reason", it.skip_reason}});
        }
    }
    j = nlohmann::json{{"method", d.method},
                       {"master_seed", d.master_seed},
                       {"iterations", d.iterations.size()},
                       {"skipped", std::move(skipped)},
                       {"summary", d.summary},
                       {"envelope", {{"lower", d.envelope_lower}, {"upper", d.envelope_upper}}},
                       {"display", {{"median", format_display(d.summary.median)},
                                    {"sd", format_display(d.summary.sd)},
                                    {"iqr", format_display(d.summary.iqr)},
                                    {"range", "[" + format_display(d.summary.min) + ", " +
                                                  format_display(d.summary.max) + "]"}}}};
}

nlohmann::json report_to_json(const RunReport &r) {
    auto inputs = nlohmann::json::array();
    for (const auto &in : r.inputs) {
        inputs.push_back({{"path", in.path}, {"digest", in.digest}});
    }
    nlohmann::json j{{"command", r.command},
                     {"inputs", std::move(inputs)},
                     {"seed", nullptr},
                     {"payload", r.payload},
                     {"timing_ms", r.timing_ms}};
    if (r.seed) {
        j["seed"] = *r.seed;
    }
    return j;
}

RunReport report_from_json(const nlohmann::json &j) {
    RunReport r;
    r.command = j.at("command").get<std::vector<std::string>>();
    for (const auto &in : j.at("inputs")) {
        r.inputs.push_back(
            InputDigest{in.at("path").get<std::string>(), in.at("digest").get<std::string>()});
    }
    if (!j.at("seed").is_null()) {
        r.seed = j.at("seed").get<std::uint64_t>();
    }
    r.payload = j.at("payload");
    r.timing_ms = j.at("timing_ms").get<double>();
    return r;
}

} // namespace pcm
