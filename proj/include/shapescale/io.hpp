#pragma once

// File formats: run-record CSV / JSON-lines, run manifests, and JSON forms of
// the library's value types. Doubles are written in shortest round-trip form
// so parse(emit(x)) reproduces every bit.

#include <charconv>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <iterator>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <string_view>
#include <system_error>
#include <vector>

#include <json.hpp>

#include "shapescale/cost_model.hpp"
#include "shapescale/errors.hpp"
#include "shapescale/fit.hpp"
#include "shapescale/law.hpp"
#include "shapescale/oracle.hpp"
#include "shapescale/records.hpp"
#include "shapescale/scaler.hpp"
#include "shapescale/shape.hpp"
#include "shapescale/sweeps.hpp"

namespace shapescale::io {

using json = nlohmann::ordered_json;

inline constexpr std::string_view kRecordHeader =
    "width,depth,mlp_dim,dimension_under_test,examples_seen,compute_gflops,metric_name,"
    "metric_value,tag";
inline constexpr std::string_view kConfigCommentPrefix = "# model_config: ";

// ---------------------------------------------------------------------------
// Scalars

inline std::string format_double(double v) {
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, res.ptr);
}

inline std::optional<double> parse_double(std::string_view s) {
    if (s.empty()) return std::nullopt;
    if (s.front() == '+') s.remove_prefix(1);
    double v = 0.0;
    const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
    if (res.ec != std::errc() || res.ptr != s.data() + s.size()) return std::nullopt;
    return v;
}

inline std::optional<std::int64_t> parse_int(std::string_view s) {
    if (s.empty()) return std::nullopt;
    std::int64_t v = 0;
    const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
    if (res.ec != std::errc() || res.ptr != s.data() + s.size()) return std::nullopt;
    return v;
}

/// Number with optional scientific notation and magnitude suffix
/// (K=1e3, M=1e6, G=1e9, T=1e12, P=1e15): "9T" -> 9e12, "600M" -> 6e8.
inline double parse_quantity(std::string_view s) {
    double scale = 1.0;
    if (!s.empty()) {
        switch (s.back()) {
            case 'K': case 'k': scale = 1e3; break;
            case 'M': scale = 1e6; break;
            case 'G': case 'g': scale = 1e9; break;
            case 'T': case 't': scale = 1e12; break;
            case 'P': scale = 1e15; break;
            default: break;
        }
        if (scale != 1.0) s.remove_suffix(1);
    }
    const auto v = parse_double(s);
    if (!v || !std::isfinite(*v)) throw ValidationError("not a number: '" + std::string(s) + "'");
    return *v * scale;
}

inline std::vector<std::string> split(std::string_view s, char sep) {
    std::vector<std::string> out;
    std::size_t start = 0;
    while (true) {
        const auto pos = s.find(sep, start);
        out.emplace_back(s.substr(start, pos == std::string_view::npos ? s.npos : pos - start));
        if (pos == std::string_view::npos) break;
        start = pos + 1;
    }
    return out;
}

inline std::vector<double> parse_quantity_list(std::string_view s) {
    std::vector<double> out;
    for (const auto& item : split(s, ',')) out.push_back(parse_quantity(item));
    return out;
}

/// Integer count, accepting the same notation as parse_quantity ("600e6", "40B" is not accepted).
inline std::int64_t parse_count(std::string_view s) {
    const double v = parse_quantity(s);
    if (v < 0.0 || v != std::floor(v) || v > 9.0e18)
        throw ValidationError("not a non-negative integer count: '" + std::string(s) + "'");
    return static_cast<std::int64_t>(v);
}

inline Shape parse_shape(std::string_view s) {
    const auto parts = split(s, ',');
    if (parts.size() != 3) throw ValidationError("shape must be width,depth,mlp_dim: '" + std::string(s) + "'");
    return {parse_count(parts[0]), parse_count(parts[1]), parse_count(parts[2])};
}

// ---------------------------------------------------------------------------
// JSON helpers

namespace detail {

inline void reject_unknown_keys(const json& j, std::initializer_list<std::string_view> known,
                                std::string_view where) {
    if (!j.is_object()) throw ValidationError(std::string(where) + " must be a JSON object");
    for (const auto& [key, _] : j.items()) {
        bool ok = false;
        for (auto k : known) ok = ok || key == k;
        if (!ok) throw ValidationError("unknown key '" + key + "' in " + std::string(where));
    }
}

template <class T>
T get_or(const json& j, const char* key, T fallback) {
    if (!j.contains(key)) return fallback;
    try {
        return j.at(key).get<T>();
    } catch (const nlohmann::json::exception& e) {
        throw ValidationError(std::string("bad value for '") + key + "': " + e.what());
    }
}

template <class T>
T get_required(const json& j, const char* key, std::string_view where) {
    if (!j.contains(key))
        throw ValidationError("missing key '" + std::string(key) + "' in " + std::string(where));
    return get_or<T>(j, key, T{});
}

}  // namespace detail

inline json shape_to_json(const Shape& s) {
    return {{"width", s.width}, {"depth", s.depth}, {"mlp_dim", s.mlp_dim}};
}

inline Shape shape_from_json(const json& j) {
    detail::reject_unknown_keys(j, {"width", "depth", "mlp_dim"}, "shape");
    return {detail::get_required<std::int64_t>(j, "width", "shape"),
            detail::get_required<std::int64_t>(j, "depth", "shape"),
            detail::get_required<std::int64_t>(j, "mlp_dim", "shape")};
}

inline json real_shape_to_json(const RealShape& s) {
    return {{"width", s[0]}, {"depth", s[1]}, {"mlp_dim", s[2]}};
}

/// Structural settings only (no shape): the context needed for cost accounting.
inline json settings_to_json(const ModelConfig& c) {
    return {{"patch_size", c.patch_size},
            {"image_resolution", c.image_resolution},
            {"num_heads", c.num_heads},
            {"include_pooling_head", c.include_pooling_head},
            {"include_pos_embedding", c.include_pos_embedding}};
}

inline json model_config_to_json(const ModelConfig& c) {
    json j = shape_to_json(c.shape);
    const json settings = settings_to_json(c);
    for (const auto& [k, v] : settings.items()) j[k] = v;
    return j;
}

/// Accepts either a full config or settings alone (shape then defaults to 1,1,1
/// and is expected to be replaced by the caller).
inline ModelConfig model_config_from_json(const json& j) {
    detail::reject_unknown_keys(j,
                                {"width", "depth", "mlp_dim", "patch_size", "image_resolution",
                                 "num_heads", "include_pooling_head", "include_pos_embedding"},
                                "model config");
    ModelConfig c;
    c.shape.width = detail::get_or<std::int64_t>(j, "width", c.shape.width);
    c.shape.depth = detail::get_or<std::int64_t>(j, "depth", c.shape.depth);
    c.shape.mlp_dim = detail::get_or<std::int64_t>(j, "mlp_dim", c.shape.mlp_dim);
    c.patch_size = detail::get_or<std::int64_t>(j, "patch_size", c.patch_size);
    c.image_resolution = detail::get_or<std::int64_t>(j, "image_resolution", c.image_resolution);
    c.num_heads = detail::get_or<std::int64_t>(j, "num_heads", c.num_heads);
    c.include_pooling_head = detail::get_or<bool>(j, "include_pooling_head", c.include_pooling_head);
    c.include_pos_embedding =
        detail::get_or<bool>(j, "include_pos_embedding", c.include_pos_embedding);
    return c;
}

inline json law_to_json(const LawParams& p) {
    return {{"alpha", p.alpha}, {"a", p.a},   {"beta", p.beta}, {"b", p.b},
            {"c", p.c},         {"xi", p.xi}, {"eps", p.eps}};
}

inline LawParams law_from_json(const json& j) {
    detail::reject_unknown_keys(j, {"alpha", "a", "beta", "b", "c", "xi", "eps"}, "law params");
    LawParams p{detail::get_required<double>(j, "alpha", "law params"),
                detail::get_required<double>(j, "a", "law params"),
                detail::get_required<double>(j, "beta", "law params"),
                detail::get_required<double>(j, "b", "law params"),
                detail::get_required<double>(j, "c", "law params"),
                detail::get_required<double>(j, "xi", "law params"),
                detail::get_required<double>(j, "eps", "law params")};
    validate(p);
    return p;
}

inline json cost_to_json(const ModelConfig& c, const CostBreakdown& b) {
    return {{"config", model_config_to_json(c)},
            {"param_count", b.param_count},
            {"forward_gflops", b.forward_gflops},
            {"breakdown",
             {{"patch_embedding", b.patch_embedding},
              {"positional_embedding", b.positional_embedding},
              {"attention", b.attention},
              {"mlp", b.mlp},
              {"layer_norm", b.layer_norm},
              {"pooling_head", b.pooling_head}}}};
}

inline std::string_view objective_name(FitObjective o) {
    return o == FitObjective::squared_relative ? "squared_relative" : "absolute_relative";
}

inline json fit_report_to_json(const FitReport& r) {
    json j;
    j["dimension"] = std::string(to_string(r.dimension));
    j["metric_name"] = r.metric_name;
    j["params"] = law_to_json(r.params);
    j["s"] = r.s;
    j["objective"] = std::string(objective_name(r.objective_kind));
    j["objective_value"] = r.objective_value;
    j["residuals"] = r.residuals;
    j["holdout_relative_error"] =
        r.holdout_relative_error ? json(*r.holdout_relative_error) : json(nullptr);
    j["n_restarts_used"] = r.n_restarts_used;
    j["evaluations"] = r.evaluations;
    j["converged"] = r.converged;
    j["degenerate"] = r.degenerate;
    j["seed"] = r.seed;
    return j;
}

inline json ground_truth_to_json(const GroundTruth& gt) {
    return {{"alpha", gt.alpha}, {"a", gt.a}, {"beta", gt.beta}, {"b", gt.b},
            {"c", gt.c},         {"xi", gt.xi}, {"eps_inf", gt.eps_inf}};
}

inline GroundTruth ground_truth_from_json(const json& j) {
    detail::reject_unknown_keys(j, {"alpha", "a", "beta", "b", "c", "xi", "eps_inf"},
                                "ground truth");
    GroundTruth gt;
    try {
        gt.alpha = j.at("alpha").get<std::array<double, kNumDims>>();
        gt.a = j.at("a").get<std::array<double, kNumDims>>();
        gt.beta = j.at("beta").get<std::array<double, kNumDims>>();
        gt.b = j.at("b").get<std::array<double, kNumDims>>();
        gt.c = j.at("c").get<double>();
        gt.xi = j.at("xi").get<double>();
        gt.eps_inf = j.at("eps_inf").get<double>();
    } catch (const nlohmann::json::exception& e) {
        throw ValidationError(std::string("bad ground truth: ") + e.what());
    }
    validate(gt);
    return gt;
}

// ---------------------------------------------------------------------------
// Run manifests

struct RunManifest {
    std::string kind;  // "star" or "grid"
    ModelConfig settings;
    double flops_multiplier = 1.0;
    std::vector<RunEntry> runs;
    json design;  // kind-specific description, informational
};

inline json run_entry_to_json(const RunEntry& r) {
    json j = shape_to_json(r.shape);
    j["dimension_under_test"] =
        r.dimension_under_test ? json(std::string(to_string(*r.dimension_under_test))) : json(nullptr);
    j["examples"] = r.examples();
    j["checkpoints"] = r.checkpoints;
    return j;
}

inline RunEntry run_entry_from_json(const json& j) {
    detail::reject_unknown_keys(
        j, {"width", "depth", "mlp_dim", "dimension_under_test", "examples", "checkpoints"}, "run");
    RunEntry r;
    r.shape = {detail::get_required<std::int64_t>(j, "width", "run"),
               detail::get_required<std::int64_t>(j, "depth", "run"),
               detail::get_required<std::int64_t>(j, "mlp_dim", "run")};
    if (j.contains("dimension_under_test") && !j.at("dimension_under_test").is_null()) {
        const auto name = j.at("dimension_under_test").get<std::string>();
        r.dimension_under_test = parse_dim(name);
        if (!r.dimension_under_test) throw ValidationError("unknown dimension '" + name + "'");
    }
    r.checkpoints = detail::get_required<std::vector<std::int64_t>>(j, "checkpoints", "run");
    shapescale::detail::require_ascending_positive(r.checkpoints, "run checkpoints");
    return r;
}

inline json manifest_to_json(const RunManifest& m) {
    json j;
    j["kind"] = m.kind;
    j["settings"] = settings_to_json(m.settings);
    j["flops_multiplier"] = m.flops_multiplier;
    j["design"] = m.design;
    json runs = json::array();
    for (const auto& r : m.runs) runs.push_back(run_entry_to_json(r));
    j["runs"] = std::move(runs);
    return j;
}

inline RunManifest manifest_from_json(const json& j) {
    detail::reject_unknown_keys(j, {"kind", "settings", "flops_multiplier", "design", "runs", "notes"},
                                "run manifest");
    RunManifest m;
    m.kind = detail::get_required<std::string>(j, "kind", "run manifest");
    if (j.contains("settings")) m.settings = model_config_from_json(j.at("settings"));
    m.flops_multiplier = detail::get_or<double>(j, "flops_multiplier", 1.0);
    if (j.contains("design")) m.design = j.at("design");
    if (!j.contains("runs") || !j.at("runs").is_array())
        throw ValidationError("run manifest needs a 'runs' array");
    for (const auto& r : j.at("runs")) m.runs.push_back(run_entry_from_json(r));
    return m;
}

inline RunManifest star_manifest(const StarSweepSpec& s) {
    RunManifest m{"star", s.settings, 1.0, s.runs(), {}};
    json grids;
    for (Dim d : kAllDims) grids[std::string(to_string(d))] = s.grid(d);
    m.design = {{"center", shape_to_json(s.center)},
                {"step_factor", s.step_factor},
                {"ceiling_ratios", s.ceiling_ratios},
                {"grids", grids},
                {"checkpoints", s.checkpoints}};
    return m;
}

inline RunManifest grid_manifest(const GridSweepSpec& g) {
    RunManifest m{"grid", g.settings, g.flops_multiplier, g.runs(), {}};
    json values;
    for (Dim d : kAllDims) values[std::string(to_string(d))] = g.values[index_of(d)];
    m.design = {{"values", values},
                {"examples_per_run", g.examples_per_run},
                {"checkpoints", g.checkpoints},
                {"compute_checkpoints", g.compute_checkpoints},
                {"total_runs", g.total_runs()},
                {"total_compute_gflops", g.total_compute_gflops}};
    return m;
}

// ---------------------------------------------------------------------------
// Run-record files

enum class RecordFormat { csv, jsonl };

struct RecordFile {
    std::vector<RunRecord> records;
    /// Extra column names in first-seen order.
    std::vector<std::string> extra_columns;
    std::optional<ComputeContext> context;
};

namespace detail {

inline std::string csv_escape(const std::string& s) {
    if (s.find_first_of(",\"\n\r") == std::string::npos) return s;
    std::string out = "\"";
    for (char c : s) {
        if (c == '"') out += '"';
        out += c;
    }
    return out + "\"";
}

inline std::vector<std::string> csv_fields(const std::string& line, std::size_t line_no,
                                           const std::string& source) {
    std::vector<std::string> out;
    std::string cur;
    bool quoted = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
        const char c = line[i];
        if (quoted) {
            if (c == '"') {
                if (i + 1 < line.size() && line[i + 1] == '"') {
                    cur += '"';
                    ++i;
                } else {
                    quoted = false;
                }
            } else {
                cur += c;
            }
        } else if (c == '"') {
            quoted = true;
        } else if (c == ',') {
            out.push_back(std::move(cur));
            cur.clear();
        } else {
            cur += c;
        }
    }
    if (quoted)
        throw ValidationError(source + ":" + std::to_string(line_no) + ": unterminated quote");
    out.push_back(std::move(cur));
    return out;
}

inline std::string context_comment(const ComputeContext& ctx) {
    json j = settings_to_json(ctx.settings);
    j["flops_multiplier"] = ctx.flops_multiplier;
    return std::string(kConfigCommentPrefix) + j.dump();
}

inline ComputeContext context_from_comment_json(const json& j) {
    json settings = j;
    double mult = 1.0;
    if (settings.contains("flops_multiplier")) {
        mult = settings.at("flops_multiplier").get<double>();
        settings.erase("flops_multiplier");
    }
    return {model_config_from_json(settings), mult};
}

[[noreturn]] inline void row_error(const std::string& source, std::size_t line_no,
                                   const std::string& msg) {
    throw ValidationError(source + ":" + std::to_string(line_no) + ": " + msg);
}

inline void check_record(const RunRecord& r, const std::string& source, std::size_t line_no) {
    try {
        validate(r);
    } catch (const ValidationError& e) {
        row_error(source, line_no, e.what());
    }
}

}  // namespace detail

inline std::string emit_records_csv(const RecordFile& file) {
    std::string out;
    if (file.context) out += detail::context_comment(*file.context) + "\n";
    out += kRecordHeader;
    for (const auto& c : file.extra_columns) out += "," + detail::csv_escape(c);
    out += "\n";
    for (const auto& r : file.records) {
        out += std::to_string(r.shape.width) + "," + std::to_string(r.shape.depth) + "," +
               std::to_string(r.shape.mlp_dim) + ",";
        if (r.dimension_under_test) out += to_string(*r.dimension_under_test);
        out += "," + std::to_string(r.examples_seen) + ",";
        if (r.compute_gflops) out += format_double(*r.compute_gflops);
        out += "," + detail::csv_escape(r.metric_name) + "," + format_double(r.metric_value) + "," +
               detail::csv_escape(r.tag);
        for (const auto& col : file.extra_columns) {
            std::string value;
            for (const auto& [k, v] : r.extra)
                if (k == col) value = v;
            out += "," + detail::csv_escape(value);
        }
        out += "\n";
    }
    return out;
}

inline RecordFile parse_records_csv(const std::string& text, const std::string& source = "<input>") {
    RecordFile file;
    std::istringstream in(text);
    std::string line;
    std::size_t line_no = 0;
    std::vector<std::string> header;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        if (line.front() == '#') {
            if (line.rfind(kConfigCommentPrefix, 0) == 0) {
                try {
                    file.context = detail::context_from_comment_json(
                        json::parse(line.substr(kConfigCommentPrefix.size())));
                } catch (const nlohmann::json::exception& e) {
                    detail::row_error(source, line_no, std::string("bad model_config: ") + e.what());
                } catch (const ValidationError& e) {
                    detail::row_error(source, line_no, e.what());
                }
            }
            continue;
        }
        if (header.empty()) {
            header = detail::csv_fields(line, line_no, source);
            const auto expected = split(kRecordHeader, ',');
            if (header.size() < expected.size() ||
                !std::equal(expected.begin(), expected.end(), header.begin()))
                detail::row_error(source, line_no,
                                  "header must start with '" + std::string(kRecordHeader) + "'");
            file.extra_columns.assign(header.begin() + static_cast<std::ptrdiff_t>(expected.size()),
                                      header.end());
            continue;
        }
        const auto f = detail::csv_fields(line, line_no, source);
        if (f.size() != header.size())
            detail::row_error(source, line_no,
                              "expected " + std::to_string(header.size()) + " fields, got " +
                                  std::to_string(f.size()));
        RunRecord r;
        auto int_field = [&](std::size_t i) {
            const auto v = parse_int(f[i]);
            if (!v) detail::row_error(source, line_no, header[i] + " is not an integer: '" + f[i] + "'");
            return *v;
        };
        auto real_field = [&](std::size_t i) {
            const auto v = parse_double(f[i]);
            if (!v) detail::row_error(source, line_no, header[i] + " is not a number: '" + f[i] + "'");
            return *v;
        };
        r.shape = {int_field(0), int_field(1), int_field(2)};
        if (r.shape.width < 1 || r.shape.depth < 1 || r.shape.mlp_dim < 1)
            detail::row_error(source, line_no, "shape dimensions must be >= 1");
        if (!f[3].empty()) {
            r.dimension_under_test = parse_dim(f[3]);
            if (!r.dimension_under_test)
                detail::row_error(source, line_no, "unknown dimension_under_test '" + f[3] + "'");
        }
        r.examples_seen = int_field(4);
        if (!f[5].empty()) r.compute_gflops = real_field(5);
        r.metric_name = f[6];
        r.metric_value = real_field(7);
        r.tag = f[8];
        for (std::size_t i = 9; i < f.size(); ++i) r.extra.emplace_back(header[i], f[i]);
        detail::check_record(r, source, line_no);
        file.records.push_back(std::move(r));
    }
    if (header.empty()) throw ValidationError(source + ": missing CSV header");
    return file;
}

inline json record_to_json(const RunRecord& r) {
    json j;
    j["width"] = r.shape.width;
    j["depth"] = r.shape.depth;
    j["mlp_dim"] = r.shape.mlp_dim;
    j["dimension_under_test"] =
        r.dimension_under_test ? json(std::string(to_string(*r.dimension_under_test))) : json(nullptr);
    j["examples_seen"] = r.examples_seen;
    j["compute_gflops"] = r.compute_gflops ? json(*r.compute_gflops) : json(nullptr);
    j["metric_name"] = r.metric_name;
    j["metric_value"] = r.metric_value;
    j["tag"] = r.tag;
    for (const auto& [k, v] : r.extra) j[k] = v;
    return j;
}

inline std::string emit_records_jsonl(const RecordFile& file) {
    std::string out;
    if (file.context) {
        json j = settings_to_json(file.context->settings);
        j["flops_multiplier"] = file.context->flops_multiplier;
        out += json{{"model_config", j}}.dump() + "\n";
    }
    for (const auto& r : file.records) out += record_to_json(r).dump() + "\n";
    return out;
}

inline RecordFile parse_records_jsonl(const std::string& text, const std::string& source = "<input>") {
    static const std::set<std::string> known{"width",         "depth",          "mlp_dim",
                                             "dimension_under_test", "examples_seen",
                                             "compute_gflops", "metric_name",   "metric_value",
                                             "tag"};
    RecordFile file;
    std::set<std::string> seen_extra;
    std::istringstream in(text);
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        json j;
        try {
            j = json::parse(line);
        } catch (const nlohmann::json::exception& e) {
            detail::row_error(source, line_no, std::string("invalid JSON: ") + e.what());
        }
        if (!j.is_object()) detail::row_error(source, line_no, "each line must be a JSON object");
        if (j.contains("model_config") && j.size() == 1) {
            try {
                file.context = detail::context_from_comment_json(j.at("model_config"));
            } catch (const std::exception& e) {
                detail::row_error(source, line_no, e.what());
            }
            continue;
        }
        RunRecord r;
        try {
            r.shape = {j.at("width").get<std::int64_t>(), j.at("depth").get<std::int64_t>(),
                       j.at("mlp_dim").get<std::int64_t>()};
            if (j.contains("dimension_under_test") && !j.at("dimension_under_test").is_null()) {
                const auto name = j.at("dimension_under_test").get<std::string>();
                r.dimension_under_test = parse_dim(name);
                if (!r.dimension_under_test)
                    detail::row_error(source, line_no, "unknown dimension_under_test '" + name + "'");
            }
            r.examples_seen = j.value("examples_seen", std::int64_t{0});
            if (j.contains("compute_gflops") && !j.at("compute_gflops").is_null())
                r.compute_gflops = j.at("compute_gflops").get<double>();
            r.metric_name = j.at("metric_name").get<std::string>();
            r.metric_value = j.at("metric_value").get<double>();
            r.tag = j.value("tag", std::string{});
        } catch (const nlohmann::json::exception& e) {
            detail::row_error(source, line_no, e.what());
        }
        if (r.shape.width < 1 || r.shape.depth < 1 || r.shape.mlp_dim < 1)
            detail::row_error(source, line_no, "shape dimensions must be >= 1");
        for (const auto& [k, v] : j.items()) {
            if (known.count(k)) continue;
            r.extra.emplace_back(k, v.is_string() ? v.get<std::string>() : v.dump());
            if (seen_extra.insert(k).second) file.extra_columns.push_back(k);
        }
        detail::check_record(r, source, line_no);
        file.records.push_back(std::move(r));
    }
    return file;
}

inline RecordFormat format_for_path(const std::string& path) {
    auto ends_with = [&](std::string_view suf) {
        return path.size() >= suf.size() && path.compare(path.size() - suf.size(), suf.size(), suf) == 0;
    };
    return ends_with(".jsonl") || ends_with(".ndjson") ? RecordFormat::jsonl : RecordFormat::csv;
}

inline std::string emit_records(const RecordFile& file, RecordFormat fmt) {
    return fmt == RecordFormat::csv ? emit_records_csv(file) : emit_records_jsonl(file);
}

inline RecordFile parse_records(const std::string& text, RecordFormat fmt,
                                const std::string& source = "<input>") {
    return fmt == RecordFormat::csv ? parse_records_csv(text, source)
                                    : parse_records_jsonl(text, source);
}

inline std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ValidationError("cannot open '" + path + "'");
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

inline RecordFile read_records(const std::string& path) {
    return parse_records(read_file(path), format_for_path(path), path);
}

inline json read_json(const std::string& path) {
    try {
        return json::parse(read_file(path));
    } catch (const nlohmann::json::exception& e) {
        throw ValidationError(path + ": invalid JSON: " + e.what());
    }
}

// ---------------------------------------------------------------------------
// Reports

inline json seed_selection_to_json(const SeedSelection& s) {
    json j;
    j["x0"] = shape_to_json(s.x0);
    j["t0_gflops"] = s.t0;
    j["winning_bins"] = s.winning_bins;
    j["min_contiguous_bins"] = s.min_contiguous_bins;
    j["conclusive"] = s.conclusive;
    j["reason"] = s.reason;
    j["on_boundary"] = {{"width", s.on_boundary[0]},
                        {"depth", s.on_boundary[1]},
                        {"mlp_dim", s.on_boundary[2]}};
    json bins = json::array();
    for (std::size_t i = 0; i < s.bins.size(); ++i) {
        bins.push_back({{"budget_gflops", s.bins[i]},
                        {"winner", s.winners[i] ? shape_to_json(*s.winners[i]) : json(nullptr)}});
    }
    j["bins"] = std::move(bins);
    json pareto = json::array();
    for (const auto& r : s.pareto_set) pareto.push_back(record_to_json(r));
    j["pareto_set"] = std::move(pareto);
    return j;
}

inline json stability_to_json(const StabilityReport& r) {
    json rows = json::array();
    for (const auto& row : r.rows) {
        json j;
        j["metric"] = row.metric;
        if (row.fit) {
            j["a"] = row.fit->params.a;
            j["b"] = row.fit->params.b;
            j["c"] = row.fit->params.c;
            j["s"] = row.fit->s;
            j["params"] = law_to_json(row.fit->params);
            j["converged"] = row.fit->converged;
        } else {
            j["error"] = row.error;
        }
        rows.push_back(std::move(j));
    }
    return {{"rows", rows}, {"s_spread", r.s_spread}, {"failures", r.failures}};
}

inline constexpr std::string_view kFrontierHeader =
    "compute_gflops,width,depth,mlp_dim,params,examples";

inline std::string frontier_to_csv(const FrontierTable& t) {
    std::string out = std::string(kFrontierHeader) + "\n";
    for (const auto& r : t.rows) {
        out += format_double(r.target_compute) + "," + std::to_string(r.rounded_shape.width) + "," +
               std::to_string(r.rounded_shape.depth) + "," +
               std::to_string(r.rounded_shape.mlp_dim) + "," + std::to_string(r.param_count) + "," +
               std::to_string(r.training_examples) + "\n";
    }
    return out;
}

inline json scaled_model_to_json(const ScaledModel& m) {
    return {{"compute_gflops", m.target_compute},
            {"real_shape", real_shape_to_json(m.real_shape)},
            {"shape", shape_to_json(m.rounded_shape)},
            {"params", m.param_count},
            {"examples", m.training_examples},
            {"achieved_compute_gflops", m.achieved_compute}};
}

inline json frontier_to_json(const FrontierTable& t) {
    json rows = json::array();
    for (const auto& r : t.rows) rows.push_back(scaled_model_to_json(r));
    return {{"rows", rows},
            {"rounding_broke_monotonicity", t.rounding_broke_monotonicity},
            {"scaling_rule", "x_k = x0_k * tau^(w_k * s_k)"}};
}

}  // namespace shapescale::io
