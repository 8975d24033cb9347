#pragma once

// ToolConfig: the JSON file accepted by `shapescale --config`. Every section
// and key is optional; unknown keys are errors. See docs/config.schema.json.

#include <array>
#include <string>

#include "shapescale/cost_model.hpp"
#include "shapescale/errors.hpp"
#include "shapescale/fit.hpp"
#include "shapescale/io.hpp"
#include "shapescale/records.hpp"
#include "shapescale/scaler.hpp"

namespace shapescale {

struct ToolConfig {
    ModelConfig settings;
    double flops_multiplier = 1.0;
    FitOptions fit;
    Exponents exponents = kClassificationExponents;
    std::string exponent_preset = "classification";
    Weights weights = kEqualWeights;
    RoundingOptions rounding;

    ComputeContext compute_context() const { return {settings, flops_multiplier}; }
};

namespace io {

namespace detail {

inline ExponentBox box_from_json(const json& j, const char* name) {
    if (!j.is_array() || j.size() != 2)
        throw ValidationError(std::string("fit.bounds.") + name + " must be [lo, hi]");
    ExponentBox b{j[0].get<double>(), j[1].get<double>()};
    if (!(b.lo > 0.0 && b.hi >= b.lo && std::isfinite(b.hi)))
        throw ValidationError(std::string("fit.bounds.") + name + " must satisfy 0 < lo <= hi");
    return b;
}

inline std::array<double, kNumDims> triple_from_json(const json& j, const char* name) {
    if (!j.is_array() || j.size() != kNumDims)
        throw ValidationError(std::string(name) + " must be a 3-element array (width, depth, mlp_dim)");
    std::array<double, kNumDims> out{};
    for (std::size_t k = 0; k < kNumDims; ++k) out[k] = j[k].get<double>();
    return out;
}

}  // namespace detail

inline ToolConfig tool_config_from_json(const json& j) {
    detail::reject_unknown_keys(j, {"cost", "fit", "scaler"}, "config");
    ToolConfig cfg;
    try {
        if (j.contains("cost")) {
            const json& c = j.at("cost");
            detail::reject_unknown_keys(c,
                                        {"patch_size", "image_resolution", "num_heads",
                                         "flops_multiplier", "include_pooling_head",
                                         "include_pos_embedding"},
                                        "config.cost");
            json settings = c;
            settings.erase("flops_multiplier");
            cfg.settings = model_config_from_json(settings);
            cfg.flops_multiplier = detail::get_or<double>(c, "flops_multiplier", 1.0);
            validate_multiplier(cfg.flops_multiplier);
        }
        if (j.contains("fit")) {
            const json& f = j.at("fit");
            detail::reject_unknown_keys(f,
                                        {"objective", "restarts", "seed", "max_evals", "rel_tol",
                                         "bounds", "eps_floor_ratio"},
                                        "config.fit");
            const auto objective = detail::get_or<std::string>(f, "objective", "squared_relative");
            if (objective == "squared_relative")
                cfg.fit.objective = FitObjective::squared_relative;
            else if (objective == "absolute_relative")
                cfg.fit.objective = FitObjective::absolute_relative;
            else
                throw ValidationError("config.fit.objective must be squared_relative or absolute_relative");
            cfg.fit.restarts = detail::get_or<int>(f, "restarts", cfg.fit.restarts);
            cfg.fit.seed = detail::get_or<std::uint64_t>(f, "seed", cfg.fit.seed);
            cfg.fit.max_evals = detail::get_or<int>(f, "max_evals", cfg.fit.max_evals);
            cfg.fit.rel_tol = detail::get_or<double>(f, "rel_tol", cfg.fit.rel_tol);
            cfg.fit.eps_floor_ratio = detail::get_or<double>(f, "eps_floor_ratio", cfg.fit.eps_floor_ratio);
            if (cfg.fit.restarts < 1) throw ValidationError("config.fit.restarts must be >= 1");
            if (cfg.fit.max_evals < 1) throw ValidationError("config.fit.max_evals must be >= 1");
            if (f.contains("bounds")) {
                const json& b = f.at("bounds");
                detail::reject_unknown_keys(b, {"a", "b", "c"}, "config.fit.bounds");
                if (b.contains("a")) cfg.fit.a_box = detail::box_from_json(b.at("a"), "a");
                if (b.contains("b")) cfg.fit.b_box = detail::box_from_json(b.at("b"), "b");
                if (b.contains("c")) cfg.fit.c_box = detail::box_from_json(b.at("c"), "c");
            }
        }
        if (j.contains("scaler")) {
            const json& s = j.at("scaler");
            detail::reject_unknown_keys(s, {"exponents", "weights", "head_multiple", "mlp_multiple"},
                                        "config.scaler");
            if (s.contains("exponents")) {
                const json& e = s.at("exponents");
                if (e.is_string()) {
                    const auto preset = shapescale::exponent_preset(e.get<std::string>());
                    if (!preset)
                        throw ValidationError("config.scaler.exponents: unknown preset '" +
                                              e.get<std::string>() + "'");
                    cfg.exponents = *preset;
                    cfg.exponent_preset = e.get<std::string>();
                } else {
                    cfg.exponents = detail::triple_from_json(e, "config.scaler.exponents");
                    cfg.exponent_preset = "custom";
                }
            }
            if (s.contains("weights")) cfg.weights = detail::triple_from_json(s.at("weights"), "config.scaler.weights");
            cfg.rounding.head_multiple =
                detail::get_or<std::int64_t>(s, "head_multiple", cfg.rounding.head_multiple);
            cfg.rounding.mlp_multiple =
                detail::get_or<std::int64_t>(s, "mlp_multiple", cfg.rounding.mlp_multiple);
        }
    } catch (const nlohmann::json::exception& e) {
        throw ValidationError(std::string("config: ") + e.what());
    }
    return cfg;
}

inline ToolConfig read_tool_config(const std::string& path) {
    try {
        return tool_config_from_json(read_json(path));
    } catch (const ValidationError& e) {
        throw ValidationError(path + ": " + e.what());
    }
}

}  // namespace io
}  // namespace shapescale
