#pragma once

// Joint scaling of a seed shape to a larger compute budget.
//
// Growing compute by tau = target / t0 is treated as D successive increments
// tau^w_k with sum_k w_k = 1. Dimension k receives the share tau^w_k and
// responds along its own power law, so
//
//   x_k = x0_k * tau^(w_k * s_k).
//
// Real-valued shapes are rounded once, at the end, and the residual compute
// goes into training duration.

#include <array>
#include <cmath>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "shapescale/cost_model.hpp"
#include "shapescale/errors.hpp"
#include "shapescale/shape.hpp"

namespace shapescale {

using Exponents = std::array<double, kNumDims>;
using Weights = std::array<double, kNumDims>;

/// Exponents (width, depth, mlp_dim) estimated for image classification.
inline constexpr Exponents kClassificationExponents{0.22, 0.45, 0.60};
/// Exponents (width, depth, mlp_dim) estimated for multitask decoding.
inline constexpr Exponents kMultitaskExponents{0.25, 0.49, 0.62};
inline constexpr Weights kEqualWeights{1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0};

inline std::optional<Exponents> exponent_preset(std::string_view name) {
    if (name == "classification") return kClassificationExponents;
    if (name == "multitask") return kMultitaskExponents;
    return std::nullopt;
}

struct ScalingPlan {
    RealShape x0{};
    double t0 = 0.0;
    Exponents s = kClassificationExponents;
    Weights w = kEqualWeights;
    double target_compute = 0.0;
};

inline void validate(const ScalingPlan& p) {
    using detail::require;
    double wsum = 0.0;
    for (std::size_t k = 0; k < kNumDims; ++k) {
        require(std::isfinite(p.x0[k]) && p.x0[k] > 0.0, "seed shape values must be > 0");
        require(std::isfinite(p.s[k]) && p.s[k] > 0.0, "scaling exponents must be > 0");
        require(std::isfinite(p.w[k]) && p.w[k] > 0.0, "allocation weights must be > 0");
        wsum += p.w[k];
    }
    require(std::fabs(wsum - 1.0) <= 1e-9, "allocation weights must sum to 1");
    require(std::isfinite(p.t0) && p.t0 > 0.0, "t0 must be > 0");
    require(std::isfinite(p.target_compute) && p.target_compute >= p.t0,
            "target_compute must be >= t0 (downscaling is not supported)");
}

/// Real-valued shape at the plan's target compute. Exactly x0 when tau = 1.
inline RealShape scale_shape(const ScalingPlan& p) {
    validate(p);
    if (p.target_compute == p.t0) return p.x0;
    const double log_tau = std::log(p.target_compute / p.t0);
    RealShape out{};
    for (std::size_t k = 0; k < kNumDims; ++k)
        out[k] = p.x0[k] * std::exp(p.w[k] * p.s[k] * log_tau);
    return out;
}

inline std::int64_t round_half_up_to_multiple(double v, std::int64_t multiple) {
    const auto q = static_cast<std::int64_t>(std::floor(v / static_cast<double>(multiple) + 0.5));
    return std::max<std::int64_t>(1, q) * multiple;
}

/// Nearest valid architecture: depth to an integer >= 1, width to a positive
/// multiple of head_count, mlp_dim to a positive multiple of mlp_multiple.
/// Halves round up.
inline Shape round_shape(const RealShape& x, std::int64_t head_count = 16,
                         std::int64_t mlp_multiple = 16) {
    detail::require(head_count >= 1 && mlp_multiple >= 1, "rounding multiples must be >= 1");
    for (double v : x) detail::require(std::isfinite(v) && v > 0.0, "shape values must be > 0");
    return {round_half_up_to_multiple(x[0], head_count), round_half_up_to_multiple(x[1], 1),
            round_half_up_to_multiple(x[2], mlp_multiple)};
}

struct ScaledModel {
    RealShape real_shape{};
    Shape rounded_shape;
    std::int64_t training_examples = 0;
    double target_compute = 0.0;
    double achieved_compute = 0.0;
    std::int64_t param_count = 0;
};

/// Spends `target_compute` on `shape` by choosing the training duration.
inline ScaledModel reconcile_examples(const Shape& shape, double target_compute,
                                      const ModelConfig& settings, double flops_multiplier = 1.0) {
    const ModelConfig cfg = settings.with_shape(shape);
    const double one_pass = training_compute(cfg, 1, flops_multiplier);
    if (!(target_compute >= one_pass))
        throw InfeasibleError("target compute " + std::to_string(target_compute) +
                              " GFLOPs is below one forward pass of " + to_string(shape) + " (" +
                              std::to_string(one_pass) + " GFLOPs)");
    ScaledModel m;
    m.real_shape = to_real(shape);
    m.rounded_shape = shape;
    m.training_examples = examples_for_compute(cfg, target_compute, flops_multiplier);
    m.target_compute = target_compute;
    m.achieved_compute = training_compute(cfg, m.training_examples, flops_multiplier);
    m.param_count = param_count(cfg);
    return m;
}

struct RoundingOptions {
    std::int64_t head_multiple = 16;
    std::int64_t mlp_multiple = 16;
};

/// Full pipeline for one budget: scale, round, reconcile.
inline ScaledModel scale_to_budget(const ScalingPlan& plan, const ModelConfig& settings,
                                   const RoundingOptions& rounding = {},
                                   double flops_multiplier = 1.0) {
    const RealShape real = scale_shape(plan);
    ScaledModel m = reconcile_examples(round_shape(real, rounding.head_multiple, rounding.mlp_multiple),
                                       plan.target_compute, settings, flops_multiplier);
    m.real_shape = real;
    return m;
}

struct FrontierTable {
    std::vector<ScaledModel> rows;
    /// Some dimension shrank between consecutive rows after rounding.
    bool rounding_broke_monotonicity = false;
};

/// One scaled model per compute value; rows are independent.
inline FrontierTable frontier_table(const RealShape& x0, double t0, const Exponents& s,
                                    const Weights& w, const std::vector<double>& compute_grid,
                                    const ModelConfig& settings,
                                    const RoundingOptions& rounding = {},
                                    double flops_multiplier = 1.0) {
    detail::require(!compute_grid.empty(), "frontier compute grid must not be empty");
    FrontierTable table;
    for (std::size_t i = 0; i < compute_grid.size(); ++i) {
        detail::require(i == 0 || compute_grid[i] > compute_grid[i - 1],
                        "frontier compute grid must be strictly ascending");
        const ScalingPlan plan{x0, t0, s, w, compute_grid[i]};
        table.rows.push_back(scale_to_budget(plan, settings, rounding, flops_multiplier));
        if (i > 0) {
            const Shape& prev = table.rows[i - 1].rounded_shape;
            const Shape& cur = table.rows[i].rounded_shape;
            for (Dim d : kAllDims)
                if (cur[d] < prev[d]) table.rounding_broke_monotonicity = true;
        }
    }
    return table;
}

}  // namespace shapescale
