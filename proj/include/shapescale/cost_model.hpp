#pragma once

// Parameter and FLOP accounting for plain ViT encoders.
//
// Counting convention:
//   patch embedding      3*p^2*w + w
//   positional embedding L*w                       (optional, default on)
//   per encoder block    4w^2 + 4w                 attention q/k/v/o with bias
//                        2wm + w + m               MLP with bias
//                        4w                        two layer norms
//   pooling head         one extra attention + MLP block (optional, default on)
// Classification heads are not counted.
//
// Forward FLOPs per example = 2 * params * L + 4 * L^2 * w * d, with L the
// token count. All compute is in GFLOPs (1e9 FLOPs).

#include <cmath>
#include <cstdint>
#include <limits>
#include <string>

#include "shapescale/errors.hpp"
#include "shapescale/shape.hpp"

namespace shapescale {

inline constexpr double kFlopsPerGflop = 1e9;

struct ModelConfig {
    Shape shape;
    std::int64_t patch_size = 14;
    std::int64_t image_resolution = 224;
    std::int64_t num_heads = 16;
    bool include_pooling_head = true;
    bool include_pos_embedding = true;

    std::int64_t tokens() const {
        const std::int64_t side = image_resolution / patch_size;
        return side * side;
    }

    ModelConfig with_shape(const Shape& s) const {
        ModelConfig c = *this;
        c.shape = s;
        return c;
    }

    friend bool operator==(const ModelConfig&, const ModelConfig&) = default;
};

inline void validate(const ModelConfig& c) {
    using detail::require;
    require(c.shape.width >= 1, "width must be >= 1");
    require(c.shape.depth >= 1, "depth must be >= 1");
    require(c.shape.mlp_dim >= 1, "mlp_dim must be >= 1");
    require(c.num_heads >= 1, "num_heads must be >= 1");
    require(c.shape.width % c.num_heads == 0,
            "width " + std::to_string(c.shape.width) + " must be divisible by num_heads " +
                std::to_string(c.num_heads));
    require(c.patch_size >= 1, "patch_size must be >= 1");
    require(c.image_resolution >= 1, "image_resolution must be >= 1");
    require(c.image_resolution % c.patch_size == 0,
            "image_resolution " + std::to_string(c.image_resolution) +
                " must be divisible by patch_size " + std::to_string(c.patch_size));
    require(c.tokens() >= 1, "token count must be >= 1");
}

/// Parameter counts per component. Components summed over all blocks.
struct CostBreakdown {
    std::int64_t patch_embedding = 0;
    std::int64_t positional_embedding = 0;
    std::int64_t attention = 0;
    std::int64_t mlp = 0;
    std::int64_t layer_norm = 0;
    std::int64_t pooling_head = 0;
    std::int64_t param_count = 0;
    double forward_gflops = 0.0;

    std::int64_t component_sum() const {
        return patch_embedding + positional_embedding + attention + mlp + layer_norm +
               pooling_head;
    }
};

namespace detail {

inline std::int64_t attention_block_params(std::int64_t w) { return 4 * w * w + 4 * w; }
inline std::int64_t mlp_block_params(std::int64_t w, std::int64_t m) { return 2 * w * m + w + m; }
inline std::int64_t norm_block_params(std::int64_t w) { return 4 * w; }

}  // namespace detail

inline CostBreakdown cost_breakdown(const ModelConfig& c) {
    validate(c);
    const std::int64_t w = c.shape.width;
    const std::int64_t d = c.shape.depth;
    const std::int64_t m = c.shape.mlp_dim;
    const std::int64_t p = c.patch_size;
    const std::int64_t L = c.tokens();

    CostBreakdown b;
    b.patch_embedding = 3 * p * p * w + w;
    b.positional_embedding = c.include_pos_embedding ? L * w : 0;
    b.attention = d * detail::attention_block_params(w);
    b.mlp = d * detail::mlp_block_params(w, m);
    b.layer_norm = d * detail::norm_block_params(w);
    b.pooling_head = c.include_pooling_head
                         ? detail::attention_block_params(w) + detail::mlp_block_params(w, m)
                         : 0;
    b.param_count = b.component_sum();

    const double params = static_cast<double>(b.param_count);
    const double tokens = static_cast<double>(L);
    const double flops = 2.0 * params * tokens +
                         4.0 * tokens * tokens * static_cast<double>(w) * static_cast<double>(d);
    b.forward_gflops = flops / kFlopsPerGflop;
    return b;
}

inline std::int64_t param_count(const ModelConfig& c) { return cost_breakdown(c).param_count; }

/// Per-example forward pass cost in GFLOPs.
inline double forward_flops(const ModelConfig& c) { return cost_breakdown(c).forward_gflops; }

inline void validate_multiplier(double flops_multiplier) {
    detail::require(std::isfinite(flops_multiplier) && flops_multiplier > 0.0,
                    "flops_multiplier must be > 0");
}

namespace detail {

// Single expression shared by training_compute and its inverse so the
// round-trip is exact in floating point.
inline double compute_for(double fwd, std::int64_t examples, double multiplier) {
    return fwd * static_cast<double>(examples) * multiplier;
}

}  // namespace detail

/// Total training compute in GFLOPs.
inline double training_compute(const ModelConfig& c, std::int64_t examples_seen,
                               double flops_multiplier = 1.0) {
    detail::require(examples_seen >= 0, "examples_seen must be >= 0");
    validate_multiplier(flops_multiplier);
    return detail::compute_for(forward_flops(c), examples_seen, flops_multiplier);
}

/// Largest example count whose training compute does not exceed `compute`.
inline std::int64_t examples_for_compute(const ModelConfig& c, double compute,
                                         double flops_multiplier = 1.0) {
    detail::require(std::isfinite(compute) && compute >= 0.0, "compute must be >= 0");
    validate_multiplier(flops_multiplier);
    const double fwd = forward_flops(c);
    const double q = std::floor(compute / (fwd * flops_multiplier));
    detail::require(q < 9.0e18, "compute too large for an example count");
    auto n = static_cast<std::int64_t>(q);
    while (n > 0 && detail::compute_for(fwd, n, flops_multiplier) > compute) --n;
    while (detail::compute_for(fwd, n + 1, flops_multiplier) <= compute) ++n;
    return n;
}

}  // namespace shapescale
