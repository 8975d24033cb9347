#pragma once

// Synthetic ground truth: the decomposable loss
//
//   f(x, t) = sum_k alpha_k x_k^-a_k + (sum_k beta_k x_k^b_k) t^-c + xi t^-c + eps_inf
//
// whose restriction to any one dimension has the single-dimension law form.
// Used to generate sweep records with known answers and to brute-force the
// optimum that the closed forms elsewhere must agree with.

#include <array>
#include <cmath>
#include <cstdint>
#include <limits>
#include <string>
#include <vector>

#include "shapescale/cost_model.hpp"
#include "shapescale/detail/random.hpp"
#include "shapescale/errors.hpp"
#include "shapescale/law.hpp"
#include "shapescale/records.hpp"
#include "shapescale/shape.hpp"
#include "shapescale/sweeps.hpp"

namespace shapescale {

struct GroundTruth {
    std::array<double, kNumDims> alpha{1.0, 1.0, 1.0};
    std::array<double, kNumDims> a{1.0, 1.0, 1.0};
    std::array<double, kNumDims> beta{1.0, 1.0, 1.0};
    std::array<double, kNumDims> b{1.0, 1.0, 1.0};
    double c = 1.0;
    double xi = 1.0;
    double eps_inf = 1.0;

    /// Scaling exponent of dimension k, c / (a_k + b_k).
    double exponent(Dim d) const {
        const auto k = index_of(d);
        return c / (a[k] + b[k]);
    }

    /// Single-dimension law seen when every other dimension is pinned at `pinned`.
    LawParams restricted(Dim d, const Shape& pinned) const {
        const auto k = index_of(d);
        LawParams p{alpha[k], a[k], beta[k], b[k], c, xi, eps_inf};
        for (Dim o : kAllDims) {
            if (o == d) continue;
            const auto j = index_of(o);
            const double x = static_cast<double>(pinned[o]);
            p.xi += beta[j] * std::pow(x, b[j]);
            p.eps += alpha[j] * std::pow(x, -a[j]);
        }
        return p;
    }

    friend bool operator==(const GroundTruth&, const GroundTruth&) = default;
};

inline void validate(const GroundTruth& gt) {
    auto positive = [](double v) { return std::isfinite(v) && v > 0.0; };
    for (std::size_t k = 0; k < kNumDims; ++k) {
        detail::require(positive(gt.alpha[k]) && positive(gt.a[k]) && positive(gt.beta[k]) &&
                            positive(gt.b[k]),
                        "GroundTruth per-dimension coefficients must be > 0");
    }
    detail::require(positive(gt.c), "GroundTruth.c must be > 0");
    detail::require(positive(gt.xi), "GroundTruth.xi must be > 0");
    detail::require(positive(gt.eps_inf), "GroundTruth.eps_inf must be > 0");
}

struct GroundTruthPreset {
    double c = 0.65;
    std::array<double, kNumDims> exponents{0.22, 0.45, 0.60};
    /// Fraction of a_k + b_k assigned to a_k.
    std::array<double, kNumDims> a_share{0.5, 0.5, 0.5};
    /// Shape that is exactly compute-optimal at reference_compute.
    Shape reference_shape{608, 10, 928};
    /// Reference training compute, GFLOPs. 0 means 600M examples at reference_shape
    /// under the default cost model.
    double reference_compute = 0.0;
    /// Size-limited loss alpha_k x_k^-a_k of each dimension at the reference shape.
    std::array<double, kNumDims> size_loss{0.09, 0.09, 0.09};
    /// Data-limited loss xi t^-c at the reference compute.
    double data_loss = 0.006;
    double eps_inf = 0.006;
};

/// Ground truth whose exponents and optimum mirror the published ViT sweeps:
/// c = 0.65, s = (0.22, 0.45, 0.60) and optimum (608, 10, 928) at the
/// grid-sweep compute. Losses over the published sweeps sit in roughly
/// [0.2, 1].
inline GroundTruth make_ground_truth(const GroundTruthPreset& preset = {}) {
    const double t_ref =
        preset.reference_compute > 0.0
            ? preset.reference_compute
            : training_compute(ModelConfig{preset.reference_shape}, 600'000'000);
    GroundTruth gt;
    gt.c = preset.c;
    for (Dim d : kAllDims) {
        const auto k = index_of(d);
        const double total = preset.c / preset.exponents[k];
        gt.a[k] = preset.a_share[k] * total;
        gt.b[k] = total - gt.a[k];
        const double x = static_cast<double>(preset.reference_shape[d]);
        gt.alpha[k] = preset.size_loss[k] * std::pow(x, gt.a[k]);
        // Stationarity of dimension k at (x, t_ref).
        gt.beta[k] = gt.alpha[k] * gt.a[k] * std::pow(t_ref, gt.c) /
                     (gt.b[k] * std::pow(x, gt.a[k] + gt.b[k]));
    }
    gt.xi = preset.data_loss * std::pow(t_ref, gt.c);
    gt.eps_inf = preset.eps_inf;
    return gt;
}

/// Ground truth acting on the width slot only: dimension 0 follows `p`, and
/// the other two slots contribute constants that do not move the argmin.
inline GroundTruth embed_law(const LawParams& p) {
    GroundTruth gt;
    gt.alpha = {p.alpha, 1e-300, 1e-300};
    gt.a = {p.a, 1.0, 1.0};
    gt.beta = {p.beta, 1e-300, 1e-300};
    gt.b = {p.b, 1.0, 1.0};
    gt.c = p.c;
    gt.xi = p.xi;
    gt.eps_inf = p.eps;
    return gt;
}

namespace detail {

inline double eval_truth_real(const GroundTruth& gt, const std::array<double, kNumDims>& x,
                              double t) {
    require_positive_arg(t, "t");
    const double lt = std::log(t);
    double size_sum = 0.0;
    double coupled = 0.0;
    for (std::size_t k = 0; k < kNumDims; ++k) {
        require_positive_arg(x[k], "shape dimension");
        const double lx = std::log(x[k]);
        size_sum += std::exp(std::log(gt.alpha[k]) - gt.a[k] * lx);
        coupled += std::exp(std::log(gt.beta[k]) + gt.b[k] * lx - gt.c * lt);
    }
    return size_sum + coupled + std::exp(std::log(gt.xi) - gt.c * lt) + gt.eps_inf;
}

}  // namespace detail

inline double eval_truth(const GroundTruth& gt, const Shape& shape, double t) {
    return detail::eval_truth_real(gt, to_real(shape), t);
}

enum class NoiseModel { none, lognormal, gaussian };

struct NoiseSpec {
    NoiseModel model = NoiseModel::none;
    /// Log-scale std for lognormal, absolute std for gaussian.
    double sigma = 0.0;
    std::uint64_t seed = 0;
};

/// Noisy observation of `clean` for record `index`. Each record draws from
/// its own sub-stream so results do not depend on generation order.
inline double apply_noise(double clean, const NoiseSpec& noise, std::uint64_t index) {
    if (noise.model == NoiseModel::none || noise.sigma == 0.0) return clean;
    detail::Rng rng(detail::derive_seed(noise.seed, index));
    if (noise.model == NoiseModel::lognormal) return clean * std::exp(noise.sigma * rng.normal());
    // Additive gaussian, redrawn until the observation stays positive.
    for (int attempt = 0; attempt < 64; ++attempt) {
        const double v = clean + noise.sigma * rng.normal();
        if (v > 0.0) return v;
    }
    return clean;
}

inline void validate(const NoiseSpec& n) {
    detail::require(std::isfinite(n.sigma) && n.sigma >= 0.0, "noise sigma must be >= 0");
}

/// One record per (run, checkpoint); metric_value = eval_truth times noise.
inline std::vector<RunRecord> gen_runs(const GroundTruth& gt, const std::vector<RunEntry>& runs,
                                       const NoiseSpec& noise, const ComputeContext& cost,
                                       const std::string& metric_name = "synthetic",
                                       const std::string& tag = "") {
    validate(gt);
    validate(noise);
    std::vector<RunRecord> out;
    std::uint64_t index = 0;
    for (const auto& run : runs) {
        const ModelConfig cfg = cost.settings.with_shape(run.shape);
        for (std::int64_t examples : run.checkpoints) {
            RunRecord r;
            r.shape = run.shape;
            r.dimension_under_test = run.dimension_under_test;
            r.examples_seen = examples;
            r.compute_gflops = training_compute(cfg, examples, cost.flops_multiplier);
            r.metric_name = metric_name;
            r.metric_value = apply_noise(eval_truth(gt, run.shape, *r.compute_gflops), noise, index++);
            r.tag = tag;
            out.push_back(std::move(r));
        }
    }
    return out;
}

inline std::vector<RunRecord> gen_runs(const GroundTruth& gt, const StarSweepSpec& design,
                                       const NoiseSpec& noise, double flops_multiplier = 1.0,
                                       const std::string& metric_name = "synthetic") {
    return gen_runs(gt, design.runs(), noise, {design.settings, flops_multiplier}, metric_name,
                    "star");
}

inline std::vector<RunRecord> gen_runs(const GroundTruth& gt, const GridSweepSpec& design,
                                       const NoiseSpec& noise,
                                       const std::string& metric_name = "synthetic") {
    return gen_runs(gt, design.runs(), noise, {design.settings, design.flops_multiplier},
                    metric_name, "grid");
}

/// Exhaustive argmin of eval_truth over the cross product of `grids` at
/// fixed compute. Ties resolve to the lexicographically smallest shape.
inline Shape brute_force_optimum(const GroundTruth& gt, double t,
                                 const std::array<std::vector<std::int64_t>, kNumDims>& grids) {
    for (const auto& g : grids) detail::require(!g.empty(), "brute force grids must be nonempty");
    Shape best;
    double best_value = std::numeric_limits<double>::infinity();
    bool have = false;
    for (std::int64_t w : grids[0])
        for (std::int64_t d : grids[1])
            for (std::int64_t m : grids[2]) {
                const Shape s{w, d, m};
                const double v = eval_truth(gt, s, t);
                if (!have || v < best_value || (v == best_value && s < best)) {
                    best = s;
                    best_value = v;
                    have = true;
                }
            }
    return best;
}

/// Real-valued counterpart for dense 1-D checks: argmin index of eval_truth
/// along dimension `d` over `grid`, others pinned at `pinned`.
inline std::size_t brute_force_argmin_1d(const GroundTruth& gt, double t, Dim d,
                                         const std::vector<double>& grid,
                                         const std::array<double, kNumDims>& pinned) {
    detail::require(!grid.empty(), "brute force grid must be nonempty");
    std::size_t best = 0;
    double best_value = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < grid.size(); ++i) {
        auto x = pinned;
        x[index_of(d)] = grid[i];
        const double v = detail::eval_truth_real(gt, x, t);
        if (v < best_value) {
            best_value = v;
            best = i;
        }
    }
    return best;
}

}  // namespace shapescale
