#pragma once

// Experiment design (star and grid sweeps) and seed-shape selection.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "shapescale/cost_model.hpp"
#include "shapescale/errors.hpp"
#include "shapescale/records.hpp"
#include "shapescale/shape.hpp"

namespace shapescale {

/// One training run in a manifest: a shape evaluated at ascending example counts.
struct RunEntry {
    Shape shape;
    std::optional<Dim> dimension_under_test;
    std::vector<std::int64_t> checkpoints;

    std::int64_t examples() const { return checkpoints.empty() ? 0 : checkpoints.back(); }

    friend bool operator==(const RunEntry&, const RunEntry&) = default;
};

namespace detail {

inline void require_ascending_positive(const std::vector<std::int64_t>& v, const std::string& what) {
    require(!v.empty(), what + " must not be empty");
    for (std::size_t i = 0; i < v.size(); ++i) {
        require(v[i] >= 1, what + " values must be >= 1");
        require(i == 0 || v[i] > v[i - 1], what + " must be strictly ascending");
    }
}

inline std::int64_t round_to_multiple(double v, std::int64_t multiple) {
    const double q = std::floor(v / static_cast<double>(multiple) + 0.5);
    return static_cast<std::int64_t>(q) * multiple;
}

inline std::int64_t dim_multiple(Dim d, const ModelConfig& settings, std::int64_t mlp_multiple) {
    switch (d) {
        case Dim::width: return settings.num_heads;
        case Dim::depth: return 1;
        case Dim::mlp_dim: return mlp_multiple;
    }
    return 1;
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Star sweep

struct StarPlanOptions {
    double step_factor = 1.2;
    int points_per_dim = 6;
    double ceiling_ratio = 0.85;
    /// Per-dimension override of ceiling_ratio (width, depth, mlp_dim).
    std::optional<std::array<double, kNumDims>> ceiling_ratios;
    /// Example counts at which every run is evaluated.
    std::vector<std::int64_t> checkpoints{64'000'000, 128'000'000, 256'000'000};
    ModelConfig settings;  // shape ignored
    std::int64_t mlp_multiple = 16;
};

struct StarSweepSpec {
    Shape center;
    std::array<std::vector<std::int64_t>, kNumDims> grids;
    std::vector<std::int64_t> checkpoints;
    ModelConfig settings;
    double step_factor = 1.2;
    std::array<double, kNumDims> ceiling_ratios{0.85, 0.85, 0.85};

    const std::vector<std::int64_t>& grid(Dim d) const { return grids[index_of(d)]; }

    std::vector<RunEntry> runs() const {
        std::vector<RunEntry> out;
        for (Dim d : kAllDims) {
            for (std::int64_t v : grid(d)) {
                Shape s = center;
                s[d] = v;
                out.push_back({s, d, checkpoints});
            }
        }
        return out;
    }

    /// Largest relative deviation of a consecutive grid ratio from step_factor.
    double spacing_deviation(Dim d) const {
        const auto& g = grid(d);
        double worst = 0.0;
        for (std::size_t i = 1; i < g.size(); ++i) {
            const double ratio = static_cast<double>(g[i]) / static_cast<double>(g[i - 1]);
            worst = std::max(worst, std::fabs(ratio / step_factor - 1.0));
        }
        return worst;
    }
};

/// Exponentially spaced grid per dimension, topping out at ceiling * center,
/// with every other dimension pinned at the center.
inline StarSweepSpec plan_star(const Shape& center, const StarPlanOptions& opt = {}) {
    using detail::require;
    require(opt.step_factor > 1.0, "step_factor must be > 1");
    require(opt.points_per_dim >= 4, "points_per_dim must be >= 4");
    require(opt.mlp_multiple >= 1, "mlp_multiple must be >= 1");
    detail::require_ascending_positive(opt.checkpoints, "checkpoints");
    validate(opt.settings.with_shape(center));

    StarSweepSpec spec;
    spec.center = center;
    spec.checkpoints = opt.checkpoints;
    spec.settings = opt.settings;
    spec.step_factor = opt.step_factor;
    for (Dim d : kAllDims) {
        const double ratio =
            opt.ceiling_ratios ? (*opt.ceiling_ratios)[index_of(d)] : opt.ceiling_ratio;
        require(ratio > 0.0 && ratio < 1.0, "ceiling_ratio must lie in (0, 1)");
        spec.ceiling_ratios[index_of(d)] = ratio;

        const std::int64_t multiple = detail::dim_multiple(d, opt.settings, opt.mlp_multiple);
        const double top = ratio * static_cast<double>(center[d]);
        auto& grid = spec.grids[index_of(d)];
        for (int i = 0; i < opt.points_per_dim; ++i) {
            const double v = top / std::pow(opt.step_factor, opt.points_per_dim - 1 - i);
            std::int64_t r = detail::round_to_multiple(v, multiple);
            if (static_cast<double>(r) > top) r -= multiple;
            if (r < multiple || (!grid.empty() && r <= grid.back()) || r >= center[d]) {
                throw InfeasibleError(
                    "star center " + to_string(center) + " too small for " +
                    std::to_string(opt.points_per_dim) + " " + std::string(to_string(d)) +
                    " values at step " + std::to_string(opt.step_factor) + " below ceiling " +
                    std::to_string(top));
            }
            grid.push_back(r);
        }
    }
    return spec;
}

// ---------------------------------------------------------------------------
// Grid sweep

struct GridPlanOptions {
    /// Example-count checkpoints; defaults to {examples_per_run}.
    std::vector<std::int64_t> checkpoints;
    /// When non-empty, each shape is instead evaluated at these training
    /// budgets (GFLOPs), i.e. IsoFLOP checkpoints.
    std::vector<double> compute_checkpoints;
    ModelConfig settings;  // shape ignored
    double flops_multiplier = 1.0;
};

struct GridSweepSpec {
    std::array<std::vector<std::int64_t>, kNumDims> values;
    std::int64_t examples_per_run = 0;
    std::vector<std::int64_t> checkpoints;
    std::vector<double> compute_checkpoints;
    ModelConfig settings;
    double flops_multiplier = 1.0;
    std::vector<RunEntry> run_list;
    double total_compute_gflops = 0.0;

    std::size_t total_runs() const { return run_list.size(); }
    const std::vector<RunEntry>& runs() const { return run_list; }
};

inline GridSweepSpec plan_grid(const std::array<std::vector<std::int64_t>, kNumDims>& ranges,
                               std::int64_t examples_per_run, const GridPlanOptions& opt = {}) {
    using detail::require;
    for (Dim d : kAllDims) {
        const auto& v = ranges[index_of(d)];
        require(v.size() >= 3, std::string(to_string(d)) +
                                   " list needs >= 3 values so an interior optimum is possible");
        detail::require_ascending_positive(v, std::string(to_string(d)) + " list");
    }
    require(examples_per_run >= 1, "examples_per_run must be >= 1");
    validate_multiplier(opt.flops_multiplier);

    GridSweepSpec spec;
    spec.values = ranges;
    spec.examples_per_run = examples_per_run;
    spec.settings = opt.settings;
    spec.flops_multiplier = opt.flops_multiplier;
    spec.compute_checkpoints = opt.compute_checkpoints;
    spec.checkpoints = opt.checkpoints.empty() ? std::vector<std::int64_t>{examples_per_run}
                                               : opt.checkpoints;
    detail::require_ascending_positive(spec.checkpoints, "checkpoints");
    for (std::size_t i = 0; i < spec.compute_checkpoints.size(); ++i) {
        const double t = spec.compute_checkpoints[i];
        require(std::isfinite(t) && t > 0.0, "compute checkpoints must be > 0");
        require(i == 0 || t > spec.compute_checkpoints[i - 1],
                "compute checkpoints must be strictly ascending");
    }

    for (std::int64_t w : ranges[0]) {
        for (std::int64_t d : ranges[1]) {
            for (std::int64_t m : ranges[2]) {
                const Shape s{w, d, m};
                const ModelConfig cfg = opt.settings.with_shape(s);
                RunEntry run{s, std::nullopt, {}};
                if (spec.compute_checkpoints.empty()) {
                    run.checkpoints = spec.checkpoints;
                } else {
                    for (double t : spec.compute_checkpoints) {
                        const auto n = examples_for_compute(cfg, t, opt.flops_multiplier);
                        if (n >= 1 && (run.checkpoints.empty() || n > run.checkpoints.back()))
                            run.checkpoints.push_back(n);
                    }
                    if (run.checkpoints.empty())
                        throw InfeasibleError("compute checkpoints below one forward pass of " +
                                              to_string(s));
                }
                spec.total_compute_gflops +=
                    training_compute(cfg, run.examples(), opt.flops_multiplier);
                spec.run_list.push_back(std::move(run));
            }
        }
    }
    return spec;
}

// ---------------------------------------------------------------------------
// Pareto frontier and seed selection

namespace detail {

inline void require_shared_metric(const std::vector<RunRecord>& records) {
    for (const auto& r : records)
        require(r.metric_name == records.front().metric_name,
                "records must share metric_name (found '" + records.front().metric_name +
                    "' and '" + r.metric_name + "')");
}

inline void require_compute(const std::vector<RunRecord>& records) {
    for (const auto& r : records)
        require(r.compute_gflops.has_value(),
                "records need compute_gflops (derive it from a model config first)");
}

// Order used for frontier extraction: compute, then loss, then shape.
inline bool frontier_less(const RunRecord& l, const RunRecord& r) {
    if (*l.compute_gflops != *r.compute_gflops) return *l.compute_gflops < *r.compute_gflops;
    if (l.metric_value != r.metric_value) return l.metric_value < r.metric_value;
    if (l.shape != r.shape) return l.shape < r.shape;
    return l.examples_seen < r.examples_seen;
}

}  // namespace detail

/// Records not dominated in (compute, metric_value), ascending compute with
/// strictly decreasing metric. Exact ties keep the lexicographically smaller shape.
inline std::vector<RunRecord> pareto_frontier(std::vector<RunRecord> records) {
    if (records.empty()) return {};
    detail::require_shared_metric(records);
    detail::require_compute(records);
    std::stable_sort(records.begin(), records.end(), detail::frontier_less);
    std::vector<RunRecord> out;
    for (auto& r : records) {
        if (out.empty() || r.metric_value < out.back().metric_value) out.push_back(std::move(r));
    }
    return out;
}

struct SeedOptions {
    /// Budgets (GFLOPs) at which the compute-optimal record is determined.
    /// Defaults to the distinct record computes, with computes that agree to
    /// within cluster_rel_tol merged into one bin.
    std::vector<double> bins;
    double cluster_rel_tol = 1e-6;
    /// A shape must win at least this many contiguous bins to be conclusive.
    int min_contiguous_bins = 2;
};

struct SeedSelection {
    Shape x0;
    double t0 = 0.0;
    std::array<bool, kNumDims> on_boundary{false, false, false};
    bool conclusive = false;
    std::string reason;
    std::vector<RunRecord> pareto_set;
    std::vector<double> bins;
    /// Winning shape at each bin (nullopt when no record fits the budget).
    std::vector<std::optional<Shape>> winners;
    int winning_bins = 0;
    int min_contiguous_bins = 2;

    bool any_boundary() const { return on_boundary[0] || on_boundary[1] || on_boundary[2]; }
};

namespace detail {

inline std::vector<double> default_bins(const std::vector<RunRecord>& records, double rel_tol) {
    std::vector<double> t;
    for (const auto& r : records) t.push_back(*r.compute_gflops);
    std::sort(t.begin(), t.end());
    // A bin is the largest compute of a cluster whose members lie within
    // rel_tol of the cluster's smallest compute.
    std::vector<double> bins;
    double cluster_start = 0.0;
    for (double v : t) {
        if (!bins.empty() && v <= cluster_start * (1.0 + rel_tol)) {
            bins.back() = v;
        } else {
            cluster_start = v;
            bins.push_back(v);
        }
    }
    return bins;
}

}  // namespace detail

/// Picks the shape that is compute-optimal over the longest contiguous run of
/// budget bins. The optimal record at budget T is the frontier record with the
/// largest compute <= T. t0 is the first bin of the winning run.
inline SeedSelection select_seed_shape(const std::vector<RunRecord>& records,
                                       const SeedOptions& opt = {}) {
    using detail::require;
    require(!records.empty(), "select_seed_shape needs records");
    detail::require_shared_metric(records);
    detail::require_compute(records);
    require(opt.min_contiguous_bins >= 1, "min_contiguous_bins must be >= 1");

    SeedSelection sel;
    sel.min_contiguous_bins = opt.min_contiguous_bins;
    sel.pareto_set = pareto_frontier(records);
    sel.bins = opt.bins.empty() ? detail::default_bins(records, opt.cluster_rel_tol) : opt.bins;
    require(sel.bins.size() >= 2, "select_seed_shape needs >= 2 compute bins");
    for (std::size_t i = 1; i < sel.bins.size(); ++i)
        require(sel.bins[i] > sel.bins[i - 1], "compute bins must be strictly ascending");

    std::size_t next = 0;
    std::optional<std::size_t> current;
    for (double budget : sel.bins) {
        while (next < sel.pareto_set.size() && *sel.pareto_set[next].compute_gflops <= budget)
            current = next++;
        sel.winners.push_back(current ? std::optional<Shape>(sel.pareto_set[*current].shape)
                                      : std::nullopt);
    }

    // Longest run of identical winners; earliest run wins ties.
    std::size_t best_start = 0, best_len = 0;
    for (std::size_t i = 0; i < sel.winners.size();) {
        if (!sel.winners[i]) {
            ++i;
            continue;
        }
        std::size_t j = i;
        while (j < sel.winners.size() && sel.winners[j] == sel.winners[i]) ++j;
        if (j - i > best_len) {
            best_start = i;
            best_len = j - i;
        }
        i = j;
    }
    require(best_len > 0, "no record fits within any compute bin");

    sel.x0 = *sel.winners[best_start];
    sel.t0 = sel.bins[best_start];
    sel.winning_bins = static_cast<int>(best_len);

    for (Dim d : kAllDims) {
        std::set<std::int64_t> seen;
        for (const auto& r : records) seen.insert(r.shape[d]);
        sel.on_boundary[index_of(d)] = sel.x0[d] == *seen.begin() || sel.x0[d] == *seen.rbegin();
    }

    sel.conclusive = true;
    if (sel.winning_bins < opt.min_contiguous_bins) {
        sel.conclusive = false;
        sel.reason = "no shape is optimal in " + std::to_string(opt.min_contiguous_bins) +
                     " contiguous compute bins";
    } else if (sel.any_boundary()) {
        sel.conclusive = false;
        std::string dims;
        for (Dim d : kAllDims)
            if (sel.on_boundary[index_of(d)]) dims += (dims.empty() ? "" : ",") + std::string(to_string(d));
        sel.reason = "selected shape lies on the grid boundary in " + dims +
                     "; extend the grid in that direction";
    }
    return sel;
}

}  // namespace shapescale
