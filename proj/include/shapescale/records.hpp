#pragma once

#include <cmath>
#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "shapescale/cost_model.hpp"
#include "shapescale/errors.hpp"
#include "shapescale/shape.hpp"

namespace shapescale {

/// One observed (shape, compute, metric) triple.
struct RunRecord {
    Shape shape;
    std::optional<Dim> dimension_under_test;
    std::int64_t examples_seen = 0;
    std::optional<double> compute_gflops;
    std::string metric_name;
    double metric_value = 0.0;
    std::string tag;
    /// Columns this library does not interpret, kept in file order.
    std::vector<std::pair<std::string, std::string>> extra;

    friend bool operator==(const RunRecord&, const RunRecord&) = default;
};

inline void validate(const RunRecord& r) {
    detail::require(std::isfinite(r.metric_value) && r.metric_value > 0.0,
                    "metric_value must be > 0");
    detail::require(r.examples_seen >= 0, "examples_seen must be >= 0");
    if (r.compute_gflops)
        detail::require(std::isfinite(*r.compute_gflops) && *r.compute_gflops > 0.0,
                        "compute_gflops must be > 0");
}

/// Cost-model context used to derive compute from examples_seen.
struct ComputeContext {
    ModelConfig settings;  // shape ignored
    double flops_multiplier = 1.0;
};

/// Compute in GFLOPs, derived from examples_seen when the record does not carry it.
inline double resolve_compute(const RunRecord& r, const std::optional<ComputeContext>& ctx) {
    if (r.compute_gflops) return *r.compute_gflops;
    detail::require(ctx.has_value(),
                    "record has no compute_gflops and no model config was given to derive it");
    detail::require(r.examples_seen > 0, "examples_seen must be > 0 to derive compute");
    return training_compute(ctx->settings.with_shape(r.shape), r.examples_seen,
                            ctx->flops_multiplier);
}

/// Fills compute_gflops on every record that lacks it.
inline std::vector<RunRecord> with_resolved_compute(std::vector<RunRecord> records,
                                                    const std::optional<ComputeContext>& ctx) {
    for (auto& r : records) r.compute_gflops = resolve_compute(r, ctx);
    return records;
}

}  // namespace shapescale
