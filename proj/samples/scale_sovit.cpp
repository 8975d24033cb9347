// Scales the (608, 10, 928) seed shape to a 9T GFLOPs budget and prints the
// frontier across several compute decades.

#include <cstdio>
#include <vector>

#include "shapescale/shapescale.hpp"

int main() {
    using namespace shapescale;

    const Shape seed{608, 10, 928};
    const ModelConfig settings;
    const double t0 = training_compute(settings.with_shape(seed), 600'000'000);
    std::printf("seed %s: %.3g GFLOPs for 600M examples\n", to_string(seed).c_str(), t0);

    const ScalingPlan plan{to_real(seed), t0, kClassificationExponents, kEqualWeights, 9e12};
    const ScaledModel m = scale_to_budget(plan, settings);
    std::printf("9T GFLOPs -> real (%.1f, %.2f, %.1f), rounded %s, %.1fM params, %.3gB examples\n",
                m.real_shape[0], m.real_shape[1], m.real_shape[2], to_string(m.rounded_shape).c_str(),
                static_cast<double>(m.param_count) / 1e6,
                static_cast<double>(m.training_examples) / 1e9);

    const std::vector<double> grid{1e10, 1e11, 1e12, 1e13};
    const FrontierTable table =
        frontier_table(to_real(seed), t0, kClassificationExponents, kEqualWeights, grid, settings);
    std::printf("\n%12s %6s %6s %6s %10s\n", "GFLOPs", "width", "depth", "mlp", "params");
    for (const auto& row : table.rows) {
        std::printf("%12.3g %6lld %6lld %6lld %9.1fM\n", row.target_compute,
                    static_cast<long long>(row.rounded_shape.width),
                    static_cast<long long>(row.rounded_shape.depth),
                    static_cast<long long>(row.rounded_shape.mlp_dim),
                    static_cast<double>(row.param_count) / 1e6);
    }
    return 0;
}
