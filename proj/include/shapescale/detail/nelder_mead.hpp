#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <vector>

namespace shapescale::detail {

struct SimplexOptions {
    double rel_spread_tol = 1e-10;
    double abs_spread_tol = 1e-300;
    int max_evals = 20000;
    double initial_step = 0.25;
};

struct SimplexResult {
    std::vector<double> x;
    double value = std::numeric_limits<double>::infinity();
    int evals = 0;
    bool met_tolerance = false;
};

/// Derivative-free simplex descent (Nelder-Mead, standard coefficients).
/// Non-finite objective values are treated as +inf.
template <class Objective>
SimplexResult nelder_mead(Objective&& objective, std::vector<double> start,
                          const SimplexOptions& opt = {}) {
    const std::size_t n = start.size();
    SimplexResult res;
    auto eval = [&](const std::vector<double>& x) {
        ++res.evals;
        const double v = objective(x);
        return std::isfinite(v) ? v : std::numeric_limits<double>::infinity();
    };

    std::vector<std::vector<double>> pts(n + 1, start);
    for (std::size_t i = 0; i < n; ++i) pts[i + 1][i] += opt.initial_step;
    std::vector<double> vals(n + 1);
    for (std::size_t i = 0; i <= n; ++i) vals[i] = eval(pts[i]);

    std::vector<std::size_t> order(n + 1);
    std::vector<double> centroid(n), trial(n), trial2(n);

    while (true) {
        std::iota(order.begin(), order.end(), 0);
        std::stable_sort(order.begin(), order.end(),
                         [&](std::size_t l, std::size_t r) { return vals[l] < vals[r]; });
        const std::size_t best = order.front();
        const std::size_t worst = order.back();
        const std::size_t second = order[n - 1];

        const double spread = vals[worst] - vals[best];
        if (std::isfinite(vals[worst]) &&
            spread <= opt.rel_spread_tol * std::fabs(vals[best]) + opt.abs_spread_tol) {
            res.met_tolerance = true;
            break;
        }
        if (res.evals >= opt.max_evals) break;

        std::fill(centroid.begin(), centroid.end(), 0.0);
        for (std::size_t i = 0; i <= n; ++i) {
            if (i == worst) continue;
            for (std::size_t j = 0; j < n; ++j) centroid[j] += pts[i][j];
        }
        for (auto& v : centroid) v /= static_cast<double>(n);

        auto along = [&](double coef, std::vector<double>& out) {
            for (std::size_t j = 0; j < n; ++j)
                out[j] = centroid[j] + coef * (pts[worst][j] - centroid[j]);
        };

        along(-1.0, trial);
        const double f_reflect = eval(trial);
        if (f_reflect < vals[best]) {
            along(-2.0, trial2);
            const double f_expand = eval(trial2);
            if (f_expand < f_reflect) {
                pts[worst] = trial2;
                vals[worst] = f_expand;
            } else {
                pts[worst] = trial;
                vals[worst] = f_reflect;
            }
            continue;
        }
        if (f_reflect < vals[second]) {
            pts[worst] = trial;
            vals[worst] = f_reflect;
            continue;
        }
        const bool outside = f_reflect < vals[worst];
        along(outside ? -0.5 : 0.5, trial2);
        const double f_contract = eval(trial2);
        if (f_contract < (outside ? f_reflect : vals[worst])) {
            pts[worst] = trial2;
            vals[worst] = f_contract;
            continue;
        }
        for (std::size_t i = 0; i <= n; ++i) {
            if (i == best) continue;
            for (std::size_t j = 0; j < n; ++j)
                pts[i][j] = pts[best][j] + 0.5 * (pts[i][j] - pts[best][j]);
            vals[i] = eval(pts[i]);
        }
    }

    const auto best_it = std::min_element(vals.begin(), vals.end());
    res.value = *best_it;
    res.x = pts[static_cast<std::size_t>(best_it - vals.begin())];
    return res;
}

}  // namespace shapescale::detail
