#pragma once

// Estimation of single-dimension law parameters from run records by
// minimising relative error.
//
// Each restart runs two simplex stages:
//   1. a search over the three exponents (a, b, c) in log space, where for
//      fixed exponents the four scale coefficients (alpha, beta, xi, eps) enter
//      linearly and are solved exactly by non-negative least squares on the
//      relative residuals;
//   2. a polish of all seven parameters in log space, which keeps every
//      returned coefficient strictly positive.
// Restarts are seeded deterministically; the report holds the best restart.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <limits>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "shapescale/detail/nelder_mead.hpp"
#include "shapescale/detail/random.hpp"
#include "shapescale/errors.hpp"
#include "shapescale/law.hpp"
#include "shapescale/records.hpp"
#include "shapescale/shape.hpp"

namespace shapescale {

enum class FitObjective { squared_relative, absolute_relative };

struct ExponentBox {
    double lo = 0.05;
    double hi = 2.0;
};

struct FitOptions {
    FitObjective objective = FitObjective::squared_relative;
    int restarts = 32;
    std::uint64_t seed = 0;
    int max_evals = 20000;
    double rel_tol = 1e-10;
    ExponentBox a_box{0.05, 2.0};
    ExponentBox b_box{0.05, 2.0};
    ExponentBox c_box{0.1, 1.5};
    /// eps is kept >= eps_floor_ratio * min(metric_value).
    double eps_floor_ratio = 1e-9;
    /// Dimension whose value is x; defaults to the records' dimension_under_test.
    std::optional<Dim> dimension;
    /// Used to derive compute for records given only as examples_seen.
    std::optional<ComputeContext> compute_context;
};

struct FitReport {
    LawParams params;
    Dim dimension = Dim::width;
    std::string metric_name;
    FitObjective objective_kind = FitObjective::squared_relative;
    double objective_value = 0.0;
    /// Signed relative residuals (prediction - observed) / observed, record order.
    std::vector<double> residuals;
    std::optional<double> holdout_relative_error;
    double s = 0.0;
    int n_restarts_used = 0;
    int evaluations = 0;
    bool converged = false;
    /// Fitted law barely depends on x, or an exponent collapsed toward zero.
    bool degenerate = false;
    std::uint64_t seed = 0;
};

/// Thrown when no restart produced a finite objective. Carries the
/// best-effort report.
class FitNonConvergence : public NonConvergenceError {
public:
    FitNonConvergence(const std::string& what, FitReport best)
        : NonConvergenceError(what), report(std::move(best)) {}
    FitReport report;
};

namespace detail {

struct FitData {
    std::vector<double> x, t, f;
    double min_f = 0.0;
    double eps_floor = 0.0;
};

inline double exponent_bound_lo() { return std::log(1e-4); }
inline double exponent_bound_hi() { return std::log(10.0); }

inline bool exponents_in_bounds(double la, double lb, double lc) {
    const double lo = exponent_bound_lo(), hi = exponent_bound_hi();
    return la >= lo && la <= hi && lb >= lo && lb <= hi && lc >= lo && lc <= hi;
}

inline double objective_of(const std::vector<double>& rel, FitObjective kind) {
    double sum = 0.0;
    for (double r : rel) sum += kind == FitObjective::squared_relative ? r * r : std::fabs(r);
    return sum / static_cast<double>(rel.size());
}

inline void relative_residuals(const LawParams& p, const FitData& d, std::vector<double>& out) {
    out.resize(d.f.size());
    for (std::size_t i = 0; i < d.f.size(); ++i) {
        const double lx = std::log(d.x[i]);
        const double lt = std::log(d.t[i]);
        const double pred = std::exp(std::log(p.alpha) - p.a * lx) +
                            std::exp(std::log(p.beta) + p.b * lx - p.c * lt) +
                            std::exp(std::log(p.xi) - p.c * lt) + p.eps;
        out[i] = (pred - d.f[i]) / d.f[i];
    }
}

// NNLS on 4 columns by exhaustive active-set enumeration: the constrained
// optimum is the unconstrained least-squares solution on its own support.
struct LinearSolve {
    std::array<double, 4> coef{0, 0, 0, 0};
    double objective = std::numeric_limits<double>::infinity();
};

inline LinearSolve solve_coefficients(double a, double b, double c, const FitData& d) {
    const auto n = static_cast<Eigen::Index>(d.f.size());
    Eigen::Matrix<double, Eigen::Dynamic, 4> M(n, 4);
    for (Eigen::Index i = 0; i < n; ++i) {
        const double lx = std::log(d.x[static_cast<std::size_t>(i)]);
        const double lt = std::log(d.t[static_cast<std::size_t>(i)]);
        const double inv_f = 1.0 / d.f[static_cast<std::size_t>(i)];
        M(i, 0) = std::exp(-a * lx) * inv_f;
        M(i, 1) = std::exp(b * lx - c * lt) * inv_f;
        M(i, 2) = std::exp(-c * lt) * inv_f;
        M(i, 3) = inv_f;
    }
    Eigen::Array<double, 1, 4> scale = M.colwise().norm().array();
    for (int j = 0; j < 4; ++j) {
        if (!(scale(j) > 0.0) || !std::isfinite(scale(j))) return {};
        M.col(j) /= scale(j);
    }
    const Eigen::VectorXd ones = Eigen::VectorXd::Ones(n);

    LinearSolve best;
    auto try_subset = [&](unsigned mask) {
        std::array<int, 4> cols{};
        int k = 0;
        for (int j = 0; j < 4; ++j)
            if (mask & (1u << j)) cols[static_cast<std::size_t>(k++)] = j;
        Eigen::MatrixXd sub(n, k);
        for (int j = 0; j < k; ++j) sub.col(j) = M.col(cols[static_cast<std::size_t>(j)]);
        const Eigen::VectorXd w = sub.colPivHouseholderQr().solve(ones);
        for (int j = 0; j < k; ++j)
            if (!(w(j) >= 0.0)) return false;
        const double obj = (sub * w - ones).squaredNorm() / static_cast<double>(n);
        if (!std::isfinite(obj)) return false;
        if (obj < best.objective) {
            best.objective = obj;
            best.coef = {0, 0, 0, 0};
            for (int j = 0; j < k; ++j) {
                const int col = cols[static_cast<std::size_t>(j)];
                best.coef[static_cast<std::size_t>(col)] = w(j) / scale(col);
            }
        }
        return true;
    };
    if (try_subset(0xFu)) return best;
    for (unsigned mask = 1; mask < 0xFu; ++mask) try_subset(mask);
    return best;
}

// Log-space parameter vector <-> LawParams. eps = floor + exp(theta).
inline LawParams unpack(const std::vector<double>& th, double eps_floor) {
    return {std::exp(th[0]), std::exp(th[1]), std::exp(th[2]), std::exp(th[3]),
            std::exp(th[4]), std::exp(th[5]), eps_floor + std::exp(th[6])};
}

inline std::vector<double> pack(const LawParams& p, double eps_floor) {
    return {std::log(p.alpha), std::log(p.a),  std::log(p.beta),
            std::log(p.b),     std::log(p.c),  std::log(p.xi),
            std::log(std::max(p.eps - eps_floor, eps_floor))};
}

// Turns a non-negative linear solution into strictly positive LawParams by
// giving vanished coefficients a negligible contribution.
inline LawParams params_from_solution(double a, double b, double c, const LinearSolve& s,
                                      const FitData& d) {
    const double min_f = d.min_f;
    double x_ref = 1.0, t_ref = 1.0;
    {
        double sx = 0.0, st = 0.0;
        for (std::size_t i = 0; i < d.x.size(); ++i) {
            sx += std::log(d.x[i]);
            st += std::log(d.t[i]);
        }
        x_ref = std::exp(sx / static_cast<double>(d.x.size()));
        t_ref = std::exp(st / static_cast<double>(d.t.size()));
    }
    const double tiny = 1e-12 * min_f;
    LawParams p;
    p.a = a;
    p.b = b;
    p.c = c;
    p.alpha = s.coef[0] > 0.0 ? s.coef[0] : tiny * std::pow(x_ref, a);
    p.beta = s.coef[1] > 0.0 ? s.coef[1] : tiny * std::pow(t_ref, c) / std::pow(x_ref, b);
    p.xi = s.coef[2] > 0.0 ? s.coef[2] : tiny * std::pow(t_ref, c);
    p.eps = std::max(s.coef[3], d.eps_floor * (1.0 + 1e-12));
    return p;
}

struct RestartOutcome {
    LawParams params;
    double objective = std::numeric_limits<double>::infinity();
    int evals = 0;
    bool met_tolerance = false;
};

inline RestartOutcome run_restart(const FitData& d, const FitOptions& opt, int index) {
    Rng rng(derive_seed(opt.seed, static_cast<std::uint64_t>(index)));
    const double a0 = rng.log_uniform(opt.a_box.lo, opt.a_box.hi);
    const double b0 = rng.log_uniform(opt.b_box.lo, opt.b_box.hi);
    const double c0 = rng.log_uniform(opt.c_box.lo, opt.c_box.hi);

    SimplexOptions sopt;
    sopt.max_evals = opt.max_evals;
    sopt.rel_spread_tol = opt.rel_tol;
    sopt.abs_spread_tol = 1e-30;
    sopt.initial_step = 0.3;

    // Stage 1: exponents, coefficients solved linearly.
    auto exponent_objective = [&](const std::vector<double>& th) {
        if (!exponents_in_bounds(th[0], th[1], th[2]))
            return std::numeric_limits<double>::infinity();
        return solve_coefficients(std::exp(th[0]), std::exp(th[1]), std::exp(th[2]), d).objective;
    };
    auto stage1 = nelder_mead(exponent_objective, {std::log(a0), std::log(b0), std::log(c0)}, sopt);

    RestartOutcome out;
    out.evals = stage1.evals;
    if (!std::isfinite(stage1.value)) return out;

    const double a = std::exp(stage1.x[0]), b = std::exp(stage1.x[1]), c = std::exp(stage1.x[2]);
    const LawParams start = params_from_solution(a, b, c, solve_coefficients(a, b, c, d), d);

    // Stage 2: all seven parameters in log space.
    std::vector<double> rel;
    auto full_objective = [&](const std::vector<double>& th) {
        if (!exponents_in_bounds(th[1], th[3], th[4]))
            return std::numeric_limits<double>::infinity();
        for (double v : th)
            if (!std::isfinite(v) || std::fabs(v) > 700.0)
                return std::numeric_limits<double>::infinity();
        relative_residuals(unpack(th, d.eps_floor), d, rel);
        return objective_of(rel, opt.objective);
    };
    std::vector<double> th0 = pack(start, d.eps_floor);
    const double start_value = full_objective(th0);

    sopt.initial_step = 0.05;
    auto stage2 = nelder_mead(full_objective, th0, sopt);
    out.evals += stage2.evals;
    // A second pass from the best vertex refreshes a collapsed simplex.
    if (std::isfinite(stage2.value) && stage2.evals < opt.max_evals) {
        sopt.initial_step = 0.01;
        sopt.max_evals = std::max(1, opt.max_evals - stage2.evals);
        auto stage3 = nelder_mead(full_objective, stage2.x, sopt);
        out.evals += stage3.evals;
        if (stage3.value <= stage2.value) stage2 = stage3;
    }

    if (stage2.value <= start_value) {
        out.params = unpack(stage2.x, d.eps_floor);
        out.objective = stage2.value;
        out.met_tolerance = stage2.met_tolerance || stage1.met_tolerance;
    } else {
        out.params = start;
        out.objective = start_value;
        out.met_tolerance = stage1.met_tolerance;
    }
    return out;
}

inline Dim resolve_dimension(const std::vector<RunRecord>& records, const FitOptions& opt) {
    if (opt.dimension) return *opt.dimension;
    const auto first = records.front().dimension_under_test;
    require(first.has_value(),
            "records lack dimension_under_test; pass the dimension to fit explicitly");
    for (const auto& r : records)
        require(r.dimension_under_test == first,
                "records mix dimensions under test; fit one dimension at a time");
    return *first;
}

inline FitData make_fit_data(const std::vector<RunRecord>& records, Dim dim,
                             const FitOptions& opt) {
    FitData d;
    for (const auto& r : records) {
        validate(r);
        d.x.push_back(static_cast<double>(r.shape[dim]));
        d.t.push_back(resolve_compute(r, opt.compute_context));
        d.f.push_back(r.metric_value);
    }
    d.min_f = *std::min_element(d.f.begin(), d.f.end());
    d.eps_floor = opt.eps_floor_ratio * d.min_f;
    return d;
}

inline bool looks_degenerate(const LawParams& p, const FitData& d) {
    if (p.a < 1e-3 || p.b < 1e-3) return true;
    double x_effect = 0.0;
    for (std::size_t i = 0; i < d.x.size(); ++i) {
        const double size_term = p.alpha * std::pow(d.x[i], -p.a);
        const double coupled = p.beta * std::pow(d.x[i], p.b) * std::pow(d.t[i], -p.c);
        x_effect = std::max(x_effect, (size_term + coupled) / d.f[i]);
    }
    return x_effect < 1e-6;
}

}  // namespace detail

/// Fits one dimension's law to records of a single metric.
inline FitReport fit_dimension(const std::vector<RunRecord>& records, const FitOptions& opt = {}) {
    using detail::require;
    require(records.size() >= 8, "fit needs >= 8 records, got " + std::to_string(records.size()));
    require(opt.restarts >= 1, "restarts must be >= 1");
    require(opt.max_evals >= 10, "max_evals must be >= 10");
    for (const auto* box : {&opt.a_box, &opt.b_box, &opt.c_box})
        require(box->lo > 0.0 && box->hi >= box->lo, "exponent boxes must satisfy 0 < lo <= hi");
    require(opt.eps_floor_ratio > 0.0, "eps_floor_ratio must be > 0");
    for (const auto& r : records)
        require(r.metric_name == records.front().metric_name,
                "records must share metric_name");

    const Dim dim = detail::resolve_dimension(records, opt);
    const detail::FitData data = detail::make_fit_data(records, dim, opt);
    require(std::set<double>(data.x.begin(), data.x.end()).size() >= 3,
            "fit needs >= 3 distinct values of " + std::string(to_string(dim)));
    require(std::set<double>(data.t.begin(), data.t.end()).size() >= 2,
            "fit needs >= 2 distinct compute values");

    FitReport report;
    report.dimension = dim;
    report.metric_name = records.front().metric_name;
    report.objective_kind = opt.objective;
    report.seed = opt.seed;

    detail::RestartOutcome best;
    for (int r = 0; r < opt.restarts; ++r) {
        const auto outcome = detail::run_restart(data, opt, r);
        report.evaluations += outcome.evals;
        if (!std::isfinite(outcome.objective)) continue;
        ++report.n_restarts_used;
        if (outcome.objective < best.objective) best = outcome;
    }

    if (report.n_restarts_used == 0) {
        report.params = best.params;
        throw FitNonConvergence("all " + std::to_string(opt.restarts) +
                                    " restarts produced a non-finite objective",
                                report);
    }

    report.params = best.params;
    report.objective_value = best.objective;
    detail::relative_residuals(best.params, data, report.residuals);
    report.s = scaling_exponent(best.params);
    report.converged = best.met_tolerance || best.objective < 1e-24;
    report.degenerate = detail::looks_degenerate(best.params, data);
    return report;
}

/// Mean absolute relative error of the fitted law on held-out records.
/// Stored into report.holdout_relative_error.
inline double extrapolation_check(FitReport& report, const std::vector<RunRecord>& holdout,
                                  const std::optional<ComputeContext>& ctx = std::nullopt) {
    detail::require(!holdout.empty(), "holdout set must not be empty");
    double sum = 0.0;
    for (const auto& r : holdout) {
        validate(r);
        const double x = static_cast<double>(r.shape[report.dimension]);
        const double pred = eval_law(report.params, x, resolve_compute(r, ctx));
        sum += std::fabs(pred - r.metric_value) / r.metric_value;
    }
    const double err = sum / static_cast<double>(holdout.size());
    report.holdout_relative_error = err;
    return err;
}

struct StabilityRow {
    std::string metric;
    std::optional<FitReport> fit;
    std::string error;
};

struct StabilityReport {
    std::vector<StabilityRow> rows;
    /// (max - min) / mean of s over successfully fitted metrics.
    double s_spread = 0.0;
    int failures = 0;
};

/// Fits every metric independently and reports how much s moves between them.
inline StabilityReport exponent_stability(const std::map<std::string, std::vector<RunRecord>>& sets,
                                          const FitOptions& opt = {}) {
    detail::require(!sets.empty(), "exponent_stability needs at least one metric");
    StabilityReport out;
    std::vector<double> s_values;
    for (const auto& [metric, records] : sets) {
        StabilityRow row;
        row.metric = metric;
        try {
            row.fit = fit_dimension(records, opt);
            s_values.push_back(row.fit->s);
        } catch (const FitNonConvergence& e) {
            row.error = e.what();
            ++out.failures;
        } catch (const ValidationError& e) {
            row.error = e.what();
            ++out.failures;
        }
        out.rows.push_back(std::move(row));
    }
    if (s_values.size() >= 2) {
        const auto [lo, hi] = std::minmax_element(s_values.begin(), s_values.end());
        double mean = 0.0;
        for (double s : s_values) mean += s;
        mean /= static_cast<double>(s_values.size());
        out.s_spread = (*hi - *lo) / mean;
    }
    return out;
}

}  // namespace shapescale
