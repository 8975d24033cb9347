#pragma once

// Joint shape/compute law for a single shape dimension x at compute t:
//
//   f(x, t) = alpha * x^-a + (beta * x^b + xi) * t^-c + eps
//
// with all seven coefficients strictly positive. For fixed t the law is
// quasiconvex in x with the unique minimizer
//
//   x*(t) = (alpha * a * t^c / (beta * b))^(1 / (a + b))  =  O(t^s),  s = c / (a + b)
//
// and along that frontier f(x*, t) = F * x*^-a + G * t^-c + eps with
// F = alpha * (1 + a / b), G = xi.

#include <cmath>
#include <string>
#include <utility>
#include <vector>

#include "shapescale/errors.hpp"

namespace shapescale {

struct LawParams {
    double alpha = 1.0;
    double a = 1.0;
    double beta = 1.0;
    double b = 1.0;
    double c = 1.0;
    double xi = 1.0;
    double eps = 1.0;

    friend bool operator==(const LawParams&, const LawParams&) = default;
};

inline void validate(const LawParams& p) {
    auto positive = [](double v) { return std::isfinite(v) && v > 0.0; };
    detail::require(positive(p.alpha), "LawParams.alpha must be > 0");
    detail::require(positive(p.a), "LawParams.a must be > 0");
    detail::require(positive(p.beta), "LawParams.beta must be > 0");
    detail::require(positive(p.b), "LawParams.b must be > 0");
    detail::require(positive(p.c), "LawParams.c must be > 0");
    detail::require(positive(p.xi), "LawParams.xi must be > 0");
    detail::require(positive(p.eps), "LawParams.eps must be > 0");
}

namespace detail {

inline void require_positive_arg(double v, const char* name) {
    if (!(v > 0.0) || !std::isfinite(v))
        throw DomainError(std::string(name) + " must be finite and > 0");
}

}  // namespace detail

/// Law value. Powers are taken in the log domain so x and t may span many
/// orders of magnitude without intermediate overflow.
inline double eval_law(const LawParams& p, double x, double t) {
    detail::require_positive_arg(x, "x");
    detail::require_positive_arg(t, "t");
    const double lx = std::log(x);
    const double lt = std::log(t);
    const double size_term = std::exp(std::log(p.alpha) - p.a * lx);
    const double coupled = std::exp(std::log(p.beta) + p.b * lx - p.c * lt);
    const double data_term = std::exp(std::log(p.xi) - p.c * lt);
    return size_term + coupled + data_term + p.eps;
}

/// Unique stationary point of eval_law in x at fixed t.
inline double minimizer_xhat(const LawParams& p, double t) {
    detail::require_positive_arg(t, "t");
    const double num = std::log(p.alpha) + std::log(p.a) + p.c * std::log(t);
    const double den = std::log(p.beta) + std::log(p.b);
    return std::exp((num - den) / (p.a + p.b));
}

/// Compute-optimal value of the dimension at compute t. Same closed form as
/// minimizer_xhat; returned unrounded.
inline double optimal_shape_dim(const LawParams& p, double t) { return minimizer_xhat(p, t); }

/// Growth exponent of the optimum: x*(t) ~ t^s.
inline double scaling_exponent(const LawParams& p) { return p.c / (p.a + p.b); }

struct FrontierConstants {
    double F = 0.0;
    double G = 0.0;
    double a = 0.0;  // exponent on x*
    double c = 0.0;  // exponent on t
    double eps = 0.0;

    double eval(double x_star, double t) const {
        return F * std::exp(-a * std::log(x_star)) + G * std::exp(-c * std::log(t)) + eps;
    }
};

inline FrontierConstants frontier_constants(const LawParams& p) {
    return {p.alpha * (1.0 + p.a / p.b), p.xi, p.a, p.c, p.eps};
}

struct IsoflopPoint {
    double x = 0.0;
    double loss = 0.0;
};

/// Law sampled over an ascending grid of x at fixed compute.
inline std::vector<IsoflopPoint> isoflop_curve(const LawParams& p, double t,
                                               const std::vector<double>& x_grid) {
    detail::require(!x_grid.empty(), "isoflop grid must not be empty");
    std::vector<IsoflopPoint> out;
    out.reserve(x_grid.size());
    double prev = 0.0;
    for (std::size_t i = 0; i < x_grid.size(); ++i) {
        const double x = x_grid[i];
        detail::require(std::isfinite(x) && x > 0.0, "isoflop grid values must be > 0");
        detail::require(i == 0 || x > prev, "isoflop grid must be strictly ascending");
        out.push_back({x, eval_law(p, x, t)});
        prev = x;
    }
    return out;
}

}  // namespace shapescale
