#pragma once

#include <array>
#include <compare>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

#include "shapescale/errors.hpp"

namespace shapescale {

/// The three shape knobs of a transformer encoder.
enum class Dim : int { width = 0, depth = 1, mlp_dim = 2 };

inline constexpr std::size_t kNumDims = 3;
inline constexpr std::array<Dim, kNumDims> kAllDims{Dim::width, Dim::depth, Dim::mlp_dim};

constexpr std::size_t index_of(Dim d) { return static_cast<std::size_t>(d); }

inline std::string_view to_string(Dim d) {
    switch (d) {
        case Dim::width: return "width";
        case Dim::depth: return "depth";
        case Dim::mlp_dim: return "mlp_dim";
    }
    return "?";
}

inline std::optional<Dim> parse_dim(std::string_view s) {
    if (s == "width") return Dim::width;
    if (s == "depth") return Dim::depth;
    if (s == "mlp_dim" || s == "mlp") return Dim::mlp_dim;
    return std::nullopt;
}

/// Integer architecture shape. Ordering is lexicographic (width, depth, mlp_dim),
/// which is the tie-break used everywhere a deterministic choice is needed.
struct Shape {
    std::int64_t width = 1;
    std::int64_t depth = 1;
    std::int64_t mlp_dim = 1;

    constexpr std::int64_t operator[](Dim d) const {
        switch (d) {
            case Dim::width: return width;
            case Dim::depth: return depth;
            case Dim::mlp_dim: return mlp_dim;
        }
        return 0;
    }
    constexpr std::int64_t& operator[](Dim d) {
        switch (d) {
            case Dim::width: return width;
            case Dim::depth: return depth;
            default: return mlp_dim;
        }
    }

    friend constexpr auto operator<=>(const Shape&, const Shape&) = default;
};

/// Real-valued shape, used before rounding to an architecture.
using RealShape = std::array<double, kNumDims>;

inline RealShape to_real(const Shape& s) {
    return {static_cast<double>(s.width), static_cast<double>(s.depth),
            static_cast<double>(s.mlp_dim)};
}

inline std::string to_string(const Shape& s) {
    return "(" + std::to_string(s.width) + ", " + std::to_string(s.depth) + ", " +
           std::to_string(s.mlp_dim) + ")";
}

}  // namespace shapescale
