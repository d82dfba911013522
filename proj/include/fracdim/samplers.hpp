#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>

#include <Eigen/Core>

#include "fracdim/core.hpp"

namespace fracdim {

enum class FractalKind { Sierpinski, CantorDust, CantorCrossInterval, Menger };

struct FractalSpec {
  FractalKind kind = FractalKind::Sierpinski;
  int digit_depth = 64;
  double true_dimension() const;
  Index ambient_dim() const { return kind == FractalKind::Menger ? 3 : 2; }
};

/// log3/log2, 2 log2/log3, 1 + log2/log3 and log20/log3 respectively.
double true_dimension(FractalKind kind);
std::string_view to_string(FractalKind kind);
std::optional<FractalKind> parse_fractal_kind(std::string_view name);

// Deterministic digit-to-point maps. digits[i] is the digit at level i + 1;
// sums run from the deepest level up for accuracy.

/// Digits in {0,1,2}; vertices (0,0), (1,0), (1/2, sqrt(3)/2).
Eigen::Vector2d sierpinski_point(std::span<const std::uint8_t> digits);
/// Binary digits; 2 * sum a_i 3^-i.
double cantor_coordinate(std::span<const std::uint8_t> digits);
/// Tuples in {0,1,2}^3 with at most one coordinate equal to 1.
Eigen::Vector3d menger_point(std::span<const std::array<std::uint8_t, 3>> digits);

/// A level tuple is kept unless two or more coordinates equal 1.
constexpr bool menger_tuple_allowed(int x, int y, int z) {
  return (x == 1) + (y == 1) + (z == 1) < 2;
}

/// Draws uniform tuples until one is allowed; adds the number of discarded
/// draws to *rejected when given.
std::array<std::uint8_t, 3> draw_menger_tuple(Rng& rng, std::uint64_t* rejected = nullptr);
double sample_cantor_coordinate(Rng& rng, int depth = 64);

PointCloud sample_sierpinski(Index n, std::uint64_t seed, int depth = 64);
PointCloud sample_cantor_dust(Index n, std::uint64_t seed, int depth = 64);
PointCloud sample_cantor_cross_interval(Index n, std::uint64_t seed, int depth = 64);
PointCloud sample_menger(Index n, std::uint64_t seed, int depth = 64);
PointCloud sample_fractal(const FractalSpec& spec, Index n, std::uint64_t seed);

}  // namespace fracdim
