#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace biasaudit {

struct Point {
  double x = 0.0;
  double y = 0.0;
};

inline constexpr double kDefaultLoessSpan = 0.5;
inline constexpr int kDefaultLoessDegree = 2;
inline constexpr std::size_t kDefaultLoessGrid = 101;

struct LoessFit {
  std::vector<Point> points;
  double span = kDefaultLoessSpan;
  int degree = kDefaultLoessDegree;
  std::vector<Point> fitted;  // (x, y_hat) on an evenly spaced grid
};

/// Tricube kernel (1 - (d/d_max)^3)^3 for 0 <= d <= d_max, zero beyond.
double tricube(double d, double d_max);

/// Local polynomial regression. For each grid x0 the ceil(span * n) points
/// nearest to x0 are weighted by tricube distance (d_max is the distance of
/// the farthest of them) and a weighted least-squares polynomial of `degree`
/// is evaluated at x0. No robustness iterations.
///
/// Tied x values are separated by rank * 1e-12 when choosing neighbors only.
/// Throws InsufficientPoints (fewer than degree + 2 points, or no x spread),
/// DegenerateNeighborhood, or InvalidArgument for span outside (0, 1] or
/// degree outside {1, 2}.
LoessFit loess_fit(std::span<const Point> points,
                   double span = kDefaultLoessSpan,
                   int degree = kDefaultLoessDegree,
                   std::size_t grid_size = kDefaultLoessGrid);

/// Single evaluation of the same local fit at `x0`.
double loess_at(std::span<const Point> points, double x0, double span,
                int degree);

}  // namespace biasaudit
