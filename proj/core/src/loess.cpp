#include "biasaudit/loess.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include <Eigen/Dense>

#include "biasaudit/errors.hpp"

namespace biasaudit {

namespace {

constexpr double kTieJitter = 1e-12;

void check_arguments(std::span<const Point> points, double span, int degree) {
  if (!(span > 0.0 && span <= 1.0)) {
    throw Error(ErrorKind::InvalidArgument, "span must lie in (0, 1]");
  }
  if (degree != 1 && degree != 2) {
    throw Error(ErrorKind::InvalidArgument, "degree must be 1 or 2");
  }
  if (points.size() < static_cast<std::size_t>(degree) + 2) {
    throw Error(ErrorKind::InsufficientPoints,
                "need at least " + std::to_string(degree + 2) +
                    " points, got " + std::to_string(points.size()));
  }
  for (const auto& p : points) {
    if (!std::isfinite(p.x) || !std::isfinite(p.y)) {
      throw Error(ErrorKind::InvalidArgument, "non-finite point");
    }
  }
}

// Jittered x used only to rank neighbors: ties broken by position in a
// stable sort on x.
std::vector<double> selection_keys(std::span<const Point> points) {
  std::vector<std::size_t> order(points.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](auto a, auto b) {
    return points[a].x < points[b].x;
  });
  std::vector<double> keys(points.size());
  for (std::size_t rank = 0; rank < order.size(); ++rank) {
    keys[order[rank]] = points[order[rank]].x + kTieJitter * static_cast<double>(rank);
  }
  return keys;
}

std::size_t neighborhood_size(std::size_t n, double span, int degree) {
  auto q = static_cast<std::size_t>(std::ceil(span * static_cast<double>(n)));
  q = std::max(q, static_cast<std::size_t>(degree) + 2);
  return std::min(q, n);
}

double local_fit(std::span<const Point> points, std::span<const double> keys,
                 double x0, std::size_t q, int degree) {
  const std::size_t n = points.size();
  std::vector<std::size_t> idx(n);
  std::iota(idx.begin(), idx.end(), 0);
  std::stable_sort(idx.begin(), idx.end(), [&](auto a, auto b) {
    return std::abs(keys[a] - x0) < std::abs(keys[b] - x0);
  });
  idx.resize(q);

  double d_max = 0.0;
  for (auto i : idx) d_max = std::max(d_max, std::abs(points[i].x - x0));
  if (!(d_max > 0.0)) {
    throw Error(ErrorKind::DegenerateNeighborhood,
                "all neighbors share x = " + std::to_string(x0));
  }

  const int cols = degree + 1;
  Eigen::MatrixXd design(static_cast<Eigen::Index>(q), cols);
  Eigen::VectorXd rhs(static_cast<Eigen::Index>(q));
  std::vector<double> distinct;
  for (std::size_t r = 0; r < q; ++r) {
    const Point& p = points[idx[r]];
    const double w = tricube(std::abs(p.x - x0), d_max);
    const double sw = std::sqrt(w);
    // Local coordinate scaled to [-1, 1] for conditioning; the intercept is
    // the fitted value at x0.
    const double t = (p.x - x0) / d_max;
    double power = 1.0;
    for (int c = 0; c < cols; ++c) {
      design(static_cast<Eigen::Index>(r), c) = sw * power;
      power *= t;
    }
    rhs(static_cast<Eigen::Index>(r)) = sw * p.y;
    if (w > 0.0) distinct.push_back(p.x);
  }
  std::sort(distinct.begin(), distinct.end());
  distinct.erase(std::unique(distinct.begin(), distinct.end()), distinct.end());
  if (distinct.size() < static_cast<std::size_t>(cols)) {
    throw Error(ErrorKind::DegenerateNeighborhood,
                "neighborhood of x = " + std::to_string(x0) + " has " +
                    std::to_string(distinct.size()) +
                    " distinct weighted x values, need " +
                    std::to_string(cols));
  }

  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(design);
  if (qr.rank() < cols) {
    throw Error(ErrorKind::DegenerateNeighborhood,
                "rank-deficient local fit at x = " + std::to_string(x0));
  }
  const Eigen::VectorXd beta = qr.solve(rhs);
  return beta(0);
}

}  // namespace

double tricube(double d, double d_max) {
  if (!(d_max > 0.0)) return d <= 0.0 ? 1.0 : 0.0;
  const double u = std::abs(d) / d_max;
  if (u >= 1.0) return 0.0;
  const double c = 1.0 - u * u * u;
  return c * c * c;
}

double loess_at(std::span<const Point> points, double x0, double span,
                int degree) {
  check_arguments(points, span, degree);
  const auto keys = selection_keys(points);
  return local_fit(points, keys, x0,
                   neighborhood_size(points.size(), span, degree), degree);
}

LoessFit loess_fit(std::span<const Point> points, double span, int degree,
                   std::size_t grid_size) {
  check_arguments(points, span, degree);
  if (grid_size < 2) {
    throw Error(ErrorKind::InvalidArgument, "grid needs at least 2 points");
  }
  auto [lo, hi] = std::minmax_element(
      points.begin(), points.end(),
      [](const Point& a, const Point& b) { return a.x < b.x; });
  const double x_min = lo->x;
  const double x_max = hi->x;
  if (!(x_max > x_min)) {
    throw Error(ErrorKind::InsufficientPoints, "all points share one x value");
  }

  LoessFit fit;
  fit.points.assign(points.begin(), points.end());
  fit.span = span;
  fit.degree = degree;
  fit.fitted.reserve(grid_size);

  const auto keys = selection_keys(points);
  const std::size_t q = neighborhood_size(points.size(), span, degree);
  const double step = (x_max - x_min) / static_cast<double>(grid_size - 1);
  for (std::size_t i = 0; i < grid_size; ++i) {
    const double x0 = i + 1 == grid_size ? x_max : x_min + step * static_cast<double>(i);
    fit.fitted.push_back({x0, local_fit(points, keys, x0, q, degree)});
  }
  return fit;
}

}  // namespace biasaudit
