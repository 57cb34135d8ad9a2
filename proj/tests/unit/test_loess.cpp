#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <vector>

#include "biasaudit/errors.hpp"
#include "biasaudit/loess.hpp"

using namespace biasaudit;

namespace {

template <typename F>
ErrorKind kind_of(F&& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.kind();
  }
  FAIL("expected a biasaudit::Error");
  return ErrorKind::IoError;
}

std::vector<Point> sample(int n, double lo, double hi, double (*f)(double)) {
  std::vector<Point> out;
  for (int i = 0; i < n; ++i) {
    const double x = lo + (hi - lo) * i / (n - 1);
    out.push_back({x, f(x)});
  }
  return out;
}

}  // namespace

TEST_SUITE("loess") {
  TEST_CASE("tricube endpoints and shape") {
    CHECK(tricube(0, 1) == 1.0);
    CHECK(tricube(1, 1) == 0.0);
    CHECK(tricube(2, 1) == 0.0);
    CHECK(tricube(0.5, 1) == doctest::Approx(std::pow(1 - 0.125, 3)).epsilon(1e-15));
    CHECK(tricube(0.25, 0.5) == tricube(0.5, 1.0));
  }

  TEST_CASE("line reproduced by a local linear fit") {
    const auto pts = sample(10, 0, 9, [](double x) { return 2 * x + 1; });
    const auto fit = loess_fit(pts, 0.7, 1);
    REQUIRE(fit.fitted.size() == 101);
    CHECK(fit.fitted.front().x == 0.0);
    CHECK(fit.fitted.back().x == 9.0);
    for (const auto& p : fit.fitted) CHECK(std::fabs(p.y - (2 * p.x + 1)) < 1e-6);
  }

  TEST_CASE("quadratic reproduced with span one and degree two") {
    const auto pts = sample(15, -1, 2, [](double x) { return 3 * x * x - x + 0.5; });
    const auto fit = loess_fit(pts, 1.0, 2);
    for (const auto& p : fit.fitted) {
      CHECK(std::fabs(p.y - (3 * p.x * p.x - p.x + 0.5)) < 1e-6);
    }
  }

  TEST_CASE("constant data reproduced exactly") {
    std::vector<Point> pts{{0.3, 3}, {0.1, 3}, {0.7, 3}, {0.2, 3}, {0.9, 3}, {0.5, 3}};
    for (int degree : {1, 2}) {
      const auto fit = loess_fit(pts, 0.8, degree);
      for (const auto& p : fit.fitted) CHECK(p.y == doctest::Approx(3.0).epsilon(1e-13));
    }
  }

  TEST_CASE("single evaluation agrees with the grid") {
    const auto pts = sample(12, 0, 1, [](double x) { return std::sin(6 * x); });
    const auto fit = loess_fit(pts, 0.5, 2);
    for (std::size_t i = 0; i < fit.fitted.size(); i += 10) {
      CHECK(loess_at(pts, fit.fitted[i].x, 0.5, 2) == fit.fitted[i].y);
    }
  }

  TEST_CASE("tied x values are handled") {
    std::vector<Point> pts{{0, 1}, {0, 1}, {0, 1}, {1, 3}, {1, 3}, {2, 5}, {2, 5}, {3, 7}};
    // span 0.8 keeps a second distinct x inside every tricube window
    const auto fit = loess_fit(pts, 0.8, 1);
    for (const auto& p : fit.fitted) CHECK(std::fabs(p.y - (2 * p.x + 1)) < 1e-6);
  }

  TEST_CASE("fit is independent of input order") {
    auto pts = sample(9, 0, 1, [](double x) { return x * x * x; });
    const auto a = loess_fit(pts, 0.5, 2);
    std::reverse(pts.begin(), pts.end());
    const auto b = loess_fit(pts, 0.5, 2);
    for (std::size_t i = 0; i < a.fitted.size(); ++i) {
      CHECK(a.fitted[i].y == doctest::Approx(b.fitted[i].y).epsilon(1e-12));
    }
  }

  TEST_CASE("argument and data errors") {
    const auto pts = sample(10, 0, 1, [](double x) { return x; });
    CHECK(kind_of([&] { loess_fit(pts, 0.0, 2); }) == ErrorKind::InvalidArgument);
    CHECK(kind_of([&] { loess_fit(pts, 1.5, 2); }) == ErrorKind::InvalidArgument);
    CHECK(kind_of([&] { loess_fit(pts, 0.5, 3); }) == ErrorKind::InvalidArgument);
    const std::vector<Point> three{{0, 0}, {1, 1}, {2, 2}};
    CHECK(kind_of([&] { loess_fit(three, 1.0, 2); }) == ErrorKind::InsufficientPoints);
    const std::vector<Point> flat{{1, 0}, {1, 1}, {1, 2}, {1, 3}};
    CHECK(kind_of([&] { loess_fit(flat, 1.0, 1); }) == ErrorKind::InsufficientPoints);
  }

  TEST_CASE("neighborhood with too few distinct x values") {
    std::vector<Point> pts;
    for (int i = 0; i < 10; ++i) pts.push_back({0.0, 1.0 + i});
    pts.push_back({1.0, 0.0});
    pts.push_back({2.0, 0.0});
    CHECK(kind_of([&] { loess_fit(pts, 0.3, 2); }) == ErrorKind::DegenerateNeighborhood);
  }
}
