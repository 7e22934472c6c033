#include <cmath>
#include <numbers>
#include <sstream>

#include "doctest.h"
#include "legspec/error.hpp"
#include "legspec/grid.hpp"

using namespace legspec;
constexpr double pi = std::numbers::pi;

TEST_CASE("sample_function examples") {
  auto zero = sample_function([](double) { return 0.0; }, CircleGrid(8));
  CHECK(zero.size() == 8);
  for (double v : zero.values()) CHECK(v == 0.0);

  auto c = sample_function([](double q) { return std::cos(2 * pi * q); }, CircleGrid(8));
  CHECK(c[0] == doctest::Approx(1.0));
  CHECK(c[2] == doctest::Approx(0.0));
  CHECK(c[4] == doctest::Approx(-1.0));

  CHECK_THROWS_AS(sample_function([](double q) { return q > 0.5 ? NAN : 0.0; }, CircleGrid(8)), InvalidInput);
  CHECK_THROWS_AS(CircleGrid(4), InvalidInput);
}

TEST_CASE("circle bookkeeping") {
  CircleGrid g(8);
  CHECK(g.wrap(-1) == 7);
  CHECK(g.wrap(17) == 1);
  CHECK(wrap_unit(-0.25) == doctest::Approx(0.75));
  CHECK(circle_distance(0.95, 0.05) == doctest::Approx(0.1));
}

TEST_CASE("grad_fd: constant, sin, linear fiber profile") {
  auto k = sample_function([](double) { return 3.0; }, CircleGrid(16));
  const auto gk = grad_fd(k);
  for (double v : gk[0].values()) CHECK(v == 0.0);

  auto s = sample_function([](double q) { return std::sin(2 * pi * q); }, CircleGrid(256));
  auto g = grad_fd(s)[0];
  double err = 0.0;
  for (int i = 0; i < 256; ++i) err = std::max(err, std::fabs(g[i] - 2 * pi * std::cos(2 * pi * i / 256.0)));
  CHECK(err < 1e-3);

  ProductDomain dom;
  dom.base = CircleGrid(8);
  dom.fiber_axes = {{-1.0, -0.4, 0.1, 0.7, 1.0}};
  std::vector<double> v;
  for (double e : dom.fiber_axes[0])
    for (int i = 0; i < 8; ++i) v.push_back(3.0 * e);
  auto gf = grad_fd(ScalarField(dom, v));
  REQUIRE(gf.size() == 2);
  for (std::size_t i = 0; i < v.size(); ++i) CHECK(gf[1][i] == doctest::Approx(3.0).epsilon(1e-12));
}

TEST_CASE("grad_fd converges at second order") {
  auto f = [](double q) { return std::sin(2 * pi * q) + 0.5 * std::cos(4 * pi * q); };
  auto df = [](double q) { return 2 * pi * std::cos(2 * pi * q) - 2 * pi * std::sin(4 * pi * q); };
  auto err = [&](int n) {
    auto g = grad_fd(sample_function(f, CircleGrid(n)))[0];
    double e = 0.0;
    for (int i = 0; i < n; ++i) e = std::max(e, std::fabs(g[i] - df(static_cast<double>(i) / n)));
    return e;
  };
  const double ratio = err(64) / err(128);
  CHECK(ratio > 3.5);
  CHECK(ratio < 4.5);
}

TEST_CASE("sampled extrema within Lip * spacing") {
  auto f = [](double q) { return std::cos(2 * pi * q + 0.3); };
  auto s = sample_function(f, CircleGrid(64));
  CHECK(std::fabs(s.max() - 1.0) <= 2 * pi / 64);
  CHECK(std::fabs(s.min() + 1.0) <= 2 * pi / 64);
}

TEST_CASE("csv export") {
  auto s = sample_function([](double q) { return q; }, CircleGrid(8));
  std::ostringstream os;
  s.write_csv(os);
  CHECK(os.str().rfind("q,value\n0,0\n", 0) == 0);
}
