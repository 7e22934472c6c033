#include <cmath>
#include <numbers>
#include <random>

#include "doctest.h"
#include "legspec/critical.hpp"
#include "legspec/error.hpp"
#include "legspec/gfqi.hpp"
#include "legspec/grid.hpp"

using namespace legspec;
constexpr double pi = std::numbers::pi;

namespace {

CircleFunction cos2pi(double a = 1.0) {
  return {[a](double q) { return a * std::cos(2 * pi * q); }, [a](double q) { return -2 * pi * a * std::sin(2 * pi * q); },
          "cos"};
}

/// (q, p, z) -> (q + s p, p, z + s p^2 / 2): time-s flow of h = p^2/2 away from a cutoff.
class ShearMap final : public JetMap {
 public:
  explicit ShearMap(double s) : s_(s) {}
  JetPoint apply(const JetPoint& x) const override { return {x.q + s_ * x.p, x.p, x.z - 0.5 * s_ * x.p * x.p}; }
  Displacement displacement_bound(double p_max) const override { return {0.5 * std::fabs(s_) * p_max * p_max, 0.0}; }
  std::string describe() const override { return "shear"; }

 private:
  double s_;
};

}  // namespace

TEST_CASE("quadratic form bookkeeping") {
  QuadraticForm q({1.0, -2.0, 3.0});
  CHECK(q.index() == 1);
  CHECK((-q).index() == 2);
  CHECK(q.oplus(QuadraticForm({-1.0})).index() == 2);
  CHECK_THROWS_AS(QuadraticForm({1.0, 0.0}), InvalidInput);
  const double e[3] = {1, 1, 1};
  CHECK(q(e) == 2.0);
}

TEST_CASE("gfqi_from_base_function: values, front, spectrum") {
  auto s = gfqi_from_base_function(cos2pi());
  CHECK(s.fiber_dim() == 1);
  CHECK(s.index() == 0);
  const double e[1] = {0.5};
  CHECK(s.eval(0.25, e) == doctest::Approx(0.25).epsilon(1e-12));

  WavefrontOptions opt;
  opt.n_q = 128;
  auto w = wavefront_detailed(s, opt);
  CHECK(w.front.size() == 128);
  double err = 0.0;
  for (const auto& x : w.front.points) {
    err = std::max(err, std::fabs(x.p - 2 * pi * std::sin(2 * pi * x.q)));
    err = std::max(err, std::fabs(x.z - std::cos(2 * pi * x.q)));
  }
  CHECK(err <= 2.0 / 128);
  CHECK(w.defect < 1e-3);

  auto spec = spectrum(s, opt);
  REQUIRE(spec.size() == 2);
  CHECK(spec[0] == doctest::Approx(-1.0).epsilon(1e-9));
  CHECK(spec[1] == doctest::Approx(1.0).epsilon(1e-9));
}

TEST_CASE("zero section, constants and pure quadratics") {
  auto o = gfqi_from_base_function(CircleFunction::constant(0.0));
  for (const auto& x : wavefront(o, {.n_q = 32}).points) {
    CHECK(x.p == 0.0);
    CHECK(x.z == 0.0);
  }
  auto c = gfqi_from_base_function(CircleFunction::constant(0.37));
  auto sc = spectrum(c, {.n_q = 32});
  REQUIRE(sc.size() == 1);
  CHECK(sc[0] == doctest::Approx(0.37));
  auto q = pure_quadratic(QuadraticForm({1.0, -1.0}));
  auto sq = spectrum(q, {.n_q = 16, .resolution = 8});
  REQUIRE(sq.size() == 1);
  CHECK(sq[0] == doctest::Approx(0.0));
}

TEST_CASE("fiber critical points") {
  auto s = gfqi_from_base_function(cos2pi());
  auto pts = fiber_critical_points(s, 0.3, 1.0, 16);
  REQUIRE(pts.size() == 1);
  CHECK(std::fabs(pts[0][0]) < 1e-6);

  auto a = [](double q) { return 0.5 + 0.25 * std::sin(2 * pi * q); };
  auto cubic = gfqi_from_callable(
      QuadraticForm({1.0}), {2.0, 10.0, 2.0},
      [a](double q, std::span<const double> e) { return e[0] * e[0] * e[0] / 3.0 - a(q) * e[0]; }, "cubic");
  for (double q : {0.0, 0.2, 0.7}) {
    auto r = fiber_critical_points(cubic, q, 3.0, 24);
    REQUIRE(r.size() == 2);
    CHECK(r[0][0] == doctest::Approx(-std::sqrt(a(q))).epsilon(1e-6));
    CHECK(r[1][0] == doctest::Approx(std::sqrt(a(q))).epsilon(1e-6));
  }
  CHECK_THROWS_AS(fiber_critical_points(cubic, 0.1, 2.5, 8), InvalidInput);

  auto d2 = pure_quadratic(QuadraticForm({1.0, -1.0}));
  auto r2 = fiber_critical_points(d2, 0.1, 1.0, 8);
  REQUIRE(r2.size() == 1);
  CHECK(std::fabs(r2[0][0]) < 1e-6);
  CHECK(std::fabs(r2[0][1]) < 1e-6);
}

TEST_CASE("quadratic at infinity outside the support radius") {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  auto f = cos2pi(0.6);
  auto s = oplus(gfqi_from_base_function(f), negate(gfqi_from_base_function(cos2pi(0.3))));
  std::vector<double> e(2);
  for (int k = 0; k < 100; ++k) {
    const double q = u(rng);
    for (auto& x : e) x = (u(rng) < 0.5 ? -1 : 1) * (s.support_radius() + 0.1 + 5 * u(rng));
    const double dev = s.eval(q, e) - s.form()(e);
    CHECK(std::fabs(dev - (f(q) - 0.3 * std::cos(2 * pi * q))) <= 1e-12);
  }
}

TEST_CASE("negation and differences of fronts") {
  auto s = gfqi_from_base_function(cos2pi(0.8));
  auto w = wavefront(s, {.n_q = 64});
  auto wn = wavefront(negate(s), {.n_q = 64});
  REQUIRE(w.size() == wn.size());
  for (std::size_t i = 0; i < w.size(); ++i) {
    CHECK(wn.points[i].p == doctest::Approx(-w.points[i].p));
    CHECK(wn.points[i].z == doctest::Approx(-w.points[i].z));
  }
  auto diff = ominus(s, s);
  CHECK(diff.fiber_dim() == 2);
  CHECK(diff.index() == 1);
  auto wd = wavefront(diff, {.n_q = 32, .resolution = 8});
  for (const auto& x : wd.points) {
    CHECK(std::fabs(x.p) < 1e-6);
    CHECK(std::fabs(x.z) < 1e-9);
  }
  auto spec = spectrum(diff, {.n_q = 32, .resolution = 8});
  CHECK(std::any_of(spec.begin(), spec.end(), [](double v) { return std::fabs(v) < 1e-9; }));
}

TEST_CASE("transport of a graph is the transported jet") {
  // Shear by s of j^1 f with small f is a graph of a function g with
  // g(q + s p(q)) = f(q) - s p(q)^2 / 2, p = -f'.
  const double amp = 0.02, sh = 0.5;
  auto f = cos2pi(amp);
  auto t = transport(gfqi_graph(f), std::make_shared<ShearMap>(sh));
  for (double q : {0.0, 0.13, 0.5, 0.77}) {
    const double p = -f.derivative(q);
    const double Q = q + sh * p;
    const double want = f(q) - 0.5 * sh * p * p;
    CHECK(t.eval(wrap_unit(Q), {}) == doctest::Approx(want).epsilon(1e-9));
  }
  CHECK(transport_graphicality(gfqi_graph(f), ShearMap(sh)) > 0.5);
  auto big = transport(gfqi_graph(cos2pi(1.0)), std::make_shared<ShearMap>(sh));
  CHECK(transport_graphicality(gfqi_graph(cos2pi(1.0)), ShearMap(sh)) <= 0.0);
  CHECK_THROWS_AS(big.eval(0.1, {}), FoldError);
}
