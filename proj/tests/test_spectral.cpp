#include <cmath>
#include <numbers>

#include "doctest.h"
#include "legspec/critical.hpp"
#include "legspec/spectral.hpp"

using namespace legspec;
constexpr double pi = std::numbers::pi;

namespace {

CircleFunction trig(double a, int k, double phase) {
  return {[=](double q) { return a * std::cos(2 * pi * k * q + phase); },
          [=](double q) { return -2 * pi * k * a * std::sin(2 * pi * k * q + phase); }, "trig"};
}

SpectralConfig small_config(int n = 64, int fiber = 16) {
  SpectralConfig c;
  c.lattice.n_q = n;
  c.lattice.fiber_intervals = fiber;
  return c;
}

}  // namespace

TEST_CASE("zero section and cos") {
  auto z = spectral_pair(gfqi_from_base_function(CircleFunction::constant(0.0)), small_config());
  CHECK(z.minus == 0.0);
  CHECK(z.plus == 0.0);
  auto c = spectral_pair(gfqi_from_base_function(trig(1.0, 1, 0.0)), small_config());
  CHECK(c.minus == doctest::Approx(-1.0).epsilon(1e-9));
  CHECK(c.plus == doctest::Approx(1.0).epsilon(1e-9));
  CHECK(c.refined_minus);
  CHECK(c.refined_plus);
  CHECK(c.raw_minus >= -1.0);
  CHECK(c.raw_plus <= 1.0);
  CHECK(c.tol_spec > 0.0);

  auto g = spectral_pair(gfqi_graph(trig(1.0, 1, 0.3)), small_config());
  CHECK(g.minus == doctest::Approx(-1.0).epsilon(1e-9));
  CHECK(g.plus == doctest::Approx(1.0).epsilon(1e-9));
}

TEST_CASE("difference with itself vanishes") {
  auto s = gfqi_from_base_function(trig(0.7, 2, 0.4));
  auto d = spectral_pair(ominus(s, s), small_config(32, 8));
  CHECK(d.degree_minus == 1);
  CHECK(std::fabs(d.minus) <= 2 * d.tol_spec);
  CHECK(std::fabs(d.plus) <= 2 * d.tol_spec);
}

TEST_CASE("duality under negation") {
  auto s = gfqi_from_base_function(trig(0.9, 1, 1.1));
  auto a = spectral_pair(s, small_config());
  auto b = spectral_pair(negate(s), small_config());
  CHECK(b.degree_minus == 1);
  CHECK(a.plus == doctest::Approx(-b.minus).epsilon(1e-8));
  CHECK(a.minus == doctest::Approx(-b.plus).epsilon(1e-8));
  auto nn = spectral_pair(negate(negate(s)), small_config());
  CHECK(nn.minus == doctest::Approx(a.minus));
  CHECK(nn.plus == doctest::Approx(a.plus));
}

TEST_CASE("stabilization leaves the pair unchanged") {
  auto s = gfqi_from_base_function(trig(0.5, 1, 0.2));
  auto a = spectral_pair(s, small_config(32, 8));
  for (const auto& q : {QuadraticForm({1.0}), QuadraticForm({-1.0}), QuadraticForm({1.0, -1.0})}) {
    auto st = stabilize(s, q);
    auto b = spectral_pair(st, small_config(32, 8));
    CHECK(b.degree_minus == q.index());
    CHECK(b.minus == doctest::Approx(a.minus).epsilon(1e-8));
    CHECK(b.plus == doctest::Approx(a.plus).epsilon(1e-8));
  }
}

TEST_CASE("triangle inequality and sum of jets") {
  auto f = trig(0.6, 1, 0.0), g = trig(0.4, 2, 1.0);
  auto sf = gfqi_from_base_function(f), sg = gfqi_from_base_function(g);
  auto cfg = small_config(64, 8);
  auto a = spectral_pair(sf, cfg), b = spectral_pair(sg, cfg), ab = spectral_pair(oplus(sf, sg), cfg);
  CHECK(ab.plus <= a.plus + b.plus + 1e-9);
  CHECK(ab.minus <= a.minus + b.plus + 1e-9);
  double mx = -1e9, mn = 1e9;
  for (int i = 0; i < 4096; ++i) {
    const double q = i / 4096.0;
    mx = std::max(mx, f(q) + g(q));
    mn = std::min(mn, f(q) + g(q));
  }
  CHECK(ab.plus == doctest::Approx(mx).epsilon(1e-6));
  CHECK(ab.minus == doctest::Approx(mn).epsilon(1e-6));
}

TEST_CASE("spectrality, comparison and pinching") {
  auto s = gfqi_from_base_function(trig(0.8, 1, 0.5));
  auto cfg = small_config(64, 8);
  auto sp = spectral_pair(s, cfg);
  auto spec = spectrum(s, {.n_q = 64, .resolution = 8});
  auto near = [&](double v) {
    return std::any_of(spec.begin(), spec.end(), [&](double c) { return std::fabs(c - v) <= sp.tol_spec; });
  };
  CHECK(near(sp.minus));
  CHECK(near(sp.plus));
  for (double q : {0.0, 0.3, 0.61}) {
    const double lq = fiber_spectral_value(s, q, cfg);
    CHECK(sp.minus <= lq + sp.tol_spec);
    CHECK(lq <= sp.plus + sp.tol_spec);
  }
  auto c = gfqi_from_base_function(CircleFunction::constant(-0.25));
  auto pc = spectral_pair(c, cfg);
  REQUIRE(std::fabs(pc.plus - pc.minus) <= pc.tol_spec);
  for (const auto& x : wavefront(c, {.n_q = 32}).points) {
    CHECK(std::fabs(x.z - pc.plus) <= pc.tol_spec);
    CHECK(std::fabs(x.p) <= pc.tol_spec);
  }
}

TEST_CASE("lattice kernels agree bitwise") {
  auto s = oplus(gfqi_from_base_function(trig(0.6, 1, 0.0)), negate(gfqi_from_base_function(trig(0.3, 3, 0.2))));
  LatticeConfig cfg;
  cfg.n_q = 32;
  cfg.fiber_intervals = 8;
  auto box = choose_box(s, cfg);
  CHECK(sample_lattice_serial(s, box.domain) == sample_lattice_parallel(s, box.domain));
}

TEST_CASE("convergence study") {
  auto s = gfqi_from_base_function(trig(1.0, 1, 0.37));
  auto rep = convergence_study(s, {32, 64, 128}, small_config());
  REQUIRE(rep.rows.size() == 3);
  const double e32 = std::fabs(rep.rows[0].raw_plus - 1.0), e128 = std::fabs(rep.rows[2].raw_plus - 1.0);
  CHECK(e128 <= e32);
  for (const auto& r : rep.rows) CHECK(std::fabs(r.raw_plus - 1.0) <= 2 * pi / r.resolution);
  auto k = convergence_study(gfqi_from_base_function(CircleFunction::constant(0.4)), {16, 32}, small_config());
  for (const auto& r : k.rows) {
    CHECK(r.raw_minus == doctest::Approx(0.4));
    CHECK(r.raw_plus == doctest::Approx(0.4));
  }
}
