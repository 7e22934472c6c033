#include <cmath>
#include <memory>
#include <numbers>
#include <random>

#include "doctest.h"
#include "legspec/error.hpp"
#include "legspec/flow.hpp"
#include "legspec/grid.hpp"

using namespace legspec;
constexpr double pi = std::numbers::pi;

namespace {

/// Plain RK4 for q' = h_p, p' = -h_q on T*S^1 plus the action integral z' = h - p h_p,
/// with derivatives by central differences.
template <class H>
JetPoint symplectic_oracle(H h, JetPoint x, double t1, int steps) {
  const double e = 1e-6, dt = t1 / steps;
  auto f = [&](double t, const JetPoint& y) {
    const double hp = (h(t, y.q, y.p + e) - h(t, y.q, y.p - e)) / (2 * e);
    const double hq = (h(t, y.q + e, y.p) - h(t, y.q - e, y.p)) / (2 * e);
    return JetPoint{hp, -hq, h(t, y.q, y.p) - y.p * hp};
  };
  for (int s = 0; s < steps; ++s) {
    const double t = s * dt;
    const auto k1 = f(t, x);
    const auto k2 = f(t + dt / 2, {x.q + dt / 2 * k1.q, x.p + dt / 2 * k1.p, 0});
    const auto k3 = f(t + dt / 2, {x.q + dt / 2 * k2.q, x.p + dt / 2 * k2.p, 0});
    const auto k4 = f(t + dt, {x.q + dt * k3.q, x.p + dt * k3.p, 0});
    x.q += dt / 6 * (k1.q + 2 * k2.q + 2 * k3.q + k4.q);
    x.p += dt / 6 * (k1.p + 2 * k2.p + 2 * k3.p + k4.p);
    x.z += dt / 6 * (k1.z + 2 * k2.z + 2 * k3.z + k4.z);
  }
  return x;
}

/// alpha at phi(x) applied to dphi(v) for v spanning ker alpha at x, by central differences.
double contact_residual(const JetMap& m, const JetPoint& x) {
  const double e = 1e-6;
  const JetPoint y = m.apply(x);
  auto alpha_of_push = [&](double vq, double vp, double vz) {
    const JetPoint a = m.apply({x.q + e * vq, x.p + e * vp, x.z + e * vz});
    const JetPoint b = m.apply({x.q - e * vq, x.p - e * vp, x.z - e * vz});
    return ((a.z - b.z) + y.p * (a.q - b.q)) / (2 * e);
  };
  return std::max(std::fabs(alpha_of_push(0, 1, 0)), std::fabs(alpha_of_push(1, 0, -x.p)));
}

}  // namespace

TEST_CASE("vector field satisfies the contact equations") {
  const auto h = ContactHamiltonian::parse("(1 + 0.3*sin(2*pi*z))*cos(2*pi*q)*p + 0.2*p^2*sin(2*pi*z)");
  CHECK(h.cls() == HamiltonianClass::general);
  CHECK(h.flags().z_periodic);
  std::mt19937_64 rng(4);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  const double e = 1e-6;
  for (int k = 0; k < 50; ++k) {
    const double q = u(rng), p = 2 * u(rng), z = u(rng);
    const auto x = contact_vector_field(h, 0.0, q, p, z);
    const double hv = h(0, q, p, z);
    const double hq = (h(0, q + e, p, z) - h(0, q - e, p, z)) / (2 * e);
    const double hp = (h(0, q, p + e, z) - h(0, q, p - e, z)) / (2 * e);
    const double hz = (h(0, q, p, z + e) - h(0, q, p, z - e)) / (2 * e);
    // alpha(X) = H
    CHECK(std::fabs(x[2] + p * x[0] - hv) < 1e-12);
    // i_X dalpha = dH(R) alpha - dH, compared in the dq and dp components
    CHECK(std::fabs(x[1] - (hz * p - hq)) < 1e-6);
    CHECK(std::fabs(-x[0] - (-hp)) < 1e-6);
  }
}

TEST_CASE("classification and validation of Hamiltonians") {
  CHECK(ContactHamiltonian::parse("2.5").cls() == HamiltonianClass::constant);
  CHECK(ContactHamiltonian::parse("sin(2*pi*q)").cls() == HamiltonianClass::base_function);
  CHECK(ContactHamiltonian::parse("p^2").cls() == HamiltonianClass::momentum);
  CHECK(ContactHamiltonian::parse("p*cos(2*pi*q)").cls() == HamiltonianClass::lifted);
  CHECK(ContactHamiltonian::parse("t*p").cls() == HamiltonianClass::lifted);
  CHECK_THROWS_AS(ContactHamiltonian::parse("q"), InvalidInput);
  CHECK_FALSE(ContactHamiltonian::parse("z*p").flags().z_periodic);
  CHECK_THROWS_AS(ContactHamiltonian::parse("p^2", 3.0), InvalidInput);
  CHECK(ContactHamiltonian::parse("plateau(p, 1, 2)", 2.0).flags().p_support_radius == 2.0);
  CHECK_THROWS_AS(lift_hamiltonian("z + p"), InvalidInput);
}

TEST_CASE("flows of constant and base-function Hamiltonians are closed form") {
  const auto c = std::make_shared<ContactHamiltonian>(ContactHamiltonian::parse("1.75"));
  HamiltonianFlowMap reeb_flow(c, 0.0, 0.4);
  const JetPoint x{0.3, -0.7, 0.2};
  const auto y = reeb_flow.apply(x);
  CHECK(y.z == doctest::Approx(0.2 + 0.7).epsilon(1e-12));
  CHECK(y.p == doctest::Approx(-0.7));

  const auto f = std::make_shared<ContactHamiltonian>(ContactHamiltonian::parse("0.3*sin(2*pi*q) + 0.1*cos(4*pi*q)"));
  const double t = 0.8;
  HamiltonianFlowMap fl(f, 0.0, t);
  TranslationMap tr(f->base_function().scaled(t));
  for (double q : {0.0, 0.13, 0.5, 0.77}) {
    const auto a = fl.apply({q, 0.4, -0.1});
    const auto b = tr.apply({q, 0.4, -0.1});
    CHECK(std::fabs(a.q - b.q) < 1e-12);
    CHECK(std::fabs(a.p - b.p) < 1e-9);
    CHECK(std::fabs(a.z - b.z) < 1e-9);
  }
}

TEST_CASE("RK4 reproduces the momentum flow") {
  const auto h = std::make_shared<ContactHamiltonian>(ContactHamiltonian::parse("0.5*p^2*plateau(p, 1.5, 2.5)", 2.5));
  MomentumFlowMap exact(h->momentum_profile(3.0), 0.9);
  HamiltonianFlowMap rk(h, 0.0, 0.9);
  for (double p : {-2.2, -1.0, 0.0, 0.4, 1.8, 2.6}) {
    const JetPoint x{0.2, p, 0.3};
    const auto a = exact.apply(x), b = rk.apply(x);
    CHECK(std::fabs(a.q - b.q) < 1e-9);
    CHECK(std::fabs(a.p - b.p) < 1e-12);
    CHECK(std::fabs(a.z - b.z) < 1e-9);
  }
}

TEST_CASE("lifted flows intertwine with the symplectic flow downstairs") {
  const std::string text = "0.4*cos(2*pi*q)*plateau(p, 1, 2) + 0.3*t*p^2*plateau(p, 1, 2)";
  const auto h = std::make_shared<ContactHamiltonian>(lift_hamiltonian(text, 2.0));
  const auto e = Expression::parse(text);
  HamiltonianFlowMap rk(h, 0.0, 1.0);
  std::mt19937_64 rng(9);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (int k = 0; k < 20; ++k) {
    const JetPoint x{u(rng), 1.5 * u(rng), u(rng)};
    const auto a = rk.apply(x);
    const auto b = symplectic_oracle([&](double t, double q, double p) { return e(t, q, p, 0); }, x, 1.0, 4000);
    CHECK(std::fabs(a.q - b.q) < 1e-6);
    CHECK(std::fabs(a.p - b.p) < 1e-6);
    CHECK(std::fabs(a.z - b.z) < 1e-6);
  }
}

TEST_CASE("flows preserve the contact structure") {
  const auto h = std::make_shared<ContactHamiltonian>(
      ContactHamiltonian::parse("(0.5 + 0.3*sin(2*pi*z))*cos(2*pi*q)*plateau(p, 1, 2) + 0.2*p^2*plateau(p,1,2)"));
  HamiltonianFlowMap rk(h, 0.0, 0.7);
  TranslationMap tr(CircleFunction::from_expression(Expression::parse("0.2*sin(2*pi*q)")));
  MomentumFlowMap mf(ContactHamiltonian::parse("sin(p)").momentum_profile(), 0.5);
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (int k = 0; k < 20; ++k) {
    const JetPoint x{u(rng), 1.2 * u(rng), u(rng)};
    CHECK(contact_residual(rk, x) < 1e-6);
    CHECK(contact_residual(tr, x) < 1e-7);
    CHECK(contact_residual(mf, x) < 1e-7);
  }
}

TEST_CASE("finite-time blow-up is reported") {
  // Linear in p: z is frozen and p' = 0.6 pi cos(2 pi z) p^2 explodes.
  const auto h = std::make_shared<ContactHamiltonian>(ContactHamiltonian::parse("0.3*sin(2*pi*z)*p"));
  HamiltonianFlowMap rk(h, 0.0, 2.0);
  std::vector<JetPoint> pts{{0.1, 0.5, 0.0}, {0.4, -1.06, -0.432}};
  CHECK_THROWS_AS(rk.apply_all(pts), PipelineError);
}

TEST_CASE("maps commute with deck translation") {
  const auto h = std::make_shared<ContactHamiltonian>(ContactHamiltonian::parse("cos(2*pi*q)*p + 0.1*p^2"));
  HamiltonianFlowMap rk(h, 0.0, 0.5);
  const auto a = rk.apply({0.3, 0.5, 0.0}), b = rk.apply({1.3, 0.5, 0.0});
  CHECK(std::fabs(b.q - a.q - 1.0) < 1e-12);
  CHECK(std::fabs(b.z - a.z) < 1e-12);
}

TEST_CASE("parallel batch map matches the serial reference") {
  const auto h = std::make_shared<ContactHamiltonian>(ContactHamiltonian::parse("sin(2*pi*(q - t))*p + 0.3*p^2"));
  HamiltonianFlowMap rk(h, 0.0, 1.0);
  std::vector<JetPoint> a, b;
  for (int i = 0; i < 500; ++i) a.push_back({i / 500.0, std::sin(i * 0.1), 0.0});
  b = a;
  rk.apply_all(a);
  rk.apply_all_serial(b);
  for (std::size_t i = 0; i < a.size(); ++i) {
    CHECK(a[i].q == b[i].q);
    CHECK(a[i].z == b[i].z);
  }
}

TEST_CASE("front flow: guard, defect and image of a graph") {
  const auto h = ContactHamiltonian::parse("0.25*sin(2*pi*q)");
  auto front = jet_front([](double q) { return 0.1 * std::cos(2 * pi * q); },
                         [](double q) { return -0.2 * pi * std::sin(2 * pi * q); }, 256);
  CHECK_THROWS_AS(flow(h, front, 0.0, 1.0, 2), InvalidInput);
  const auto out = flow(h, front, 0.0, 1.0);
  const auto expect = jet_front([](double q) { return 0.1 * std::cos(2 * pi * q) + 0.25 * std::sin(2 * pi * q); },
                                [](double q) { return -0.2 * pi * std::sin(2 * pi * q) + 0.5 * pi * std::cos(2 * pi * q); },
                                256);
  CHECK(hausdorff_distance(out, expect) < 1e-9);
  CHECK(legendrian_defect(out) < 1e-3);

  front.tol_leg = 1e-12;
  const auto g = ContactHamiltonian::parse("0.5*p^2 + cos(2*pi*q)*p");
  CHECK_THROWS_AS(flow(g, front, 0.0, 1.0), PipelineError);
}

TEST_CASE("zero-section push refines stretched segments") {
  const auto sharp = Expression::parse("0.05*bump(q, 0.5, 0.02)");
  std::vector<std::shared_ptr<const JetMap>> maps{
      std::make_shared<TranslationMap>(CircleFunction::from_expression(sharp))};
  const auto front = push_zero_section(maps, 64);
  CHECK(front.size() > 64);
  const auto fine = jet_front([&](double q) { return sharp(0, q, 0, 0); },
                              [&](double q) { return sharp.jet(0, q, 0, 0).d[1]; }, 4096);
  CHECK(legendrian_defect(front) < 0.05);
  for (const auto& x : front.points) CHECK(std::fabs(x.z - sharp(0, x.q, 0, 0)) < 1e-12);
  CHECK(hausdorff_distance(front, fine) < 0.2);
}

TEST_CASE("displacement bounds dominate observed displacement") {
  const auto h = std::make_shared<ContactHamiltonian>(
      ContactHamiltonian::parse("(0.5 + 0.3*sin(2*pi*z))*cos(2*pi*q)*plateau(p, 1, 2)", 2.0));
  HamiltonianFlowMap rk(h, 0.0, 1.0);
  const auto bound = rk.displacement_bound(1.0);
  std::mt19937_64 rng(2);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (int k = 0; k < 100; ++k) {
    const JetPoint x{u(rng), u(rng), u(rng)};
    const auto y = rk.apply(x);
    CHECK(std::fabs(y.z - x.z) <= bound.dz);
    CHECK(std::fabs(y.p - x.p) <= bound.dp);
  }
}
