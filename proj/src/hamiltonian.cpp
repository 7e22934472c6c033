#include "legspec/hamiltonian.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "legspec/error.hpp"

namespace legspec {

std::string to_string(HamiltonianClass c) {
  switch (c) {
    case HamiltonianClass::constant: return "constant";
    case HamiltonianClass::base_function: return "base_function";
    case HamiltonianClass::momentum: return "momentum";
    case HamiltonianClass::lifted: return "lifted";
    case HamiltonianClass::general: return "general";
  }
  return "?";
}

ContactHamiltonian::ContactHamiltonian(Expression e, std::optional<double> p_support_radius) : e_(std::move(e)) {
  const bool uq = e_.uses(Var::q), up = e_.uses(Var::p), uz = e_.uses(Var::z), ut = e_.uses(Var::t);
  flags_.time_dependent = ut;
  flags_.z_independent = !uz;
  if (uz) cls_ = HamiltonianClass::general;
  else if (ut || (uq && up)) cls_ = HamiltonianClass::lifted;
  else if (up) cls_ = HamiltonianClass::momentum;
  else if (uq) cls_ = HamiltonianClass::base_function;
  else cls_ = HamiltonianClass::constant;

  // Sampled verification of the structural flags.
  std::mt19937_64 rng(0x5eed);
  std::uniform_real_distribution<double> u(0.0, 1.0), pd(-6.0, 6.0), zd(-3.0, 3.0);
  bool periodic = true;
  for (int k = 0; k < 200; ++k) {
    const double t = u(rng), q = u(rng), p = pd(rng), z = zd(rng);
    const double h0 = e_(t, q, p, z);
    if (!std::isfinite(h0)) throw InvalidInput("Hamiltonian '" + text() + "' is not finite at a sample point");
    if (std::fabs(e_(t, q + 1.0, p, z) - h0) > 1e-9 * std::max(1.0, std::fabs(h0)))
      throw InvalidInput("Hamiltonian '" + text() + "' is not 1-periodic in q");
    if (std::fabs(e_(t, q, p, z + 1.0) - h0) > 1e-9 * std::max(1.0, std::fabs(h0))) periodic = false;
    if (flags_.z_independent && std::fabs(e_(t, q, p, 0.0) - h0) > 1e-12)
      throw InvalidInput("Hamiltonian '" + text() + "' flagged z-independent but varies in z");
  }
  flags_.z_periodic = periodic;
  if (p_support_radius) {
    const double r = *p_support_radius;
    for (int k = 0; k < 400; ++k) {
      const double side = u(rng) < 0.5 ? -1.0 : 1.0;
      const double p = side * (r + 1e-9 + 20.0 * u(rng));
      if (e_(u(rng), u(rng), p, zd(rng)) != 0.0) {
        std::ostringstream os;
        os << "Hamiltonian '" << text() << "' does not vanish at |p| = " << std::fabs(p) << " > declared radius " << r;
        throw InvalidInput(os.str());
      }
    }
    flags_.p_support_radius = r;
  }
}

ContactHamiltonian ContactHamiltonian::parse(const std::string& text, std::optional<double> p_support_radius) {
  return ContactHamiltonian(Expression::parse(text), p_support_radius);
}

double ContactHamiltonian::constant_value() const {
  if (cls_ != HamiltonianClass::constant) throw UnsupportedClass("'" + text() + "' is not constant");
  return e_(0, 0, 0, 0);
}

CircleFunction ContactHamiltonian::base_function() const {
  if (cls_ != HamiltonianClass::base_function && cls_ != HamiltonianClass::constant)
    throw UnsupportedClass("'" + text() + "' is not a function of q alone");
  const Expression e = e_;
  return {[e](double q) { return e(0, q, 0, 0); }, [e](double q) { return e.jet(0, q, 0, 0).d[1]; }, text()};
}

MomentumProfile ContactHamiltonian::momentum_profile(double p_range) const {
  if (cls_ != HamiltonianClass::momentum && cls_ != HamiltonianClass::constant)
    throw UnsupportedClass("'" + text() + "' is not a function of p alone");
  const Expression e = e_;
  MomentumProfile m;
  m.h = [e](double p) { return e(0, 0, p, 0); };
  m.dh = [e](double p) { return e.jet(0, 0, p, 0).d[2]; };
  m.label = text();
  const int n = 20001;
  for (int k = 0; k < n; ++k) {
    const double p = -p_range + 2.0 * p_range * k / (n - 1);
    m.sup_h = std::max(m.sup_h, std::fabs(m.h(p)));
    m.sup_dh = std::max(m.sup_dh, std::fabs(m.dh(p)));
  }
  return m;
}

double ContactHamiltonian::gradient_bound(double p_range) const {
  double g = 0.0;
  const int nq = 16, np = 64, nz = flags_.z_independent ? 1 : 8, nt = flags_.time_dependent ? 5 : 1;
  for (int it = 0; it < nt; ++it)
    for (int iq = 0; iq < nq; ++iq)
      for (int ip = 0; ip < np; ++ip)
        for (int iz = 0; iz < nz; ++iz) {
          const double t = nt == 1 ? 0.0 : static_cast<double>(it) / (nt - 1);
          const auto j = e_.jet(t, static_cast<double>(iq) / nq, -p_range + 2.0 * p_range * ip / (np - 1),
                                static_cast<double>(iz) / nz);
          g = std::max(g, std::sqrt(j.d[1] * j.d[1] + j.d[2] * j.d[2] + j.d[3] * j.d[3]));
        }
  return g;
}

std::array<double, 3> contact_vector_field(const ContactHamiltonian& h, double t, double q, double p, double z) {
  const Jet4 j = h.jet(t, q, p, z);
  const double hq = j.d[1], hp = j.d[2], hz = j.d[3];
  return {hp, -hq + p * hz, j.v - p * hp};
}

ContactHamiltonian lift_hamiltonian(const std::string& h, std::optional<double> p_support_radius) {
  auto e = Expression::parse(h);
  if (e.uses(Var::z)) throw InvalidInput("lifted Hamiltonian '" + h + "' must not depend on z");
  return ContactHamiltonian(std::move(e), p_support_radius);
}

}  // namespace legspec
