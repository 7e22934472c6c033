#pragma once

#include <array>
#include <limits>
#include <optional>
#include <random>
#include <string>

#include "legspec/circle_function.hpp"
#include "legspec/expr.hpp"
#include "legspec/jet_map.hpp"

namespace legspec {

/// Structural class, from the variables the expression actually uses.
enum class HamiltonianClass {
  constant,       // H = c
  base_function,  // H = f(q)
  momentum,       // H = h(p)
  lifted,         // H = h(q, p), possibly time-dependent
  general         // depends on z
};

std::string to_string(HamiltonianClass c);

struct HamiltonianFlags {
  bool z_independent = true;
  bool z_periodic = true;
  bool time_dependent = false;
  /// Support inside |p| <= radius; infinity when unbounded (T_f-type generators).
  double p_support_radius = std::numeric_limits<double>::infinity();
};

/// Contact Hamiltonian H(t, q, p, z) on J^1 S^1 given by a symbolic expression.
class ContactHamiltonian {
 public:
  /// Flags are detected from the expression and verified by sampling;
  /// `p_support_radius`, when given, is checked as well.
  explicit ContactHamiltonian(Expression e, std::optional<double> p_support_radius = std::nullopt);
  static ContactHamiltonian parse(const std::string& text, std::optional<double> p_support_radius = std::nullopt);

  double operator()(double t, double q, double p, double z) const { return e_(t, q, p, z); }
  Jet4 jet(double t, double q, double p, double z) const { return e_.jet(t, q, p, z); }

  HamiltonianClass cls() const noexcept { return cls_; }
  const HamiltonianFlags& flags() const noexcept { return flags_; }
  const std::string& text() const noexcept { return e_.text(); }
  const Expression& expression() const noexcept { return e_; }

  /// Value of a constant Hamiltonian.
  double constant_value() const;
  /// f for H = f(q).
  CircleFunction base_function() const;
  /// h for H = h(p), with sup bounds over |p| <= p_range.
  MomentumProfile momentum_profile(double p_range = 50.0) const;

  /// sup |grad H| over [0,1] x [0,1) x [-p_range, p_range] x [0,1), sampled.
  double gradient_bound(double p_range) const;

 private:
  Expression e_;
  HamiltonianClass cls_;
  HamiltonianFlags flags_;
};

/// (qdot, pdot, zdot) = (H_p, -H_q + p H_z, H - p H_p).
std::array<double, 3> contact_vector_field(const ContactHamiltonian& h, double t, double q, double p, double z);

/// H = pi^* h for h(t, q, p); rejects expressions that use z.
ContactHamiltonian lift_hamiltonian(const std::string& h, std::optional<double> p_support_radius = std::nullopt);

}  // namespace legspec
