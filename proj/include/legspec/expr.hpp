#pragma once

#include <array>
#include <memory>
#include <string>
#include <string_view>
#include <vector>

namespace legspec {

/// Value together with its partials in (t, q, p, z).
struct Jet4 {
  double v = 0.0;
  std::array<double, 4> d{};
};

enum class Var : int { t = 0, q = 1, p = 2, z = 3 };

/// Compiled symbolic expression over t, q, p, z.
///
/// Grammar: numbers, the variables t q p z, the constant pi, binary + - * / ^,
/// unary minus, parentheses, and the functions sin cos exp log sqrt tanh abs,
/// bump(x, center, width) (smooth bump equal to 1 at center, 0 outside the
/// width) and plateau(x, inner, outer) (1 for |x| <= inner, smooth decay to 0
/// at |x| = outer).
class Expression {
 public:
  static Expression parse(std::string_view text);
  static Expression constant(double c);

  double operator()(double t, double q, double p, double z) const;
  /// Value and exact gradient by forward-mode differentiation.
  Jet4 jet(double t, double q, double p, double z) const;

  bool uses(Var v) const noexcept { return uses_[static_cast<int>(v)]; }
  const std::string& text() const noexcept { return text_; }

  enum class Op : unsigned char {
    constant, variable, add, sub, mul, div, pow, neg,
    sin, cos, exp, log, sqrt, tanh, abs, bump, plateau
  };
  struct Instr {
    Op op;
    double value = 0.0;  // constant, or variable index
  };

 private:
  std::string text_;
  std::shared_ptr<const std::vector<Instr>> program_;
  std::array<bool, 4> uses_{};
  int max_stack_ = 0;

  template <class T>
  T run(const T* vars) const;
};

/// Smooth bump exp(1 - 1/(1-u^2)) on |u| < 1, and its derivative.
double bump_profile(double u);
double bump_profile_derivative(double u);
/// Smooth monotone step: 0 for u <= 0, 1 for u >= 1.
double smooth_step(double u);
double smooth_step_derivative(double u);

}  // namespace legspec
