#pragma once

#include <functional>
#include <random>
#include <string>
#include <vector>

#include "legspec/expr.hpp"

namespace legspec {

/// Smooth 1-periodic function on S^1 with its derivative.
struct CircleFunction {
  std::function<double(double)> value;
  std::function<double(double)> derivative;
  std::string label;

  double operator()(double q) const { return value(q); }

  static CircleFunction constant(double c);
  /// Expression in q only (t, p, z are rejected).
  static CircleFunction from_expression(const Expression& e);
  CircleFunction scaled(double s) const;
  CircleFunction plus(const CircleFunction& g) const;

  /// Sup norms of f and f' estimated on `n` samples.
  double sup_abs(int n = 2048) const;
  double sup_abs_derivative(int n = 2048) const;
};

/// a0 + sum_k a_k cos(2 pi k q) + b_k sin(2 pi k q).
struct TrigPolynomial {
  double a0 = 0.0;
  std::vector<double> a, b;

  double operator()(double q) const;
  double derivative(double q) const;
  double second_derivative(double q) const;
  int degree() const noexcept { return static_cast<int>(a.size()); }

  /// Upper bound on |f'| from the coefficients.
  double lipschitz_bound() const;
  /// Global min / max by dense sampling followed by Newton polishing.
  double min_value() const;
  double max_value() const;

  CircleFunction to_function() const;

  /// Random polynomial of the given degree with sup-norm at most `amplitude`.
  static TrigPolynomial random(std::mt19937_64& rng, int degree, double amplitude);
};

}  // namespace legspec
