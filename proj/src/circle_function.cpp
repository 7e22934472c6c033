#include "legspec/circle_function.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "legspec/error.hpp"

namespace legspec {

namespace {
constexpr double two_pi = 2.0 * std::numbers::pi;
}

CircleFunction CircleFunction::constant(double c) {
  return {[c](double) { return c; }, [](double) { return 0.0; }, std::to_string(c)};
}

CircleFunction CircleFunction::from_expression(const Expression& e) {
  if (e.uses(Var::t) || e.uses(Var::p) || e.uses(Var::z))
    throw InvalidInput("base function '" + e.text() + "' may depend on q only");
  return {[e](double q) { return e(0.0, q, 0.0, 0.0); },
          [e](double q) { return e.jet(0.0, q, 0.0, 0.0).d[1]; }, e.text()};
}

CircleFunction CircleFunction::scaled(double s) const {
  auto v = value;
  auto d = derivative;
  return {[v, s](double q) { return s * v(q); }, [d, s](double q) { return s * d(q); },
          std::to_string(s) + "*(" + label + ")"};
}

CircleFunction CircleFunction::plus(const CircleFunction& g) const {
  auto v1 = value, d1 = derivative, v2 = g.value, d2 = g.derivative;
  return {[v1, v2](double q) { return v1(q) + v2(q); }, [d1, d2](double q) { return d1(q) + d2(q); },
          "(" + label + ")+(" + g.label + ")"};
}

double CircleFunction::sup_abs(int n) const {
  double m = 0.0;
  for (int i = 0; i < n; ++i) m = std::max(m, std::fabs(value(static_cast<double>(i) / n)));
  return m;
}

double CircleFunction::sup_abs_derivative(int n) const {
  double m = 0.0;
  for (int i = 0; i < n; ++i) m = std::max(m, std::fabs(derivative(static_cast<double>(i) / n)));
  return m;
}

double TrigPolynomial::operator()(double q) const {
  double s = a0;
  for (std::size_t k = 0; k < a.size(); ++k) {
    const double w = two_pi * static_cast<double>(k + 1) * q;
    s += a[k] * std::cos(w) + b[k] * std::sin(w);
  }
  return s;
}

double TrigPolynomial::derivative(double q) const {
  double s = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) {
    const double f = two_pi * static_cast<double>(k + 1);
    s += f * (-a[k] * std::sin(f * q) + b[k] * std::cos(f * q));
  }
  return s;
}

double TrigPolynomial::second_derivative(double q) const {
  double s = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) {
    const double f = two_pi * static_cast<double>(k + 1);
    s -= f * f * (a[k] * std::cos(f * q) + b[k] * std::sin(f * q));
  }
  return s;
}

double TrigPolynomial::lipschitz_bound() const {
  double s = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k)
    s += two_pi * static_cast<double>(k + 1) * std::hypot(a[k], b[k]);
  return s;
}

namespace {

double polish_extremum(const TrigPolynomial& f, double sign) {
  const int n = 4096;
  int best = 0;
  double bv = sign * f(0.0);
  for (int i = 1; i < n; ++i) {
    const double v = sign * f(static_cast<double>(i) / n);
    if (v > bv) {
      bv = v;
      best = i;
    }
  }
  double q = static_cast<double>(best) / n;
  for (int it = 0; it < 30; ++it) {
    const double h = f.second_derivative(q);
    if (h == 0.0) break;
    const double step = f.derivative(q) / h;
    if (std::fabs(step) > 1.0 / n) break;
    q -= step;
    if (std::fabs(step) < 1e-15) break;
  }
  return std::max(bv, sign * f(q)) * sign;
}

}  // namespace

double TrigPolynomial::min_value() const { return polish_extremum(*this, -1.0); }
double TrigPolynomial::max_value() const { return polish_extremum(*this, 1.0); }

CircleFunction TrigPolynomial::to_function() const {
  const TrigPolynomial self = *this;
  std::string label = "trig(deg " + std::to_string(degree()) + ")";
  return {[self](double q) { return self(q); }, [self](double q) { return self.derivative(q); }, label};
}

TrigPolynomial TrigPolynomial::random(std::mt19937_64& rng, int degree, double amplitude) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  TrigPolynomial f;
  f.a0 = u(rng);
  f.a.resize(degree);
  f.b.resize(degree);
  double total = std::fabs(f.a0);
  for (int k = 0; k < degree; ++k) {
    f.a[k] = u(rng);
    f.b[k] = u(rng);
    total += std::hypot(f.a[k], f.b[k]);
  }
  const double s = amplitude * std::uniform_real_distribution<double>(0.5, 1.0)(rng) / total;
  f.a0 *= s;
  for (int k = 0; k < degree; ++k) {
    f.a[k] *= s;
    f.b[k] *= s;
  }
  return f;
}

}  // namespace legspec
