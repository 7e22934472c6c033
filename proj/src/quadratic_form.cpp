#include "legspec/quadratic_form.hpp"

#include <cmath>
#include <sstream>

#include "legspec/error.hpp"

namespace legspec {

QuadraticForm::QuadraticForm(std::vector<double> coefficients) : c_(std::move(coefficients)) {
  for (double c : c_)
    if (!(std::isfinite(c) && c != 0.0)) throw InvalidInput("quadratic form is degenerate: " + describe());
}

int QuadraticForm::index() const noexcept {
  int k = 0;
  for (double c : c_) k += c < 0.0;
  return k;
}

double QuadraticForm::operator()(std::span<const double> e) const {
  double s = 0.0;
  for (std::size_t j = 0; j < c_.size(); ++j) s += c_[j] * e[j] * e[j];
  return s;
}

QuadraticForm QuadraticForm::operator-() const {
  auto c = c_;
  for (auto& x : c) x = -x;
  return QuadraticForm(std::move(c));
}

QuadraticForm QuadraticForm::oplus(const QuadraticForm& other) const {
  auto c = c_;
  c.insert(c.end(), other.c_.begin(), other.c_.end());
  return QuadraticForm(std::move(c));
}

std::string QuadraticForm::describe() const {
  std::ostringstream os;
  os << "diag(";
  for (std::size_t j = 0; j < c_.size(); ++j) os << (j ? "," : "") << c_[j];
  os << ")";
  return os.str();
}

}  // namespace legspec
