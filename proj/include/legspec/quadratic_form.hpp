#pragma once

#include <span>
#include <string>
#include <vector>

namespace legspec {

/// Diagonal nondegenerate quadratic form Q(e) = sum c_j e_j^2.
class QuadraticForm {
 public:
  QuadraticForm() = default;
  explicit QuadraticForm(std::vector<double> coefficients);

  int dim() const noexcept { return static_cast<int>(c_.size()); }
  /// Negative index d_-.
  int index() const noexcept;
  const std::vector<double>& coefficients() const noexcept { return c_; }
  double operator()(std::span<const double> e) const;

  QuadraticForm operator-() const;
  QuadraticForm oplus(const QuadraticForm& other) const;
  std::string describe() const;

  bool operator==(const QuadraticForm&) const = default;

 private:
  std::vector<double> c_;
};

}  // namespace legspec
