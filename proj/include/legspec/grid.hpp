#pragma once

#include <cstddef>
#include <functional>
#include <iosfwd>
#include <span>
#include <vector>

namespace legspec {

/// Representative of q in [0, 1).
double wrap_unit(double q);

/// Distance on R/Z.
double circle_distance(double a, double b);

/// Uniform sampling of S^1 = R/Z with points q_i = i/n.
class CircleGrid {
 public:
  explicit CircleGrid(int n);

  int size() const noexcept { return n_; }
  double spacing() const noexcept { return 1.0 / n_; }
  int wrap(long long i) const noexcept;
  double point(long long i) const noexcept { return static_cast<double>(wrap(i)) / n_; }
  std::vector<double> points() const;

  bool operator==(const CircleGrid&) const = default;

 private:
  int n_;
};

/// S^1 x (tensor lattice in the fiber). Vertex order: q index fastest, then
/// fiber axis 0, then axis 1, ...
struct ProductDomain {
  CircleGrid base{8};
  std::vector<std::vector<double>> fiber_axes;

  int fiber_dim() const noexcept { return static_cast<int>(fiber_axes.size()); }
  std::size_t fiber_cardinality() const noexcept;
  std::size_t cardinality() const noexcept { return base.size() * fiber_cardinality(); }

  /// Fiber coordinates of flat fiber index `k`.
  void fiber_point(std::size_t k, std::span<double> out) const;
  /// Per-axis indices of flat fiber index `k`.
  void fiber_indices(std::size_t k, std::span<int> out) const;
};

/// Sampled scalar function on a ProductDomain (or on the bare circle when
/// there are no fiber axes).
class ScalarField {
 public:
  ScalarField(ProductDomain domain, std::vector<double> values);

  const ProductDomain& domain() const noexcept { return domain_; }
  std::span<const double> values() const noexcept { return values_; }
  double operator[](std::size_t i) const { return values_[i]; }
  std::size_t size() const noexcept { return values_.size(); }
  double min() const;
  double max() const;

  /// One row per sample: q, fiber coordinates..., value.
  void write_csv(std::ostream& os) const;

 private:
  ProductDomain domain_;
  std::vector<double> values_;
};

ScalarField sample_function(const std::function<double(double)>& f, const CircleGrid& grid);

/// Second-order finite differences, one field per coordinate direction
/// (q first). Periodic in q, one-sided at fiber-axis ends.
std::vector<ScalarField> grad_fd(const ScalarField& field);

}  // namespace legspec
