#include "legspec/grid.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>
#include <string>

#include "legspec/error.hpp"

namespace legspec {

double wrap_unit(double q) {
  double r = q - std::floor(q);
  return r >= 1.0 ? 0.0 : r;
}

double circle_distance(double a, double b) {
  double d = std::fabs(wrap_unit(a) - wrap_unit(b));
  return std::min(d, 1.0 - d);
}

CircleGrid::CircleGrid(int n) : n_(n) {
  if (n < 8) throw InvalidInput("CircleGrid needs at least 8 points, got " + std::to_string(n));
}

int CircleGrid::wrap(long long i) const noexcept {
  long long r = i % n_;
  return static_cast<int>(r < 0 ? r + n_ : r);
}

std::vector<double> CircleGrid::points() const {
  std::vector<double> out(n_);
  for (int i = 0; i < n_; ++i) out[i] = static_cast<double>(i) / n_;
  return out;
}

std::size_t ProductDomain::fiber_cardinality() const noexcept {
  std::size_t c = 1;
  for (const auto& ax : fiber_axes) c *= ax.size();
  return c;
}

void ProductDomain::fiber_indices(std::size_t k, std::span<int> out) const {
  for (std::size_t j = 0; j < fiber_axes.size(); ++j) {
    out[j] = static_cast<int>(k % fiber_axes[j].size());
    k /= fiber_axes[j].size();
  }
}

void ProductDomain::fiber_point(std::size_t k, std::span<double> out) const {
  for (std::size_t j = 0; j < fiber_axes.size(); ++j) {
    out[j] = fiber_axes[j][k % fiber_axes[j].size()];
    k /= fiber_axes[j].size();
  }
}

ScalarField::ScalarField(ProductDomain domain, std::vector<double> values)
    : domain_(std::move(domain)), values_(std::move(values)) {
  if (values_.size() != domain_.cardinality())
    throw InvalidInput("ScalarField: value count does not match domain cardinality");
  for (std::size_t i = 0; i < values_.size(); ++i)
    if (!std::isfinite(values_[i]))
      throw InvalidInput("ScalarField: non-finite value at index " + std::to_string(i));
}

double ScalarField::min() const { return *std::min_element(values_.begin(), values_.end()); }
double ScalarField::max() const { return *std::max_element(values_.begin(), values_.end()); }

void ScalarField::write_csv(std::ostream& os) const {
  const int n = domain_.base.size();
  const int d = domain_.fiber_dim();
  std::vector<double> e(d);
  os << "q";
  for (int j = 0; j < d; ++j) os << ",e" << j;
  os << ",value\n";
  os.precision(17);
  for (std::size_t k = 0; k < domain_.fiber_cardinality(); ++k) {
    domain_.fiber_point(k, e);
    for (int i = 0; i < n; ++i) {
      os << domain_.base.point(i);
      for (double x : e) os << ',' << x;
      os << ',' << values_[k * n + i] << '\n';
    }
  }
}

ScalarField sample_function(const std::function<double(double)>& f, const CircleGrid& grid) {
  std::vector<double> v(grid.size());
  for (int i = 0; i < grid.size(); ++i) {
    v[i] = f(grid.point(i));
    if (!std::isfinite(v[i]))
      throw InvalidInput("sample_function: non-finite value at index " + std::to_string(i));
  }
  return ScalarField(ProductDomain{grid, {}}, std::move(v));
}

namespace {

// Three-point derivative weights on a possibly non-uniform stencil.
void interior_weights(double xm, double x0, double xp, double w[3]) {
  const double h1 = x0 - xm, h2 = xp - x0;
  w[0] = -h2 / (h1 * (h1 + h2));
  w[1] = (h2 - h1) / (h1 * h2);
  w[2] = h1 / (h2 * (h1 + h2));
}

void left_weights(double x0, double x1, double x2, double w[3]) {
  const double h1 = x1 - x0, h2 = x2 - x1;
  w[0] = -(2 * h1 + h2) / (h1 * (h1 + h2));
  w[1] = (h1 + h2) / (h1 * h2);
  w[2] = -h1 / (h2 * (h1 + h2));
}

}  // namespace

std::vector<ScalarField> grad_fd(const ScalarField& field) {
  const auto& dom = field.domain();
  const int n = dom.base.size();
  const auto vals = field.values();
  const std::size_t nf = dom.fiber_cardinality();
  std::vector<ScalarField> out;

  {
    std::vector<double> g(vals.size());
    const double inv = 0.5 * n;
    for (std::size_t k = 0; k < nf; ++k)
      for (int i = 0; i < n; ++i)
        g[k * n + i] = (vals[k * n + dom.base.wrap(i + 1)] - vals[k * n + dom.base.wrap(i - 1)]) * inv;
    out.emplace_back(dom, std::move(g));
  }

  std::size_t stride = n;
  for (int j = 0; j < dom.fiber_dim(); ++j) {
    const auto& ax = dom.fiber_axes[j];
    const int m = static_cast<int>(ax.size());
    if (m < 2) throw InvalidInput("grad_fd: fiber axis needs at least 2 points");
    std::vector<double> g(vals.size());
    for (std::size_t v = 0; v < vals.size(); ++v) {
      const int idx = static_cast<int>((v / stride) % m);
      auto at = [&](int i) { return vals[v + (static_cast<long long>(i) - idx) * static_cast<long long>(stride)]; };
      double w[3];
      if (m == 2) {
        g[v] = (at(1) - at(0)) / (ax[1] - ax[0]);
      } else if (idx == 0) {
        left_weights(ax[0], ax[1], ax[2], w);
        g[v] = w[0] * at(0) + w[1] * at(1) + w[2] * at(2);
      } else if (idx == m - 1) {
        left_weights(-ax[m - 1], -ax[m - 2], -ax[m - 3], w);
        g[v] = -(w[0] * at(m - 1) + w[1] * at(m - 2) + w[2] * at(m - 3));
      } else {
        interior_weights(ax[idx - 1], ax[idx], ax[idx + 1], w);
        g[v] = w[0] * at(idx - 1) + w[1] * at(idx) + w[2] * at(idx + 1);
      }
    }
    out.emplace_back(dom, std::move(g));
    stride *= m;
  }
  return out;
}

}  // namespace legspec
