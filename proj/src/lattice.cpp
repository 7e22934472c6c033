#include "legspec/lattice.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "legspec/error.hpp"

namespace legspec {

BoxChoice choose_box(const Gfqi& s, const LatticeConfig& cfg) {
  const int d = s.fiber_dim();
  if (d > cfg.d_max)
    throw PipelineError("fiber dimension " + std::to_string(d) + " exceeds d_max " + std::to_string(cfg.d_max));
  const auto& bounds = s.bounds();
  const auto& c = s.form().coefficients();
  BoxChoice box;
  box.r_plus = bounds.core_radius + cfg.margin;
  const int intervals = std::max(2, cfg.fiber_intervals + (cfg.fiber_intervals & 1));
  std::vector<double> core(intervals + 1);
  for (int k = 0; k <= intervals; ++k) core[k] = box.r_plus * (2.0 * k / intervals - 1.0);
  core[intervals / 2] = 0.0;

  double pos_top = 0.0, neg_core = 0.0, neg_min = 1e300;
  for (double cj : c) {
    if (cj > 0) {
      pos_top += cj * box.r_plus * box.r_plus;
    } else {
      neg_core += -cj * box.r_plus * box.r_plus;
      neg_min = std::min(neg_min, -cj);
    }
  }
  if (s.index() > 0) {
    box.b = -neg_core - bounds.perturbation - 1.0;
    const double need = (pos_top + bounds.perturbation - box.b + 1.0) / neg_min;
    box.r_minus = std::max(box.r_plus * 1.5, std::sqrt(need));
  } else {
    box.b_from_samples = true;
    box.r_minus = box.r_plus;
  }

  box.domain.base = CircleGrid(cfg.n_q);
  for (int j = 0; j < d; ++j) {
    if (c[j] > 0) {
      box.domain.fiber_axes.push_back(core);
      continue;
    }
    std::vector<double> axis;
    const int m = std::max(1, cfg.outer_points);
    for (int k = m; k >= 1; --k) axis.push_back(-(box.r_plus + (box.r_minus - box.r_plus) * k / m));
    axis.insert(axis.end(), core.begin(), core.end());
    for (int k = 1; k <= m; ++k) axis.push_back(box.r_plus + (box.r_minus - box.r_plus) * k / m);
    box.domain.fiber_axes.push_back(std::move(axis));
  }
  const double cells = static_cast<double>(box.domain.cardinality()) * std::pow(2.0, d + 1);
  if (cells > static_cast<double>(cfg.cell_cap)) {
    std::ostringstream os;
    os << "lattice would have ~" << cells << " cells, above the cap " << cfg.cell_cap;
    throw PipelineError(os.str());
  }
  return box;
}

namespace {

void sample_fiber_point(const Gfqi& s, const ProductDomain& domain, std::size_t k, const std::vector<double>& qs,
                        double* out) {
  const int d = domain.fiber_dim();
  std::vector<double> e(d), dq(qs.size());
  domain.fiber_point(k, e);
  s.eval_slice(e, qs, std::span<double>(out, qs.size()), dq);
}

void check_finite(const std::vector<double>& v) {
  for (std::size_t i = 0; i < v.size(); ++i)
    if (!std::isfinite(v[i])) throw InvalidInput("non-finite Gfqi value at lattice vertex " + std::to_string(i));
}

}  // namespace

std::vector<double> sample_lattice_serial(const Gfqi& s, const ProductDomain& domain) {
  const auto qs = domain.base.points();
  const std::size_t n = qs.size();
  const std::size_t m = domain.fiber_cardinality();
  std::vector<double> values(n * m);
  for (std::size_t k = 0; k < m; ++k) sample_fiber_point(s, domain, k, qs, values.data() + k * n);
  check_finite(values);
  return values;
}

std::vector<double> sample_lattice_parallel(const Gfqi& s, const ProductDomain& domain) {
  const auto qs = domain.base.points();
  const std::size_t n = qs.size();
  const long long m = static_cast<long long>(domain.fiber_cardinality());
  std::vector<double> values(n * m);
  std::string failure;
#pragma omp parallel for schedule(dynamic, 1)
  for (long long k = 0; k < m; ++k) {
    try {
      sample_fiber_point(s, domain, static_cast<std::size_t>(k), qs, values.data() + k * n);
    } catch (const std::exception& ex) {
#pragma omp critical
      if (failure.empty()) failure = ex.what();
    }
  }
  if (!failure.empty()) throw PipelineError("lattice sampling failed: " + failure);
  check_finite(values);
  return values;
}

LatticeSample sample_gfqi(const Gfqi& s, const LatticeConfig& cfg) {
  LatticeSample out;
  out.box = choose_box(s, cfg);
  const auto& dom = out.box.domain;
  try {
    out.values = cfg.parallel ? sample_lattice_parallel(s, dom) : sample_lattice_serial(s, dom);
  } catch (const FoldError& ex) {
    throw PipelineError(std::string("lattice sampling failed: ") + ex.what());
  }
  if (out.box.b_from_samples) out.box.b = *std::min_element(out.values.begin(), out.values.end()) - 1.0;

  const int d = dom.fiber_dim();
  const std::size_t n = dom.base.size();
  const auto& c = s.form().coefficients();
  std::vector<int> idx(d);
  std::vector<double> e(d);
  auto witness = [&](std::size_t k, std::size_t i, const char* what) {
    dom.fiber_point(k, e);
    std::ostringstream os;
    os << "box too small: " << what << " at q=" << dom.base.point(static_cast<long long>(i)) << ", e=[";
    for (int j = 0; j < d; ++j) os << (j ? "," : "") << e[j];
    os << "], S=" << out.values[k * n + i] << ", R+=" << out.box.r_plus << ", R-=" << out.box.r_minus
       << ", b=" << out.box.b;
    throw PipelineError(os.str());
  };
  std::vector<std::size_t> stride(d, n);
  for (int j = 1; j < d; ++j) stride[j] = stride[j - 1] * dom.fiber_axes[j - 1].size();
  for (std::size_t k = 0; k < dom.fiber_cardinality(); ++k) {
    dom.fiber_indices(k, idx);
    for (int j = 0; j < d; ++j) {
      const int last = static_cast<int>(dom.fiber_axes[j].size()) - 1;
      if (idx[j] != 0 && idx[j] != last) continue;
      for (std::size_t i = 0; i < n; ++i) {
        const double v = out.values[k * n + i];
        if (c[j] > 0) {
          const std::size_t inner = idx[j] == 0 ? k + stride[j] / n : k - stride[j] / n;
          if (!(v > out.values[inner * n + i])) witness(k, i, "S not increasing across a positive face");
        } else if (!(v <= out.box.b)) {
          witness(k, i, "negative face not below b");
        }
      }
    }
  }
  return out;
}

double lattice_gradient_bound(const LatticeSample& sample) {
  const auto& dom = sample.box.domain;
  const int d = dom.fiber_dim();
  const std::size_t n = dom.base.size();
  const double h = dom.base.spacing();
  const double r = sample.box.r_plus + 1e-12;
  std::vector<double> axis_max(d + 1, 0.0);
  std::vector<int> idx(d);
  std::size_t stride = n;
  std::vector<std::size_t> strides(d);
  for (int j = 0; j < d; ++j) {
    strides[j] = stride;
    stride *= dom.fiber_axes[j].size();
  }
  for (std::size_t k = 0; k < dom.fiber_cardinality(); ++k) {
    dom.fiber_indices(k, idx);
    bool core = true;
    for (int j = 0; j < d; ++j) core = core && std::fabs(dom.fiber_axes[j][idx[j]]) <= r;
    if (!core) continue;
    for (std::size_t i = 0; i < n; ++i) {
      const std::size_t v = k * n + i;
      const std::size_t w = k * n + (i + 1) % n;
      axis_max[0] = std::max(axis_max[0], std::fabs(sample.values[w] - sample.values[v]) / h);
      for (int j = 0; j < d; ++j) {
        if (idx[j] + 1 >= static_cast<int>(dom.fiber_axes[j].size())) continue;
        const double x1 = dom.fiber_axes[j][idx[j] + 1];
        if (std::fabs(x1) > r) continue;
        const double dx = x1 - dom.fiber_axes[j][idx[j]];
        axis_max[j + 1] =
            std::max(axis_max[j + 1], std::fabs(sample.values[v + strides[j]] - sample.values[v]) / dx);
      }
    }
  }
  double s = 0.0;
  for (double a : axis_max) s += a * a;
  return std::sqrt(s);
}

}  // namespace legspec
