#include "legspec/critical.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <map>

#include "legspec/error.hpp"
#include "legspec/grid.hpp"
#include "legspec/lattice.hpp"

namespace legspec {

namespace {

std::vector<double> full_gradient(const Gfqi& s, double q, const std::vector<double>& e) {
  std::vector<double> g(e.size() + 1);
  s.gradient(q, e, g);
  return g;
}

}  // namespace

CriticalPoint refine_critical_point(const Gfqi& s, double q, std::vector<double> e, const NewtonOptions& opt) {
  const int n = static_cast<int>(e.size()) + 1;
  auto point = [&](const Eigen::VectorXd& x) {
    std::vector<double> ee(n - 1);
    for (int j = 1; j < n; ++j) ee[j - 1] = x[j];
    return ee;
  };
  Eigen::VectorXd x(n);
  x[0] = q;
  for (int j = 1; j < n; ++j) x[j] = e[j - 1];
  auto grad = [&](const Eigen::VectorXd& y) {
    const auto g = full_gradient(s, y[0], point(y));
    return Eigen::Map<const Eigen::VectorXd>(g.data(), n).eval();
  };
  Eigen::VectorXd g = grad(x);
  CriticalPoint out;
  for (int it = 0; it < opt.max_iter && g.norm() > opt.tol; ++it) {
    Eigen::MatrixXd h(n, n);
    for (int a = 0; a < n; ++a) {
      Eigen::VectorXd xp = x, xm = x;
      xp[a] += opt.fd_step;
      xm[a] -= opt.fd_step;
      h.col(a) = (grad(xp) - grad(xm)) / (2.0 * opt.fd_step);
    }
    h = 0.5 * (h + h.transpose()).eval();
    Eigen::VectorXd step = -h.completeOrthogonalDecomposition().solve(g);
    if (!step.allFinite()) break;
    if (step.norm() > opt.trust) step *= opt.trust / step.norm();
    bool accepted = false;
    for (int k = 0; k < 6; ++k) {
      Eigen::VectorXd y = x + step;
      Eigen::VectorXd gy = grad(y);
      if (gy.norm() < g.norm()) {
        x = y;
        g = gy;
        accepted = true;
        break;
      }
      step *= 0.5;
    }
    if (!accepted || step.norm() < 1e-14) break;
  }
  out.q = wrap_unit(x[0]);
  out.e = point(x);
  out.value = s.eval(out.q, out.e);
  out.grad_norm = g.norm();
  out.converged = out.grad_norm <= opt.tol;
  return out;
}

double min_abs_hessian_eigenvalue(const Gfqi& s, double q, const std::vector<double>& e, double fd_step) {
  const int n = static_cast<int>(e.size()) + 1;
  Eigen::MatrixXd h(n, n);
  for (int a = 0; a < n; ++a) {
    double qp = q, qm = q;
    auto ep = e, em = e;
    if (a == 0) {
      qp += fd_step;
      qm -= fd_step;
    } else {
      ep[a - 1] += fd_step;
      em[a - 1] -= fd_step;
    }
    const auto gp = full_gradient(s, qp, ep), gm = full_gradient(s, qm, em);
    for (int j = 0; j < n; ++j) h(j, a) = (gp[j] - gm[j]) / (2.0 * fd_step);
  }
  h = 0.5 * (h + h.transpose()).eval();
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(h, Eigen::EigenvaluesOnly);
  return es.eigenvalues().cwiseAbs().minCoeff();
}

namespace {

double fiber_partial(const Gfqi& s, double q, std::vector<double>& e, int j) {
  const double h = 1e-6 * std::max(1.0, std::fabs(e[j]));
  const double x0 = e[j];
  e[j] = x0 + h;
  const double fp = s.eval(q, e);
  e[j] = x0 - h;
  const double fm = s.eval(q, e);
  e[j] = x0;
  return (fp - fm) / (2.0 * h);
}

/// Root of d_e S on [a, b] (sign change assumed), Illinois variant of regula falsi.
double bracket_root(const Gfqi& s, double q, double a, double b, double tol) {
  std::vector<double> e{a};
  double fa = fiber_partial(s, q, e, 0);
  e[0] = b;
  double fb = fiber_partial(s, q, e, 0);
  if (fa == 0.0) return a;
  if (fb == 0.0) return b;
  int side = 0;
  double c = 0.5 * (a + b);
  for (int it = 0; it < 80; ++it) {
    c = (a * fb - b * fa) / (fb - fa);
    if (!(c > std::min(a, b) && c < std::max(a, b))) c = 0.5 * (a + b);
    e[0] = c;
    const double fc = fiber_partial(s, q, e, 0);
    if (std::fabs(fc) <= tol || std::fabs(b - a) < 1e-13) return c;
    if ((fc > 0) == (fb > 0)) {
      b = c;
      fb = fc;
      if (side == -1) fa *= 0.5;
      side = -1;
    } else {
      a = c;
      fa = fc;
      if (side == 1) fb *= 0.5;
      side = 1;
    }
  }
  return c;
}

/// Newton iteration on grad_e S(q, .) with steps capped at `cap`; true when
/// the residual ends below 1e3 * tol.
bool fiber_newton(const Gfqi& s, double q, std::vector<double>& e, double tol, double cap) {
  const int d = static_cast<int>(e.size());
  for (int it = 0; it < 30; ++it) {
    Eigen::VectorXd g(d);
    for (int j = 0; j < d; ++j) g[j] = fiber_partial(s, q, e, j);
    if (g.norm() <= tol) break;
    Eigen::MatrixXd h(d, d);
    const double fd = 1e-4;
    for (int a = 0; a < d; ++a) {
      auto ep = e, em = e;
      ep[a] += fd;
      em[a] -= fd;
      for (int j = 0; j < d; ++j) h(j, a) = (fiber_partial(s, q, ep, j) - fiber_partial(s, q, em, j)) / (2 * fd);
    }
    Eigen::VectorXd step = -h.completeOrthogonalDecomposition().solve(g);
    if (!step.allFinite()) return false;
    if (step.norm() > cap) step *= cap / step.norm();
    for (int j = 0; j < d; ++j) e[j] += step[j];
    if (step.norm() < 1e-14) break;
  }
  double gn = 0.0;
  for (int j = 0; j < d; ++j) gn += std::pow(fiber_partial(s, q, e, j), 2);
  return std::sqrt(gn) <= 1e3 * tol;
}

/// Fiber-critical points at base index i of a sampled lattice.
std::vector<std::vector<double>> fiber_critical_from_samples(const Gfqi& s, double q, const ProductDomain& dom,
                                                             const std::vector<double>& values, std::size_t i,
                                                             double tol_crit) {
  const int d = dom.fiber_dim();
  const std::size_t n = dom.base.size();
  std::vector<std::vector<double>> out;
  if (d == 0) {
    out.emplace_back();
    return out;
  }
  if (d == 1) {
    const auto& ax = dom.fiber_axes[0];
    const std::size_t m = ax.size();
    std::vector<double> g(m);
    for (std::size_t k = 0; k < m; ++k) {
      const std::size_t k0 = k == 0 ? 0 : k - 1, k1 = k + 1 == m ? k : k + 1;
      g[k] = (values[k1 * n + i] - values[k0 * n + i]) / (ax[k1] - ax[k0]);
    }
    for (std::size_t k = 0; k + 1 < m; ++k) {
      if (g[k] == 0.0 && (k == 0 || g[k - 1] != 0.0)) {
        out.push_back({bracket_root(s, q, ax[k == 0 ? 0 : k - 1], ax[k + 1], tol_crit)});
      } else if ((g[k] < 0.0 && g[k + 1] > 0.0) || (g[k] > 0.0 && g[k + 1] < 0.0)) {
        const double lo = ax[k == 0 ? 0 : k - 1], hi = ax[std::min(m - 1, k + 2)];
        std::vector<double> e{lo};
        const double fl = fiber_partial(s, q, e, 0);
        e[0] = hi;
        const double fh = fiber_partial(s, q, e, 0);
        if ((fl < 0) != (fh < 0)) out.push_back({bracket_root(s, q, lo, hi, tol_crit)});
        else out.push_back({bracket_root(s, q, ax[k], ax[k + 1], tol_crit)});
      }
    }
  } else {
    // Seeds: local minima of the discrete |grad_e S|^2 over the 3^d neighbourhood.
    const std::size_t mf = dom.fiber_cardinality();
    std::vector<double> g2(mf, 0.0);
    std::vector<int> idx(d);
    std::vector<std::size_t> stride(d, 1);
    for (int j = 1; j < d; ++j) stride[j] = stride[j - 1] * dom.fiber_axes[j - 1].size();
    for (std::size_t k = 0; k < mf; ++k) {
      dom.fiber_indices(k, idx);
      for (int j = 0; j < d; ++j) {
        const auto& ax = dom.fiber_axes[j];
        const int last = static_cast<int>(ax.size()) - 1;
        const std::size_t k0 = idx[j] == 0 ? k : k - stride[j];
        const std::size_t k1 = idx[j] == last ? k : k + stride[j];
        const double dx = ax[std::min(idx[j] + 1, last)] - ax[std::max(idx[j] - 1, 0)];
        const double gj = (values[k1 * n + i] - values[k0 * n + i]) / dx;
        g2[k] += gj * gj;
      }
    }
    std::vector<int> off(d);
    for (std::size_t k = 0; k < mf; ++k) {
      dom.fiber_indices(k, idx);
      bool interior = true;
      for (int j = 0; j < d; ++j)
        interior = interior && idx[j] > 0 && idx[j] + 1 < static_cast<int>(dom.fiber_axes[j].size());
      if (!interior) continue;
      bool minimum = true;
      std::size_t combos = 1;
      for (int j = 0; j < d; ++j) combos *= 3;
      for (std::size_t c = 0; c < combos && minimum; ++c) {
        std::size_t r = c;
        long long kk = static_cast<long long>(k);
        for (int j = 0; j < d; ++j) {
          kk += (static_cast<int>(r % 3) - 1) * static_cast<long long>(stride[j]);
          r /= 3;
        }
        if (static_cast<std::size_t>(kk) != k && g2[kk] < g2[k]) minimum = false;
      }
      if (!minimum) continue;
      std::vector<double> e(d);
      dom.fiber_point(k, e);
      const double cap = 0.5 * (dom.fiber_axes[0][1] - dom.fiber_axes[0][0]) + 1e-3;
      if (!fiber_newton(s, q, e, tol_crit, cap)) continue;
      bool dup = false;
      for (const auto& o : out) {
        double dist = 0.0;
        for (int j = 0; j < d; ++j) dist = std::max(dist, std::fabs(o[j] - e[j]));
        dup = dup || dist < 1e-5;
      }
      if (!dup) out.push_back(e);
    }
  }
  return out;
}

ProductDomain fiber_box(const Gfqi& s, int n_q, double radius, int resolution) {
  ProductDomain dom;
  dom.base = CircleGrid(n_q);
  const int r = std::max(2, resolution + (resolution & 1));
  std::vector<double> axis(r + 1);
  for (int k = 0; k <= r; ++k) axis[k] = radius * (2.0 * k / r - 1.0);
  axis[r / 2] = 0.0;
  dom.fiber_axes.assign(s.fiber_dim(), axis);
  return dom;
}

double default_radius(const Gfqi& s, double r) {
  const double need = s.support_radius() + 1.0;
  if (r < 0) return need;
  if (r < need - 1e-12)
    throw InvalidInput("box radius " + std::to_string(r) + " below support radius + 1 = " + std::to_string(need));
  return r;
}

}  // namespace

std::vector<std::vector<double>> fiber_critical_points(const Gfqi& s, double q, double box_radius, int resolution,
                                                       double tol_crit) {
  const double r = default_radius(s, box_radius);
  ProductDomain dom = fiber_box(s, 8, r, resolution);
  const std::size_t mf = dom.fiber_cardinality();
  std::vector<double> values(mf * 8);
  std::vector<double> e(s.fiber_dim());
  for (std::size_t k = 0; k < mf; ++k) {
    dom.fiber_point(k, e);
    const double v = s.eval(q, e);
    if (!std::isfinite(v)) throw InvalidInput("non-finite Gfqi value in fiber_critical_points");
    for (int i = 0; i < 8; ++i) values[k * 8 + i] = v;
  }
  auto out = fiber_critical_from_samples(s, q, dom, values, 0, tol_crit);
  if (out.empty()) throw PipelineError("no fiber-critical point found at q=" + std::to_string(q));
  return out;
}

WavefrontSample wavefront_detailed(const Gfqi& s, const WavefrontOptions& opt) {
  const double r = default_radius(s, opt.box_radius);
  const ProductDomain dom = fiber_box(s, opt.n_q, r, opt.resolution);
  const auto values = sample_lattice_parallel(s, dom);
  const int n = opt.n_q;
  const double step = s.fiber_dim() > 0 ? dom.fiber_axes[0][1] - dom.fiber_axes[0][0] : 1.0;

  std::vector<std::vector<std::vector<double>>> cols(n);
  std::string failure;
#pragma omp parallel for schedule(dynamic, 4)
  for (int i = 0; i < n; ++i) {
    try {
      cols[i] = fiber_critical_from_samples(s, dom.base.point(i), dom, values, i, opt.tol_crit);
    } catch (const std::exception& ex) {
#pragma omp critical
      if (failure.empty()) failure = ex.what();
    }
  }
  if (!failure.empty()) throw PipelineError("wavefront: " + failure);

  // Continuation: lattice seeds can miss stretches of a branch where the
  // critical locus is thin relative to the fiber spacing, so every point is
  // also used as a Newton seed in the neighbouring columns.
  if (s.fiber_dim() > 0) {
    auto known = [](const std::vector<std::vector<double>>& col, const std::vector<double>& e) {
      for (const auto& o : col) {
        double dist = 0.0;
        for (std::size_t j = 0; j < e.size(); ++j) dist = std::max(dist, std::fabs(o[j] - e[j]));
        if (dist < 1e-5) return true;
      }
      return false;
    };
    for (int pass = 0; pass < 4; ++pass) {
      bool changed = false;
      for (int dir : {1, -1}) {
        for (int k = 0; k < n; ++k) {
          const int i = dir > 0 ? k : n - 1 - k;
          const int j = ((i + dir) % n + n) % n;
          const double qj = dom.base.point(j);
          for (std::size_t a = 0; a < cols[i].size(); ++a) {
            std::vector<double> e = cols[i][a];
            if (!fiber_newton(s, qj, e, opt.tol_crit, 0.5 * step + 1e-3)) continue;
            if (known(cols[j], e)) continue;
            cols[j].push_back(std::move(e));
            changed = true;
          }
        }
      }
      if (!changed) break;
    }
  }

  // Greedy branch tracking between consecutive columns.
  std::vector<std::vector<int>> ids(n);
  int next_id = 0;
  for (int i = 0; i < n; ++i) {
    if (cols[i].empty()) throw PipelineError("no fiber-critical point at q=" + std::to_string(dom.base.point(i)));
    ids[i].assign(cols[i].size(), -1);
    if (i > 0) {
      std::vector<char> taken(cols[i - 1].size(), 0);
      for (std::size_t a = 0; a < cols[i].size(); ++a) {
        double best = 4.0 * step;
        int who = -1;
        for (std::size_t b = 0; b < cols[i - 1].size(); ++b) {
          if (taken[b]) continue;
          double dist = 0.0;
          for (std::size_t j = 0; j < cols[i][a].size(); ++j)
            dist = std::max(dist, std::fabs(cols[i][a][j] - cols[i - 1][b][j]));
          if (dist <= best) {
            best = dist;
            who = static_cast<int>(b);
          }
        }
        if (who >= 0) {
          taken[who] = 1;
          ids[i][a] = ids[i - 1][who];
        }
      }
    }
    for (auto& id : ids[i])
      if (id < 0) id = next_id++;
  }

  WavefrontSample out;
  out.front.tol_leg = opt.tol_leg;
  std::vector<std::pair<int, int>> order;  // (branch, column) in traversal order
  for (int i = 0; i < n; ++i)
    for (std::size_t a = 0; a < cols[i].size(); ++a) order.emplace_back(ids[i][a], i * 1024 + static_cast<int>(a));
  std::stable_sort(order.begin(), order.end());
  for (const auto& [branch, key] : order) {
    const int i = key / 1024, a = key % 1024;
    const double q = dom.base.point(i);
    const auto& e = cols[i][a];
    double v = 0.0, dq = 0.0;
    s.eval_slice(e, {&q, 1}, {&v, 1}, {&dq, 1});
    out.front.points.push_back({q, -dq, v, branch});
    out.fiber.push_back(e);
  }
  out.defect = legendrian_defect(out.front);
  return out;
}

LegendrianFront wavefront(const Gfqi& s, const WavefrontOptions& opt) { return wavefront_detailed(s, opt).front; }

std::vector<CriticalPoint> critical_points(const Gfqi& s, const WavefrontOptions& opt) {
  const auto w = wavefront_detailed(s, opt);
  const auto& pts = w.front.points;
  std::vector<std::size_t> seeds;
  for (std::size_t i = 0; i < pts.size(); ++i) {
    const bool has_prev = i > 0 && pts[i - 1].branch == pts[i].branch;
    const bool has_next = i + 1 < pts.size() && pts[i + 1].branch == pts[i].branch;
    double local = 0.0;
    if (has_prev) local = std::max(local, std::fabs(pts[i].p - pts[i - 1].p));
    if (has_next) local = std::max(local, std::fabs(pts[i + 1].p - pts[i].p));
    if (std::fabs(pts[i].p) <= local || std::fabs(pts[i].p) <= opt.tol_crit) seeds.push_back(i);
  }
  std::vector<CriticalPoint> found(seeds.size());
  NewtonOptions nopt;
  nopt.tol = opt.tol_crit;
#pragma omp parallel for schedule(dynamic, 1)
  for (long long k = 0; k < static_cast<long long>(seeds.size()); ++k)
    found[k] = refine_critical_point(s, pts[seeds[k]].q, w.fiber[seeds[k]], nopt);

  std::vector<CriticalPoint> out;
  for (auto& c : found) {
    if (!c.converged) continue;
    bool dup = false;
    for (const auto& o : out) {
      double dist = circle_distance(o.q, c.q);
      for (std::size_t j = 0; j < c.e.size(); ++j) dist = std::max(dist, std::fabs(o.e[j] - c.e[j]));
      dup = dup || dist < 1e-6;
    }
    if (!dup) out.push_back(std::move(c));
  }
  std::sort(out.begin(), out.end(), [](const CriticalPoint& a, const CriticalPoint& b) {
    return a.value != b.value ? a.value < b.value : a.q < b.q;
  });
  return out;
}

std::vector<double> cluster_values(std::vector<double> values, double tol) {
  std::sort(values.begin(), values.end());
  std::vector<double> out;
  std::size_t i = 0;
  while (i < values.size()) {
    std::size_t j = i;
    double sum = values[i];
    while (j + 1 < values.size() && values[j + 1] - values[j] <= tol) sum += values[++j];
    out.push_back(sum / static_cast<double>(j - i + 1));
    i = j + 1;
  }
  return out;
}

std::vector<double> spectrum(const Gfqi& s, const WavefrontOptions& opt, double tol_cluster) {
  if (tol_cluster < 0) tol_cluster = 3.0 * opt.tol_crit;
  std::vector<double> values;
  for (const auto& c : critical_points(s, opt)) values.push_back(c.value);
  return cluster_values(std::move(values), tol_cluster);
}

}  // namespace legspec
