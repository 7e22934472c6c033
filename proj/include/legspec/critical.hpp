#pragma once

#include <vector>

#include "legspec/front.hpp"
#include "legspec/gfqi.hpp"

namespace legspec {

struct CriticalPoint {
  double q = 0.0;
  std::vector<double> e;
  double value = 0.0;
  double grad_norm = 0.0;
  bool converged = false;
};

struct NewtonOptions {
  double tol = 1e-6;       // on the gradient norm
  int max_iter = 40;
  double trust = 0.05;     // max step length
  double fd_step = 1e-4;   // for the finite-difference Hessian
};

/// Damped Newton iteration on the full gradient (q and fiber) of S.
CriticalPoint refine_critical_point(const Gfqi& s, double q, std::vector<double> e, const NewtonOptions& opt = {});

/// Smallest |eigenvalue| of the full Hessian of S at (q, e), by central
/// differences of the gradient; 0 flags a degenerate critical point.
double min_abs_hessian_eigenvalue(const Gfqi& s, double q, const std::vector<double>& e, double fd_step = 1e-4);

/// Fiber-critical points {e : d_e S(q, e) = 0} in the box |e|_inf <= box_radius.
/// Seeds come from a `resolution`-interval grid; d = 1 is refined by
/// bracketing, d >= 2 by Newton in the fiber. Throws PipelineError when the
/// result is empty.
std::vector<std::vector<double>> fiber_critical_points(const Gfqi& s, double q, double box_radius, int resolution,
                                                       double tol_crit = 1e-6);

struct WavefrontOptions {
  int n_q = 256;
  double box_radius = -1.0;  // < 0: support radius + 1
  int resolution = 32;
  double tol_crit = 1e-6;
  double tol_leg = 1e-2;
};

struct WavefrontSample {
  LegendrianFront front;
  std::vector<std::vector<double>> fiber;  // fiber point of each front point
  double defect = 0.0;
};

/// i_S(Sigma_S) sampled over the base grid, points grouped by branch.
WavefrontSample wavefront_detailed(const Gfqi& s, const WavefrontOptions& opt = {});
LegendrianFront wavefront(const Gfqi& s, const WavefrontOptions& opt = {});

/// Critical points of S (full gradient <= tol_crit), seeded from the zero
/// crossings of p along wavefront branches; duplicates removed.
std::vector<CriticalPoint> critical_points(const Gfqi& s, const WavefrontOptions& opt = {});

/// Sorted critical values, clustered within tol_cluster.
std::vector<double> spectrum(const Gfqi& s, const WavefrontOptions& opt = {}, double tol_cluster = -1.0);

std::vector<double> cluster_values(std::vector<double> values, double tol);

}  // namespace legspec
