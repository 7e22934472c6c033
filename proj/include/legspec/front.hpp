#pragma once

#include <iosfwd>
#include <vector>

namespace legspec {

struct FrontPoint {
  double q = 0.0;  // representative in [0, 1)
  double p = 0.0;
  double z = 0.0;
  int branch = 0;
};

/// Point cloud of an (immersed) Legendrian in J^1 S^1. Points of one branch
/// are stored consecutively in the order they are traversed.
struct LegendrianFront {
  std::vector<FrontPoint> points;
  bool closed = true;      // each branch closes up after wrapping in q
  double tol_leg = 1e-2;   // declared defect tolerance

  std::size_t size() const noexcept { return points.size(); }
  /// CSV columns q,p,z,branch.
  void write_csv(std::ostream& os) const;
};

/// max |dz + pbar dq| / segment length over consecutive points of a branch.
double legendrian_defect(const LegendrianFront& front);

/// Hausdorff distance with the circle metric in q and Euclidean p, z.
double hausdorff_distance(const LegendrianFront& a, const LegendrianFront& b);

/// 1-jet of a function sampled at n points: (q, -f'(q), f(q)).
template <class F, class DF>
LegendrianFront jet_front(F f, DF df, int n) {
  LegendrianFront out;
  out.points.reserve(n);
  for (int i = 0; i < n; ++i) {
    const double q = static_cast<double>(i) / n;
    out.points.push_back({q, -df(q), f(q), 0});
  }
  return out;
}

}  // namespace legspec
