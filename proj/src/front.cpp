#include "legspec/front.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>
#include <utility>
#include <vector>

#include "legspec/grid.hpp"

namespace legspec {

void LegendrianFront::write_csv(std::ostream& os) const {
  os << "q,p,z,branch\n";
  os.precision(17);
  for (const auto& x : points) os << x.q << ',' << x.p << ',' << x.z << ',' << x.branch << '\n';
}

namespace {

double signed_circle_step(double from, double to) {
  double d = wrap_unit(to) - wrap_unit(from);
  if (d > 0.5) d -= 1.0;
  if (d < -0.5) d += 1.0;
  return d;
}

/// A closed front's branch gets a closing segment when its last point is as
/// close (in q) to its first point as consecutive points are to each other.
bool closes(const std::vector<FrontPoint>& pts, std::size_t start, std::size_t end) {
  if (end <= start + 1) return false;
  double step = 0.0;
  for (std::size_t i = start; i < end; ++i) step = std::max(step, std::fabs(signed_circle_step(pts[i].q, pts[i + 1].q)));
  return std::fabs(signed_circle_step(pts[end].q, pts[start].q)) <= 4.0 * step + 1e-15;
}

double segment_defect(const FrontPoint& a, const FrontPoint& b) {
  const double dq = signed_circle_step(a.q, b.q);
  const double dp = b.p - a.p, dz = b.z - a.z;
  const double len = std::sqrt(dq * dq + dp * dp + dz * dz);
  if (len == 0.0) return 0.0;
  return std::fabs(dz + 0.5 * (a.p + b.p) * dq) / len;
}

}  // namespace

double legendrian_defect(const LegendrianFront& front) {
  const auto& pts = front.points;
  double worst = 0.0;
  std::size_t start = 0;
  while (start < pts.size()) {
    std::size_t end = start;
    while (end + 1 < pts.size() && pts[end + 1].branch == pts[start].branch) ++end;
    for (std::size_t i = start; i < end; ++i) worst = std::max(worst, segment_defect(pts[i], pts[i + 1]));
    if (front.closed && closes(pts, start, end)) worst = std::max(worst, segment_defect(pts[end], pts[start]));
    start = end + 1;
  }
  return worst;
}

namespace {

double point_segment_d2(const FrontPoint& x, const FrontPoint& a, const FrontPoint& b) {
  // Lift the segment next to x.q.
  const double qa = x.q + signed_circle_step(x.q, a.q);
  const double qb = qa + signed_circle_step(a.q, b.q);
  const double ux = qb - qa, up = b.p - a.p, uz = b.z - a.z;
  const double wx = x.q - qa, wp = x.p - a.p, wz = x.z - a.z;
  const double uu = ux * ux + up * up + uz * uz;
  double s = uu > 0.0 ? (wx * ux + wp * up + wz * uz) / uu : 0.0;
  s = std::clamp(s, 0.0, 1.0);
  const double dx = wx - s * ux, dp = wp - s * up, dz = wz - s * uz;
  return dx * dx + dp * dp + dz * dz;
}

/// Sup over points of a of the distance to the polyline through b's branches.
double directed(const LegendrianFront& a, const LegendrianFront& b) {
  std::vector<std::pair<std::size_t, std::size_t>> segs;
  const auto& pts = b.points;
  std::size_t start = 0;
  while (start < pts.size()) {
    std::size_t end = start;
    while (end + 1 < pts.size() && pts[end + 1].branch == pts[start].branch) ++end;
    for (std::size_t i = start; i < end; ++i) segs.emplace_back(i, i + 1);
    if (b.closed && closes(pts, start, end)) segs.emplace_back(end, start);
    if (end == start) segs.emplace_back(start, start);
    start = end + 1;
  }
  double worst = 0.0;
  for (const auto& x : a.points) {
    double best = 1e300;
    for (const auto& [i, j] : segs) best = std::min(best, point_segment_d2(x, pts[i], pts[j]));
    worst = std::max(worst, best);
  }
  return std::sqrt(worst);
}

}  // namespace

double hausdorff_distance(const LegendrianFront& a, const LegendrianFront& b) {
  if (a.points.empty() || b.points.empty()) return a.points.empty() && b.points.empty() ? 0.0 : 1e300;
  return std::max(directed(a, b), directed(b, a));
}

}  // namespace legspec
