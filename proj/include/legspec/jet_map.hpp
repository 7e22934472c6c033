#pragma once

#include <functional>
#include <span>
#include <string>

namespace legspec {

/// Point of J^1 S^1 with q lifted to R.
struct JetPoint {
  double q = 0.0, p = 0.0, z = 0.0;
};

/// A contactomorphism of J^1 S^1 acting on lifted points. Implementations
/// must commute with q -> q + 1.
class JetMap {
 public:
  virtual ~JetMap() = default;

  virtual JetPoint apply(const JetPoint& x) const = 0;
  /// In-place map of a batch; the default runs `apply` serially.
  virtual void apply_all(std::span<JetPoint> pts) const;

  struct Displacement {
    double dz = 0.0;
    double dp = 0.0;
  };
  /// Bounds on |z' - z| and |p' - p| over points with |p| <= p_max.
  virtual Displacement displacement_bound(double p_max) const = 0;
  virtual std::string describe() const = 0;
};

/// h(p) with derivative and sup bounds; used by momentum flows and folds.
struct MomentumProfile {
  std::function<double(double)> h;
  std::function<double(double)> dh;
  double sup_h = 0.0;
  double sup_dh = 0.0;
  std::string label;
};

}  // namespace legspec
