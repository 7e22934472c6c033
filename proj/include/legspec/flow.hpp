#pragma once

#include <cmath>
#include <functional>
#include <memory>
#include <span>
#include <vector>

#include "legspec/front.hpp"
#include "legspec/hamiltonian.hpp"
#include "legspec/jet_map.hpp"

namespace legspec {

/// z -> z + c.
class ReebMap final : public JetMap {
 public:
  explicit ReebMap(double c) : c_(c) {}
  JetPoint apply(const JetPoint& x) const override { return {x.q, x.p, x.z + c_}; }
  Displacement displacement_bound(double) const override { return {std::abs(c_), 0.0}; }
  std::string describe() const override;

 private:
  double c_;
};

/// T_f(q, p, z) = (q, p - f'(q), z + f(q)).
class TranslationMap final : public JetMap {
 public:
  explicit TranslationMap(CircleFunction f);
  JetPoint apply(const JetPoint& x) const override;
  Displacement displacement_bound(double) const override { return {sup_f_, sup_df_}; }
  std::string describe() const override { return "T[" + f_.label + "]"; }

 private:
  CircleFunction f_;
  double sup_f_, sup_df_;
};

/// Time-tau flow of H = h(p): (q + tau h'(p), p, z + tau (h - p h')).
class MomentumFlowMap final : public JetMap {
 public:
  MomentumFlowMap(MomentumProfile h, double tau) : h_(std::move(h)), tau_(tau) {}
  JetPoint apply(const JetPoint& x) const override;
  Displacement displacement_bound(double p_max) const override;
  std::string describe() const override;
  const MomentumProfile& profile() const noexcept { return h_; }
  double tau() const noexcept { return tau_; }

 private:
  MomentumProfile h_;
  double tau_;
};

/// Flow of a contact Hamiltonian from t0 to t1 by classical RK4.
class HamiltonianFlowMap final : public JetMap {
 public:
  /// steps <= 0 picks the CFL-style count ceil(40 |t1 - t0| sup|grad H|).
  HamiltonianFlowMap(std::shared_ptr<const ContactHamiltonian> h, double t0, double t1, int steps = 0);
  JetPoint apply(const JetPoint& x) const override;
  /// OpenMP parallel over points.
  void apply_all(std::span<JetPoint> pts) const override;
  void apply_all_serial(std::span<JetPoint> pts) const;
  Displacement displacement_bound(double p_max) const override;
  std::string describe() const override;
  int steps() const noexcept { return steps_; }

 private:
  std::shared_ptr<const ContactHamiltonian> h_;
  double t0_, t1_;
  int steps_;
};

/// Minimal RK4 step count for integrating H over [t0, t1].
int required_steps(const ContactHamiltonian& h, double t0, double t1);

JetPoint rk4_flow(const ContactHamiltonian& h, JetPoint x, double t0, double t1, int steps);

/// Pointwise RK4 transport of a front; steps <= 0 picks the guard count.
/// Rejects step counts below the guard and outputs whose Legendrian defect
/// exceeds the front's tol_leg.
LegendrianFront flow(const ContactHamiltonian& h, const LegendrianFront& front, double t0, double t1, int steps = 0);

/// Image of the zero section under maps applied in order, sampled with at
/// least n points; segments longer than `degrade` times the initial spacing
/// 1/n are refined in the parameter and re-transported (up to 16 n points).
LegendrianFront push_zero_section(const std::vector<std::shared_ptr<const JetMap>>& maps, int n,
                                  double degrade = 4.0);

/// Same for a closed curve s -> curve(s), s in [0, 1), with curve(s + 1) =
/// curve(s) shifted by one in q.
LegendrianFront push_curve(const std::function<JetPoint(double)>& curve,
                           const std::vector<std::shared_ptr<const JetMap>>& maps, int n, double degrade = 4.0);

}  // namespace legspec
