#pragma once

#include <functional>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "legspec/circle_function.hpp"
#include "legspec/jet_map.hpp"
#include "legspec/quadratic_form.hpp"

namespace legspec {

/// Metadata that lets the homology module pick a box and a negative end.
///   core_radius:  outside |e_j| <= core_radius, S is strictly monotone in e_j
///                 with the sign of c_j e_j;
///   perturbation: |S(q,e) - Q(e)| <= perturbation everywhere;
///   q_slope:      |dS/dq| <= q_slope everywhere.
struct GfqiBounds {
  double core_radius = 0.0;
  double perturbation = 0.0;
  double q_slope = 0.0;
};

enum class GfqiKind {
  primitive, quadratic, oplus, negate, add_function, add_constant, transport, fold, family_member
};

class GfqiNode;

/// Generating function quadratic at infinity S : S^1 x R^d -> R, represented as
/// an immutable expression DAG. Evaluation works slice by slice: a fixed fiber
/// point e and a batch of base points q.
class Gfqi {
 public:
  explicit Gfqi(std::shared_ptr<const GfqiNode> node);

  const QuadraticForm& form() const noexcept;
  int fiber_dim() const noexcept { return form().dim(); }
  int index() const noexcept { return form().index(); }
  const GfqiBounds& bounds() const noexcept;
  double support_radius() const noexcept { return bounds().core_radius; }
  GfqiKind kind() const noexcept;
  const std::string& provenance() const noexcept;

  /// Values and q-derivatives of S(., e) at the points `qs`.
  void eval_slice(std::span<const double> e, std::span<const double> qs, std::span<double> values,
                  std::span<double> dq) const;
  double eval(double q, std::span<const double> e) const;
  /// Full gradient (dS/dq, dS/de_1, ...); fiber partials by central differences.
  void gradient(double q, std::span<const double> e, std::span<double> out) const;

  const std::shared_ptr<const GfqiNode>& node() const noexcept { return node_; }

 private:
  std::shared_ptr<const GfqiNode> node_;
};

/// Internal node interface; concrete nodes live in gfqi.cpp.
class GfqiNode {
 public:
  GfqiNode(GfqiKind kind, QuadraticForm form, GfqiBounds bounds, std::string provenance)
      : kind_(kind), form_(std::move(form)), bounds_(bounds), provenance_(std::move(provenance)) {}
  virtual ~GfqiNode() = default;

  virtual void slice(std::span<const double> e, std::span<const double> qs, std::span<double> values,
                     std::span<double> dq) const = 0;

  GfqiKind kind() const noexcept { return kind_; }
  const QuadraticForm& form() const noexcept { return form_; }
  const GfqiBounds& bounds() const noexcept { return bounds_; }
  const std::string& provenance() const noexcept { return provenance_; }

 private:
  GfqiKind kind_;
  QuadraticForm form_;
  GfqiBounds bounds_;
  std::string provenance_;
};

/// S(q, e) = f(q) + e^2 (one stabilizing fiber coordinate); generates j^1 f.
Gfqi gfqi_from_base_function(const CircleFunction& f);
/// S(q) = f(q) with no fiber; also generates j^1 f.
Gfqi gfqi_graph(const CircleFunction& f);
/// The zero section O, fiberless.
Gfqi zero_section();
Gfqi pure_quadratic(const QuadraticForm& q);

/// User-supplied S(q, e); q-derivatives by central differences.
Gfqi gfqi_from_callable(QuadraticForm form, GfqiBounds bounds,
                        std::function<double(double, std::span<const double>)> s, std::string label);

Gfqi oplus(const Gfqi& a, const Gfqi& b);
Gfqi ominus(const Gfqi& a, const Gfqi& b);
Gfqi negate(const Gfqi& s);
Gfqi stabilize(const Gfqi& s, const QuadraticForm& q);

/// S + f(q): generates T_f applied to the Legendrian of S.
Gfqi add_base_function(const Gfqi& s, const CircleFunction& f);
/// S + c: Reeb shift by c.
Gfqi add_constant(const Gfqi& s, double c);

/// Slice-wise transport: each slice j^1 S(., e) is pushed through `map` and
/// re-read as a graph. Throws FoldError (lazily, per slice) when a transported
/// slice is not graphical. `fine` is the per-slice sample count.
Gfqi transport(const Gfqi& s, std::shared_ptr<const JetMap> map, int fine = 512);

/// Smallest ratio (min spacing of transported q samples) / (1/fine) over probe
/// slices of `s`; a value <= 0 means some slice folds.
double transport_graphicality(const Gfqi& s, const JetMap& map, int fine = 512, int probes_per_axis = 7);

/// Generating function for the time-tau momentum flow of h applied to the
/// Legendrian of S, adding two fiber coordinates (forms +1, -1).
Gfqi fold_momentum(const Gfqi& s, const MomentumProfile& h, double tau);

/// Labelled copy used for family members; evaluation is delegated.
Gfqi family_member(const Gfqi& s, double t);

}  // namespace legspec
