#include "legspec/gfqi.hpp"

#include <algorithm>
#include <cmath>
#include <list>
#include <mutex>
#include <sstream>

#include "legspec/error.hpp"
#include "legspec/grid.hpp"

namespace legspec {

void JetMap::apply_all(std::span<JetPoint> pts) const {
  for (auto& x : pts) x = apply(x);
}

Gfqi::Gfqi(std::shared_ptr<const GfqiNode> node) : node_(std::move(node)) {
  if (!node_) throw InvalidInput("Gfqi: null node");
}

const QuadraticForm& Gfqi::form() const noexcept { return node_->form(); }
const GfqiBounds& Gfqi::bounds() const noexcept { return node_->bounds(); }
GfqiKind Gfqi::kind() const noexcept { return node_->kind(); }
const std::string& Gfqi::provenance() const noexcept { return node_->provenance(); }

void Gfqi::eval_slice(std::span<const double> e, std::span<const double> qs, std::span<double> values,
                      std::span<double> dq) const {
  if (static_cast<int>(e.size()) != fiber_dim()) throw InvalidInput("Gfqi: fiber point has wrong dimension");
  node_->slice(e, qs, values, dq);
}

double Gfqi::eval(double q, std::span<const double> e) const {
  double v = 0.0, d = 0.0;
  eval_slice(e, {&q, 1}, {&v, 1}, {&d, 1});
  return v;
}

void Gfqi::gradient(double q, std::span<const double> e, std::span<double> out) const {
  double v = 0.0;
  eval_slice(e, {&q, 1}, {&v, 1}, {&out[0], 1});
  std::vector<double> x(e.begin(), e.end());
  for (std::size_t j = 0; j < x.size(); ++j) {
    const double h = 1e-6 * std::max(1.0, std::fabs(x[j]));
    const double x0 = x[j];
    x[j] = x0 + h;
    const double fp = eval(q, x);
    x[j] = x0 - h;
    const double fm = eval(q, x);
    x[j] = x0;
    out[j + 1] = (fp - fm) / (2.0 * h);
  }
}

namespace {

class FunctionNode final : public GfqiNode {
 public:
  FunctionNode(CircleFunction f, QuadraticForm form, std::string prov)
      : GfqiNode(GfqiKind::primitive, form, {0.0, f.sup_abs(), f.sup_abs_derivative()}, std::move(prov)),
        f_(std::move(f)) {}

  void slice(std::span<const double> e, std::span<const double> qs, std::span<double> values,
             std::span<double> dq) const override {
    const double qe = form()(e);
    for (std::size_t i = 0; i < qs.size(); ++i) {
      values[i] = f_.value(qs[i]) + qe;
      dq[i] = f_.derivative(qs[i]);
    }
  }

 private:
  CircleFunction f_;
};

class QuadraticNode final : public GfqiNode {
 public:
  explicit QuadraticNode(QuadraticForm form)
      : GfqiNode(GfqiKind::quadratic, form, {}, "Q" + form.describe()) {}

  void slice(std::span<const double> e, std::span<const double> qs, std::span<double> values,
             std::span<double> dq) const override {
    const double qe = form()(e);
    std::fill(values.begin(), values.begin() + qs.size(), qe);
    std::fill(dq.begin(), dq.begin() + qs.size(), 0.0);
  }
};

class CallableNode final : public GfqiNode {
 public:
  CallableNode(QuadraticForm form, GfqiBounds b, std::function<double(double, std::span<const double>)> s,
               std::string label)
      : GfqiNode(GfqiKind::primitive, std::move(form), b, std::move(label)), s_(std::move(s)) {}

  void slice(std::span<const double> e, std::span<const double> qs, std::span<double> values,
             std::span<double> dq) const override {
    constexpr double h = 1e-6;
    for (std::size_t i = 0; i < qs.size(); ++i) {
      values[i] = s_(qs[i], e);
      dq[i] = (s_(qs[i] + h, e) - s_(qs[i] - h, e)) / (2.0 * h);
    }
  }

 private:
  std::function<double(double, std::span<const double>)> s_;
};

class OplusNode final : public GfqiNode {
 public:
  OplusNode(const Gfqi& a, const Gfqi& b, std::string prov)
      : GfqiNode(GfqiKind::oplus, a.form().oplus(b.form()),
                 {std::max(a.bounds().core_radius, b.bounds().core_radius),
                  a.bounds().perturbation + b.bounds().perturbation, a.bounds().q_slope + b.bounds().q_slope},
                 std::move(prov)),
        a_(a),
        b_(b) {}

  void slice(std::span<const double> e, std::span<const double> qs, std::span<double> values,
             std::span<double> dq) const override {
    const std::size_t da = a_.fiber_dim();
    const std::size_t n = qs.size();
    std::vector<double> v2(n), d2(n);
    a_.eval_slice(e.subspan(0, da), qs, values, dq);
    b_.eval_slice(e.subspan(da), qs, v2, d2);
    for (std::size_t i = 0; i < n; ++i) {
      values[i] += v2[i];
      dq[i] += d2[i];
    }
  }

 private:
  Gfqi a_, b_;
};

class NegateNode final : public GfqiNode {
 public:
  explicit NegateNode(const Gfqi& s)
      : GfqiNode(GfqiKind::negate, -s.form(), s.bounds(), "negate(" + s.provenance() + ")"), s_(s) {}

  void slice(std::span<const double> e, std::span<const double> qs, std::span<double> values,
             std::span<double> dq) const override {
    s_.eval_slice(e, qs, values, dq);
    for (std::size_t i = 0; i < qs.size(); ++i) {
      values[i] = -values[i];
      dq[i] = -dq[i];
    }
  }

 private:
  Gfqi s_;
};

class AddFunctionNode final : public GfqiNode {
 public:
  AddFunctionNode(const Gfqi& s, CircleFunction f)
      : GfqiNode(GfqiKind::add_function, s.form(),
                 {s.bounds().core_radius, s.bounds().perturbation + f.sup_abs(),
                  s.bounds().q_slope + f.sup_abs_derivative()},
                 "T[" + f.label + "](" + s.provenance() + ")"),
        s_(s),
        f_(std::move(f)) {}

  void slice(std::span<const double> e, std::span<const double> qs, std::span<double> values,
             std::span<double> dq) const override {
    s_.eval_slice(e, qs, values, dq);
    for (std::size_t i = 0; i < qs.size(); ++i) {
      values[i] += f_.value(qs[i]);
      dq[i] += f_.derivative(qs[i]);
    }
  }

 private:
  Gfqi s_;
  CircleFunction f_;
};

class AddConstantNode final : public GfqiNode {
 public:
  AddConstantNode(const Gfqi& s, double c)
      : GfqiNode(GfqiKind::add_constant, s.form(),
                 {s.bounds().core_radius, s.bounds().perturbation + std::fabs(c), s.bounds().q_slope},
                 "reeb[" + std::to_string(c) + "](" + s.provenance() + ")"),
        s_(s),
        c_(c) {}

  void slice(std::span<const double> e, std::span<const double> qs, std::span<double> values,
             std::span<double> dq) const override {
    s_.eval_slice(e, qs, values, dq);
    for (std::size_t i = 0; i < qs.size(); ++i) values[i] += c_;
  }

 private:
  Gfqi s_;
  double c_;
};

/// Transported slice: lifted abscissae X (strictly increasing, X[n] = X[0] + 1),
/// heights Z and momenta P.
struct SliceTable {
  std::vector<double> X, Z, P;
};

SliceTable build_table(const Gfqi& s, const JetMap& map, std::span<const double> e, int fine) {
  std::vector<double> qs(fine), v(fine), d(fine);
  for (int k = 0; k < fine; ++k) qs[k] = static_cast<double>(k) / fine;
  s.eval_slice(e, qs, v, d);
  std::vector<JetPoint> pts(fine);
  for (int k = 0; k < fine; ++k) pts[k] = {qs[k], -d[k], v[k]};
  map.apply_all(pts);
  SliceTable t;
  t.X.resize(fine + 1);
  t.Z.resize(fine + 1);
  t.P.resize(fine + 1);
  for (int k = 0; k < fine; ++k) {
    t.X[k] = pts[k].q;
    t.Z[k] = pts[k].z;
    t.P[k] = pts[k].p;
  }
  t.X[fine] = t.X[0] + 1.0;
  t.Z[fine] = t.Z[0];
  t.P[fine] = t.P[0];
  return t;
}

double min_spacing_ratio(const SliceTable& t) {
  const int n = static_cast<int>(t.X.size()) - 1;
  double m = 1e300;
  for (int k = 0; k < n; ++k) m = std::min(m, (t.X[k + 1] - t.X[k]) * n);
  return m;
}

class TransportNode final : public GfqiNode {
 public:
  TransportNode(const Gfqi& s, std::shared_ptr<const JetMap> map, int fine, GfqiBounds b)
      : GfqiNode(GfqiKind::transport, s.form(), b, map->describe() + "(" + s.provenance() + ")"),
        s_(s),
        map_(std::move(map)),
        fine_(fine) {}

  void slice(std::span<const double> e, std::span<const double> qs, std::span<double> values,
             std::span<double> dq) const override {
    auto t = table(e);
    const auto& X = t->X;
    const double x0 = X[0];
    for (std::size_t i = 0; i < qs.size(); ++i) {
      const double Q = x0 + wrap_unit(qs[i] - x0);
      auto it = std::upper_bound(X.begin(), X.end(), Q);
      std::size_t k = it == X.begin() ? 0 : static_cast<std::size_t>(it - X.begin()) - 1;
      if (k >= X.size() - 1) k = X.size() - 2;
      const double h = X[k + 1] - X[k];
      const double u = (Q - X[k]) / h;
      const double m0 = -t->P[k] * h, m1 = -t->P[k + 1] * h;
      const double u2 = u * u, u3 = u2 * u;
      values[i] = (2 * u3 - 3 * u2 + 1) * t->Z[k] + (u3 - 2 * u2 + u) * m0 + (-2 * u3 + 3 * u2) * t->Z[k + 1] +
                  (u3 - u2) * m1;
      dq[i] = ((6 * u2 - 6 * u) * t->Z[k] + (3 * u2 - 4 * u + 1) * m0 + (-6 * u2 + 6 * u) * t->Z[k + 1] +
               (3 * u2 - 2 * u) * m1) /
              h;
    }
  }

 private:
  std::shared_ptr<const SliceTable> table(std::span<const double> e) const {
    std::vector<double> key(e.begin(), e.end());
    {
      std::lock_guard lock(mu_);
      for (auto it = cache_.begin(); it != cache_.end(); ++it) {
        if (it->first == key) {
          cache_.splice(cache_.begin(), cache_, it);
          return cache_.front().second;
        }
      }
    }
    auto t = std::make_shared<SliceTable>(build_table(s_, *map_, e, fine_));
    const double ratio = min_spacing_ratio(*t);
    if (!(ratio > 0.0)) {
      std::ostringstream os;
      os << "transported slice is not graphical under " << map_->describe() << " (spacing ratio " << ratio
         << ", fiber point [";
      for (std::size_t j = 0; j < key.size(); ++j) os << (j ? "," : "") << key[j];
      os << "])";
      throw FoldError(os.str());
    }
    std::lock_guard lock(mu_);
    cache_.emplace_front(std::move(key), t);
    if (cache_.size() > kCacheSize) cache_.pop_back();
    return t;
  }

  static constexpr std::size_t kCacheSize = 64;
  Gfqi s_;
  std::shared_ptr<const JetMap> map_;
  int fine_;
  mutable std::mutex mu_;
  mutable std::list<std::pair<std::vector<double>, std::shared_ptr<const SliceTable>>> cache_;
};

class FoldNode final : public GfqiNode {
 public:
  FoldNode(const Gfqi& s, MomentumProfile h, double tau, GfqiBounds b)
      : GfqiNode(GfqiKind::fold, s.form().oplus(QuadraticForm({1.0, -1.0})), b,
                 "fold[" + h.label + "," + std::to_string(tau) + "](" + s.provenance() + ")"),
        s_(s),
        h_(std::move(h)),
        tau_(tau) {}

  void slice(std::span<const double> e, std::span<const double> qs, std::span<double> values,
             std::span<double> dq) const override {
    const std::size_t d = s_.fiber_dim();
    const double a = e[d], b = e[d + 1];
    const double x = a - b, eta = a + b;
    std::vector<double> shifted(qs.size());
    for (std::size_t i = 0; i < qs.size(); ++i) shifted[i] = qs[i] + x;
    s_.eval_slice(e.subspan(0, d), shifted, values, dq);
    const double extra = eta * x + tau_ * h_.h(eta);
    for (std::size_t i = 0; i < qs.size(); ++i) values[i] += extra;
  }

 private:
  Gfqi s_;
  MomentumProfile h_;
  double tau_;
};

class FamilyMemberNode final : public GfqiNode {
 public:
  FamilyMemberNode(const Gfqi& s, double t)
      : GfqiNode(GfqiKind::family_member, s.form(), s.bounds(),
                 "member[t=" + std::to_string(t) + "](" + s.provenance() + ")"),
        s_(s) {}

  void slice(std::span<const double> e, std::span<const double> qs, std::span<double> values,
             std::span<double> dq) const override {
    s_.eval_slice(e, qs, values, dq);
  }

 private:
  Gfqi s_;
};

}  // namespace

Gfqi gfqi_from_base_function(const CircleFunction& f) {
  return Gfqi(std::make_shared<FunctionNode>(f, QuadraticForm({1.0}), "jet1[" + f.label + "]"));
}

Gfqi gfqi_graph(const CircleFunction& f) {
  return Gfqi(std::make_shared<FunctionNode>(f, QuadraticForm(), "graph[" + f.label + "]"));
}

Gfqi zero_section() { return gfqi_graph(CircleFunction::constant(0.0)); }

Gfqi pure_quadratic(const QuadraticForm& q) { return Gfqi(std::make_shared<QuadraticNode>(q)); }

Gfqi gfqi_from_callable(QuadraticForm form, GfqiBounds bounds,
                        std::function<double(double, std::span<const double>)> s, std::string label) {
  return Gfqi(std::make_shared<CallableNode>(std::move(form), bounds, std::move(s), std::move(label)));
}

Gfqi oplus(const Gfqi& a, const Gfqi& b) {
  return Gfqi(std::make_shared<OplusNode>(a, b, "oplus(" + a.provenance() + "," + b.provenance() + ")"));
}

Gfqi ominus(const Gfqi& a, const Gfqi& b) {
  return Gfqi(std::make_shared<OplusNode>(a, negate(b), "ominus(" + a.provenance() + "," + b.provenance() + ")"));
}

Gfqi negate(const Gfqi& s) { return Gfqi(std::make_shared<NegateNode>(s)); }

Gfqi stabilize(const Gfqi& s, const QuadraticForm& q) {
  if (q.dim() == 0) throw InvalidInput("stabilize: empty quadratic form");
  return oplus(s, pure_quadratic(q));
}

Gfqi add_base_function(const Gfqi& s, const CircleFunction& f) {
  return Gfqi(std::make_shared<AddFunctionNode>(s, f));
}

Gfqi add_constant(const Gfqi& s, double c) { return Gfqi(std::make_shared<AddConstantNode>(s, c)); }

Gfqi transport(const Gfqi& s, std::shared_ptr<const JetMap> map, int fine) {
  if (fine < 16) throw InvalidInput("transport: fine sample count must be >= 16");
  const auto disp = map->displacement_bound(s.bounds().q_slope);
  GfqiBounds b = s.bounds();
  b.perturbation += disp.dz;
  b.q_slope += disp.dp;
  return Gfqi(std::make_shared<TransportNode>(s, std::move(map), fine, b));
}

double transport_graphicality(const Gfqi& s, const JetMap& map, int fine, int probes_per_axis) {
  const int d = s.fiber_dim();
  const double r = s.bounds().core_radius + 1.0;
  std::vector<double> axis(probes_per_axis);
  for (int k = 0; k < probes_per_axis; ++k)
    axis[k] = probes_per_axis == 1 ? 0.0 : -r + 2.0 * r * k / (probes_per_axis - 1);
  std::size_t total = 1;
  for (int j = 0; j < d; ++j) total *= probes_per_axis;
  double worst = 1e300;
  std::vector<double> e(d);
  for (std::size_t idx = 0; idx < total; ++idx) {
    std::size_t rest = idx;
    for (int j = 0; j < d; ++j) {
      e[j] = axis[rest % probes_per_axis];
      rest /= probes_per_axis;
    }
    worst = std::min(worst, min_spacing_ratio(build_table(s, map, e, fine)));
  }
  return worst;
}

Gfqi fold_momentum(const Gfqi& s, const MomentumProfile& h, double tau) {
  GfqiBounds b = s.bounds();
  const double shear = std::fabs(tau) * h.sup_dh;
  b.core_radius = std::max(b.core_radius, 0.5 * (b.q_slope + shear) + 0.5);
  b.perturbation += std::fabs(tau) * h.sup_h;
  return Gfqi(std::make_shared<FoldNode>(s, h, tau, b));
}

Gfqi family_member(const Gfqi& s, double t) { return Gfqi(std::make_shared<FamilyMemberNode>(s, t)); }

}  // namespace legspec
