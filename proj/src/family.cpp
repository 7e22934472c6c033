#include "legspec/family.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>
#include <sstream>

#include "legspec/error.hpp"
#include "legspec/flow.hpp"
#include "legspec/grid.hpp"

namespace legspec {

namespace {

int flow_steps(const ContactHamiltonian& h, double t, int k) {
  return std::max(required_steps(h, 0.0, t), static_cast<int>(std::ceil(k * std::fabs(t))));
}

/// Front of phi_H^t(L_0): graphs are pushed as curves with re-sampling,
/// other bases through their wavefront.
LegendrianFront transported_front(const GfqiFamily& fam, double t, const FamilyOptions& opt) {
  if (t == 0.0) {
    WavefrontOptions wo;
    wo.n_q = opt.n_front;
    return wavefront(fam.base, wo);
  }
  auto map = std::make_shared<HamiltonianFlowMap>(fam.h, 0.0, t, flow_steps(*fam.h, t, opt.steps));
  if (fam.base.fiber_dim() == 0) {
    const Gfqi base = fam.base;
    auto curve = [base](double s) {
      const double q = wrap_unit(s);
      double v = 0.0, dq = 0.0;
      base.eval_slice({}, {&q, 1}, {&v, 1}, {&dq, 1});
      return JetPoint{s, -dq, v};
    };
    return push_curve(curve, {map}, opt.n_front);
  }
  WavefrontOptions wo;
  wo.n_q = opt.n_front;
  return flow(*fam.h, wavefront(fam.base, wo), 0.0, t, map->steps());
}

double max_segment(const LegendrianFront& f) {
  double m = 0.0;
  for (std::size_t i = 0; i + 1 < f.points.size(); ++i) {
    const auto& a = f.points[i];
    const auto& b = f.points[i + 1];
    if (a.branch != b.branch) continue;
    const double dq = circle_distance(a.q, b.q), dp = b.p - a.p, dz = b.z - a.z;
    m = std::max(m, std::sqrt(dq * dq + dp * dp + dz * dz));
  }
  return m;
}

struct FrontStats {
  double h_min = std::numeric_limits<double>::infinity();
  double h_max = -std::numeric_limits<double>::infinity();
  double grad = 0.0, speed = 0.0, dt = 0.0, spacing = 0.0;
};

void accumulate(FrontStats& st, const ContactHamiltonian& h, double t, const LegendrianFront& f) {
  for (const auto& x : f.points) {
    const Jet4 j = h.jet(t, x.q, x.p, x.z);
    st.h_min = std::min(st.h_min, j.v);
    st.h_max = std::max(st.h_max, j.v);
    st.grad = std::max(st.grad, std::sqrt(j.d[1] * j.d[1] + j.d[2] * j.d[2] + j.d[3] * j.d[3]));
    st.dt = std::max(st.dt, std::fabs(j.d[0]));
    const auto v = contact_vector_field(h, t, x.q, x.p, x.z);
    st.speed = std::max(st.speed, std::sqrt(v[0] * v[0] + v[1] * v[1] + v[2] * v[2]));
  }
  st.spacing = std::max(st.spacing, max_segment(f));
}

std::string fmt(double x) {
  std::ostringstream os;
  os << x;
  return os.str();
}

}  // namespace

GfqiFamily build_family(std::shared_ptr<const ContactHamiltonian> h, const FamilyOptions& opt, const Gfqi& base) {
  if (opt.time_samples < 2) throw InvalidInput("family: at least 2 time samples required");
  if (opt.steps < 1) throw InvalidInput("family: steps must be positive");
  GfqiFamily fam;
  fam.h = h;
  fam.base = base;
  switch (h->cls()) {
    case HamiltonianClass::constant: {
      const double c = h->constant_value();
      fam.construction = "reeb";
      fam.member_at = [base, c](double t) { return add_constant(base, c * t); };
      break;
    }
    case HamiltonianClass::base_function: {
      const CircleFunction f = h->base_function();
      fam.construction = "translation";
      fam.member_at = [base, f](double t) { return add_base_function(base, f.scaled(t)); };
      break;
    }
    case HamiltonianClass::momentum: {
      const MomentumProfile prof = h->momentum_profile();
      const int fine = opt.pipeline.fine;
      // One decision for the whole family keeps the fiber dimension fixed.
      const bool fold =
          transport_graphicality(base, MomentumFlowMap(prof, 1.0), fine) < opt.pipeline.min_graphicality;
      if (fold && !opt.pipeline.allow_fold) throw UnsupportedClass("momentum family folds and folding is disabled");
      fam.construction = fold ? "momentum-fold" : "momentum-transport";
      fam.member_at = [base, prof, fine, fold](double t) {
        if (fold) return fold_momentum(base, prof, t);
        if (t == 0.0) return base;
        return transport(base, std::make_shared<MomentumFlowMap>(prof, t), fine);
      };
      break;
    }
    case HamiltonianClass::lifted: {
      if (base.fiber_dim() != 0)
        throw UnsupportedClass("lifted family '" + h->text() + "' needs a fiberless base Gfqi");
      const int fine = opt.pipeline.fine, k = opt.steps;
      HamiltonianFlowMap probe(h, 0.0, 1.0, flow_steps(*h, 1.0, k));
      const double g = transport_graphicality(base, probe, fine);
      if (g < opt.pipeline.min_graphicality)
        throw UnsupportedClass("lifted family '" + h->text() + "' folds the front (graphicality " + fmt(g) + ")");
      fam.construction = "slice-transport";
      fam.member_at = [base, h, fine, k](double t) {
        if (t == 0.0) return base;
        return transport(base, std::make_shared<HamiltonianFlowMap>(h, 0.0, t, flow_steps(*h, t, k)), fine);
      };
      break;
    }
    case HamiltonianClass::general:
      throw UnsupportedClass("no family construction for z-dependent Hamiltonian '" + h->text() + "'");
  }
  for (int i = 0; i < opt.time_samples; ++i) {
    const double t = static_cast<double>(i) / (opt.time_samples - 1);
    fam.times.push_back(t);
    fam.members.push_back(family_member(fam.member_at(t), t));
  }
  return fam;
}

bool FamilyReport::pass() const {
  for (const auto& o : obligations)
    if (!o.pass) return false;
  return true;
}

std::string FamilyReport::failure() const {
  for (const auto& o : obligations)
    if (!o.pass) return o.name + ": " + o.witness;
  return {};
}

FamilyReport validate_family(const GfqiFamily& fam, const FamilyOptions& opt, const GfqiFamily* comparison) {
  FamilyReport rep;
  const ContactHamiltonian& h = *fam.h;
  const std::size_t m = fam.members.size();
  WavefrontOptions wo;
  wo.n_q = opt.n_front;

  // (1) endpoint front against pointwise transport.
  std::vector<LegendrianFront> fronts(m);
  for (std::size_t i = 0; i < m; ++i) fronts[i] = transported_front(fam, fam.times[i], opt);
  std::vector<LegendrianFront> waves(m);
  for (std::size_t i = 0; i < m; ++i) waves[i] = wavefront(fam.members[i], wo);
  rep.tol_front = 5.0 / opt.n_front;
  rep.front_distance = hausdorff_distance(waves.back(), fronts.back());
  {
    Obligation o{"endpoint-front", rep.front_distance <= rep.tol_front, rep.tol_front - rep.front_distance, ""};
    o.witness = "Hausdorff " + fmt(rep.front_distance) + " vs tol_front " + fmt(rep.tol_front) + " at t=" +
                fmt(fam.times.back());
    rep.obligations.push_back(o);
  }

  // (2) Lemma bounds per consecutive pair, min/max over fronts at t_i, the midpoint and t_{i+1}.
  Obligation lemma{"lemma-bounds", true, std::numeric_limits<double>::infinity(), ""};
  Obligation close{"consecutive-fronts", true, std::numeric_limits<double>::infinity(), ""};
  for (std::size_t i = 0; i + 1 < m; ++i) {
    const double t0 = fam.times[i], t1 = fam.times[i + 1], dt = t1 - t0;
    FrontStats st;
    accumulate(st, h, t0, fronts[i]);
    accumulate(st, h, 0.5 * (t0 + t1), transported_front(fam, 0.5 * (t0 + t1), opt));
    accumulate(st, h, t1, fronts[i + 1]);
    const SpectralPair pair = spectral_pair(ominus(fam.members[i + 1], fam.members[i]), opt.spectral);
    LemmaRow row;
    row.t0 = t0;
    row.t1 = t1;
    row.minus = pair.minus;
    row.plus = pair.plus;
    row.lower = dt * st.h_min;
    row.upper = dt * st.h_max;
    row.tol = pair.tol_spec + dt * (0.5 * st.grad * st.spacing + 0.25 * dt * (st.dt + st.grad * st.speed)) + 1e-6;
    const double slack = std::min(row.minus - (row.lower - row.tol), (row.upper + row.tol) - row.plus);
    row.pass = slack >= 0.0;
    if (slack < lemma.margin) {
      lemma.margin = slack;
      lemma.witness = "[" + fmt(t0) + "," + fmt(t1) + "]: l- = " + fmt(row.minus) + ", l+ = " + fmt(row.plus) +
                      ", bounds [" + fmt(row.lower) + ", " + fmt(row.upper) + "] +- " + fmt(row.tol);
    }
    lemma.pass = lemma.pass && row.pass;
    rep.lemma.push_back(row);

    // (3) consecutive wavefronts move at most speed * dt * margin.
    const double d = hausdorff_distance(waves[i], waves[i + 1]);
    const double bound = st.speed * dt * opt.front_margin + rep.tol_front;
    if (bound - d < close.margin) {
      close.margin = bound - d;
      close.witness = "[" + fmt(t0) + "," + fmt(t1) + "]: distance " + fmt(d) + " vs " + fmt(bound);
    }
    close.pass = close.pass && d <= bound;
  }
  rep.obligations.push_back(lemma);
  rep.obligations.push_back(close);

  // (4) monotonicity against a comparison family generated by K >= H.
  if (comparison) {
    if (comparison->times != fam.times) throw InvalidInput("comparison family has different time samples");
    Obligation mono{"monotonicity", true, std::numeric_limits<double>::infinity(), ""};
    for (std::size_t i = 0; i < m; ++i) {
      const SpectralPair a = spectral_pair(fam.members[i], opt.spectral);
      const SpectralPair b = spectral_pair(comparison->members[i], opt.spectral);
      const double tol = a.tol_spec + b.tol_spec;
      const double slack = std::min(b.minus - a.minus, b.plus - a.plus) + tol;
      if (slack < mono.margin) {
        mono.margin = slack;
        mono.witness = "t=" + fmt(fam.times[i]) + ": H gives (" + fmt(a.minus) + ", " + fmt(a.plus) + "), K gives (" +
                       fmt(b.minus) + ", " + fmt(b.plus) + ")";
      }
      mono.pass = mono.pass && slack >= 0.0;
    }
    rep.obligations.push_back(mono);
  }
  return rep;
}

GfqiFamily family_for_isotopy(std::shared_ptr<const ContactHamiltonian> h, const FamilyOptions& opt,
                              const Gfqi& base) {
  GfqiFamily fam = build_family(std::move(h), opt, base);
  const FamilyReport rep = validate_family(fam, opt);
  if (!rep.pass()) throw PipelineError("family for '" + fam.h->text() + "' rejected: " + rep.failure());
  return fam;
}

void CerfDiagram::write_csv(std::ostream& os) const {
  os << "t,c,q,p,branch\n";
  for (const auto& x : points) os << x.t << ',' << x.c << ',' << x.q << ',' << x.p << ',' << x.branch << '\n';
}

CerfDiagram cerf_diagram(const GfqiFamily& fam, const Gfqi& ref, const CerfOptions& opt) {
  CerfDiagram out;
  const ContactHamiltonian& h = *fam.h;
  NewtonOptions nopt;
  nopt.tol = opt.wave.tol_crit;
  std::vector<CerfPoint> previous;
  int next_branch = 0;
  for (std::size_t i = 0; i < fam.members.size(); ++i) {
    const double t = fam.times[i];
    const Gfqi& st = fam.members[i];
    const int d = st.fiber_dim();
    for (const auto& x : wavefront(st, opt.wave).points)
      out.max_abs_h = std::max(out.max_abs_h, std::fabs(h(t, x.q, x.p, x.z)));
    const auto cps = critical_points(ominus(st, ref), opt.wave);
    const Gfqi diff = ominus(st, ref);
    const Gfqi up = ominus(fam.member_at(t + opt.dt_fd), ref);
    const Gfqi down = ominus(fam.member_at(t - opt.dt_fd), ref);
    std::vector<CerfPoint> current;
    for (const auto& cp : cps) {
      CerfPoint pt;
      pt.t = t;
      pt.c = cp.value;
      pt.q = cp.q;
      std::vector<double> e(cp.e.begin(), cp.e.begin() + d);
      double v = 0.0, dq = 0.0;
      st.eval_slice(e, {&pt.q, 1}, {&v, 1}, {&dq, 1});
      pt.p = -dq;
      pt.z = v;
      pt.h_value = h(t, pt.q, pt.p, pt.z);
      current.push_back(pt);
      if (min_abs_hessian_eigenvalue(diff, cp.q, cp.e) < opt.min_hessian) continue;
      const CriticalPoint a = refine_critical_point(up, cp.q, cp.e, nopt);
      const CriticalPoint b = refine_critical_point(down, cp.q, cp.e, nopt);
      auto near = [&](const CriticalPoint& c) {
        double dist = circle_distance(c.q, cp.q);
        for (std::size_t j = 0; j < c.e.size(); ++j) dist = std::max(dist, std::fabs(c.e[j] - cp.e[j]));
        return dist < 1e-2;
      };
      if (a.converged && b.converged && near(a) && near(b)) {
        current.back().simple = true;
        current.back().slope = (a.value - b.value) / (2.0 * opt.dt_fd);
      }
    }
    // Greedy branch matching against the previous time sample.
    std::vector<std::tuple<double, std::size_t, std::size_t>> pairs;
    const double dt = i > 0 ? t - fam.times[i - 1] : 0.0;
    for (std::size_t a = 0; a < current.size(); ++a)
      for (std::size_t b = 0; b < previous.size(); ++b) {
        const double pred = previous[b].c + (previous[b].simple ? previous[b].slope * dt : 0.0);
        const double dq = circle_distance(current[a].q, previous[b].q);
        const double dc = std::fabs(current[a].c - pred);
        if (dq <= 0.1 && dc <= 0.05 + 0.5 * dt * out.max_abs_h) pairs.emplace_back(dq + dc, a, b);
      }
    std::sort(pairs.begin(), pairs.end());
    std::vector<char> used_a(current.size(), 0), used_b(previous.size(), 0);
    for (const auto& [cost, a, b] : pairs) {
      if (used_a[a] || used_b[b]) continue;
      used_a[a] = used_b[b] = 1;
      current[a].branch = previous[b].branch;
    }
    for (auto& pt : current)
      if (pt.branch < 0) pt.branch = next_branch++;
    out.points.insert(out.points.end(), current.begin(), current.end());
    previous = std::move(current);
  }
  out.slope_tol = opt.slope_tol >= 0.0 ? opt.slope_tol : 0.05 * out.max_abs_h;
  for (const auto& pt : out.points) {
    if (!pt.simple) {
      ++out.skipped_points;
      continue;
    }
    ++out.simple_points;
    out.worst_slope_error = std::max(out.worst_slope_error, std::fabs(pt.slope - pt.h_value));
  }
  return out;
}

}  // namespace legspec
