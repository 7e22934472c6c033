#include "legspec/flow.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "legspec/error.hpp"
#include "legspec/grid.hpp"

namespace legspec {

std::string ReebMap::describe() const {
  std::ostringstream os;
  os << "reeb[" << c_ << "]";
  return os.str();
}

TranslationMap::TranslationMap(CircleFunction f)
    : f_(std::move(f)), sup_f_(f_.sup_abs()), sup_df_(f_.sup_abs_derivative()) {}

JetPoint TranslationMap::apply(const JetPoint& x) const {
  return {x.q, x.p - f_.derivative(x.q), x.z + f_.value(x.q)};
}

JetPoint MomentumFlowMap::apply(const JetPoint& x) const {
  const double h = h_.h(x.p), dh = h_.dh(x.p);
  return {x.q + tau_ * dh, x.p, x.z + tau_ * (h - x.p * dh)};
}

JetMap::Displacement MomentumFlowMap::displacement_bound(double p_max) const {
  return {std::fabs(tau_) * (h_.sup_h + p_max * h_.sup_dh), 0.0};
}

std::string MomentumFlowMap::describe() const {
  std::ostringstream os;
  os << "pflow[" << h_.label << "," << tau_ << "]";
  return os.str();
}

int required_steps(const ContactHamiltonian& h, double t0, double t1) {
  const double r = std::isfinite(h.flags().p_support_radius) ? h.flags().p_support_radius : 10.0;
  const double g = h.gradient_bound(r);
  return std::max(8, static_cast<int>(std::ceil(40.0 * std::fabs(t1 - t0) * g)));
}

JetPoint rk4_flow(const ContactHamiltonian& h, JetPoint x, double t0, double t1, int steps) {
  const double dt = (t1 - t0) / steps;
  auto f = [&](double t, const JetPoint& y) {
    const auto v = contact_vector_field(h, t, y.q, y.p, y.z);
    return JetPoint{v[0], v[1], v[2]};
  };
  auto axpy = [](const JetPoint& y, double a, const JetPoint& k) {
    return JetPoint{y.q + a * k.q, y.p + a * k.p, y.z + a * k.z};
  };
  for (int s = 0; s < steps; ++s) {
    const double t = t0 + s * dt;
    const JetPoint k1 = f(t, x);
    const JetPoint k2 = f(t + 0.5 * dt, axpy(x, 0.5 * dt, k1));
    const JetPoint k3 = f(t + 0.5 * dt, axpy(x, 0.5 * dt, k2));
    const JetPoint k4 = f(t + dt, axpy(x, dt, k3));
    x.q += dt / 6.0 * (k1.q + 2 * k2.q + 2 * k3.q + k4.q);
    x.p += dt / 6.0 * (k1.p + 2 * k2.p + 2 * k3.p + k4.p);
    x.z += dt / 6.0 * (k1.z + 2 * k2.z + 2 * k3.z + k4.z);
    if (!std::isfinite(x.p) || !std::isfinite(x.z) || std::fabs(x.p) > 1e12) {
      std::ostringstream os;
      os << "flow of '" << h.text() << "' escapes to infinity before t = " << t + dt;
      throw PipelineError(os.str());
    }
  }
  return x;
}

HamiltonianFlowMap::HamiltonianFlowMap(std::shared_ptr<const ContactHamiltonian> h, double t0, double t1, int steps)
    : h_(std::move(h)), t0_(t0), t1_(t1), steps_(steps > 0 ? steps : required_steps(*h_, t0, t1)) {}

JetPoint HamiltonianFlowMap::apply(const JetPoint& x) const { return rk4_flow(*h_, x, t0_, t1_, steps_); }

void HamiltonianFlowMap::apply_all(std::span<JetPoint> pts) const {
  const long long n = static_cast<long long>(pts.size());
  std::string failure;
#pragma omp parallel for schedule(static)
  for (long long i = 0; i < n; ++i) {
    try {
      pts[i] = rk4_flow(*h_, pts[i], t0_, t1_, steps_);
    } catch (const Error& e) {
#pragma omp critical(legspec_flow_error)
      failure = e.what();
    }
  }
  if (!failure.empty()) throw PipelineError(failure);
}

void HamiltonianFlowMap::apply_all_serial(std::span<JetPoint> pts) const {
  for (auto& x : pts) x = rk4_flow(*h_, x, t0_, t1_, steps_);
}

JetMap::Displacement HamiltonianFlowMap::displacement_bound(double p_max) const {
  // Speed bounds over a neighbourhood of the region times the duration.
  const double dt = std::fabs(t1_ - t0_);
  const double reach = std::min(p_max + 5.0, std::max(p_max, h_->flags().p_support_radius));
  double vz = 0.0, vp = 0.0;
  const int nq = 16, np = 41, nz = h_->flags().z_independent ? 1 : 8, nt = h_->flags().time_dependent ? 5 : 1;
  for (int it = 0; it < nt; ++it)
    for (int iq = 0; iq < nq; ++iq)
      for (int ip = 0; ip < np; ++ip)
        for (int iz = 0; iz < nz; ++iz) {
          const double t = nt == 1 ? t0_ : t0_ + (t1_ - t0_) * it / (nt - 1);
          const auto v = contact_vector_field(*h_, t, static_cast<double>(iq) / nq,
                                              -reach + 2.0 * reach * ip / (np - 1), static_cast<double>(iz) / nz);
          vp = std::max(vp, std::fabs(v[1]));
          vz = std::max(vz, std::fabs(v[2]));
        }
  return {1.25 * dt * vz + 1e-9, 1.25 * dt * vp + 1e-9};
}

std::string HamiltonianFlowMap::describe() const {
  std::ostringstream os;
  os << "flow[" << h_->text() << "," << t0_ << "->" << t1_ << "]";
  return os.str();
}

LegendrianFront flow(const ContactHamiltonian& h, const LegendrianFront& front, double t0, double t1, int steps) {
  const int need = required_steps(h, t0, t1);
  if (steps > 0 && steps < need)
    throw InvalidInput("flow: " + std::to_string(steps) + " steps is below the guard " + std::to_string(need));
  const int use = steps > 0 ? steps : need;
  LegendrianFront out = front;
  const long long n = static_cast<long long>(front.points.size());
  std::string failure;
#pragma omp parallel for schedule(static)
  for (long long i = 0; i < n; ++i) {
    const auto& x = front.points[i];
    try {
      const JetPoint y = rk4_flow(h, {x.q, x.p, x.z}, t0, t1, use);
      out.points[i] = {wrap_unit(y.q), y.p, y.z, x.branch};
    } catch (const Error& e) {
#pragma omp critical(legspec_flow_error)
      failure = e.what();
    }
  }
  if (!failure.empty()) throw PipelineError(failure);
  const double defect = legendrian_defect(out);
  if (defect > out.tol_leg) {
    std::ostringstream os;
    os << "flow: Legendrian defect " << defect << " exceeds " << out.tol_leg << "; resample the front or raise steps above "
       << 2 * use;
    throw PipelineError(os.str());
  }
  return out;
}

namespace {

double segment_length(const JetPoint& a, const JetPoint& b) {
  const double dq = b.q - a.q, dp = b.p - a.p, dz = b.z - a.z;
  return std::sqrt(dq * dq + dp * dp + dz * dz);
}

}  // namespace

LegendrianFront push_zero_section(const std::vector<std::shared_ptr<const JetMap>>& maps, int n, double degrade) {
  return push_curve([](double s) { return JetPoint{s, 0.0, 0.0}; }, maps, n, degrade);
}

LegendrianFront push_curve(const std::function<JetPoint(double)>& curve,
                           const std::vector<std::shared_ptr<const JetMap>>& maps, int n, double degrade) {
  std::vector<double> params(n);
  for (int i = 0; i < n; ++i) params[i] = static_cast<double>(i) / n;
  auto push = [&](std::span<const double> s) {
    std::vector<JetPoint> pts(s.size());
    for (std::size_t i = 0; i < s.size(); ++i) pts[i] = curve(s[i]);
    for (const auto& m : maps) m->apply_all(pts);
    return pts;
  };
  std::vector<JetPoint> pts = push(params);
  for (int round = 0; round < 8; ++round) {
    const std::size_t m = pts.size();
    std::vector<double> len(m);
    for (std::size_t i = 0; i < m; ++i) {
      JetPoint next = pts[(i + 1) % m];
      if (i + 1 == m) next.q += 1.0;
      len[i] = segment_length(pts[i], next);
    }
    const double limit = degrade / n;
    std::vector<double> extra;
    for (std::size_t i = 0; i < m; ++i)
      if (len[i] > limit) {
        const double s1 = i + 1 == m ? params[0] + 1.0 : params[i + 1];
        extra.push_back(0.5 * (params[i] + s1));
      }
    if (extra.empty() || m + extra.size() > static_cast<std::size_t>(16 * n)) break;
    const auto extra_pts = push(extra);
    std::vector<std::pair<double, JetPoint>> merged;
    for (std::size_t i = 0; i < m; ++i) merged.emplace_back(params[i], pts[i]);
    for (std::size_t i = 0; i < extra.size(); ++i) {
      JetPoint y = extra_pts[i];
      double s = extra[i];
      if (s >= 1.0) {
        s -= 1.0;
        y.q -= 1.0;
      }
      merged.emplace_back(s, y);
    }
    std::sort(merged.begin(), merged.end(), [](const auto& a, const auto& b) { return a.first < b.first; });
    params.clear();
    pts.clear();
    for (const auto& [s, y] : merged) {
      params.push_back(s);
      pts.push_back(y);
    }
  }
  LegendrianFront out;
  for (const auto& y : pts) out.points.push_back({wrap_unit(y.q), y.p, y.z, 0});
  return out;
}

}  // namespace legspec
