#include "legspec/spectral.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <sstream>

#include "legspec/critical.hpp"
#include "legspec/error.hpp"

namespace legspec {

FilteredComplex build_filtration(const Gfqi& s, const LatticeConfig& cfg, LatticeSample* sample_out) {
  LatticeSample sample = sample_gfqi(s, cfg);
  FilteredComplex fc = build_cubical_filtration(sample.box.domain, sample.values, sample.box.b);
  if (sample_out) *sample_out = std::move(sample);
  return fc;
}

namespace {

struct Refined {
  double value;
  bool ok;
  std::string note;
};

Refined refine_birth(const Gfqi& s, const FilteredComplex& fc, const LatticeSample& sample, std::uint32_t pos,
                     double tol_spec, double tol_crit) {
  const auto& dom = sample.box.domain;
  const std::size_t v = cell_argmax_vertex(dom, sample.values, fc.codes[pos]);
  const std::size_t n = dom.base.size();
  const double q = dom.base.point(static_cast<long long>(v % n));
  std::vector<double> e(dom.fiber_dim());
  dom.fiber_point(v / n, e);
  NewtonOptions opt;
  opt.tol = tol_crit;
  opt.trust = std::max(dom.base.spacing(), 0.02);
  const auto c = refine_critical_point(s, q, e, opt);
  const double raw = fc.values[pos];
  std::ostringstream os;
  if (!c.converged) {
    os << "refinement from birth " << raw << " did not converge (|grad|=" << c.grad_norm << ")";
    return {raw, false, os.str()};
  }
  if (std::fabs(c.value - raw) > tol_spec) {
    os << "refined critical value " << c.value << " is farther than tol_spec from birth " << raw;
    return {raw, false, os.str()};
  }
  return {c.value, true, {}};
}

}  // namespace

SpectralPair spectral_pair(const Gfqi& s, const SpectralConfig& cfg) {
  LatticeSample sample;
  const FilteredComplex fc = build_filtration(s, cfg.lattice, &sample);
  const PersistenceResult pr = reduce(fc);

  SpectralPair out;
  out.stats = pr.stats;
  out.degree_minus = s.index();
  out.r_plus = sample.box.r_plus;
  out.r_minus = sample.box.r_minus;
  out.b = sample.box.b;
  const double spacing = std::max(sample.box.domain.base.spacing(),
                                  s.fiber_dim() > 0 ? 2.0 * sample.box.r_plus / std::max(2, cfg.lattice.fiber_intervals)
                                                    : 0.0);
  out.tol_spec = 2.0 * lattice_gradient_bound(sample) * spacing;

  const EssentialClass* lo = nullptr;
  const EssentialClass* hi = nullptr;
  for (const auto& ec : pr.essential) {
    if (ec.degree == out.degree_minus) lo = &ec;
    if (ec.degree == out.degree_minus + 1) hi = &ec;
  }
  if (pr.essential.size() != 2 || !lo || !hi) {
    std::ostringstream os;
    os << "expected 2 essential classes in degrees " << out.degree_minus << "," << out.degree_minus + 1 << ", found "
       << pr.essential.size() << " [";
    for (const auto& ec : pr.essential) os << "(deg " << ec.degree << " at " << ec.birth << ")";
    os << "]; check box radius (R+=" << out.r_plus << ", R-=" << out.r_minus << "), b=" << out.b
       << " or resolution";
    throw PipelineError(os.str());
  }
  out.raw_minus = out.minus = lo->birth;
  out.raw_plus = out.plus = hi->birth;
  if (cfg.refine) {
    const auto rm = refine_birth(s, fc, sample, lo->position, out.tol_spec, cfg.tol_crit);
    const auto rp = refine_birth(s, fc, sample, hi->position, out.tol_spec, cfg.tol_crit);
    out.minus = rm.value;
    out.plus = rp.value;
    out.refined_minus = rm.ok;
    out.refined_plus = rp.ok;
    if (!rm.ok) out.diagnostics.push_back("l-: " + rm.note);
    if (!rp.ok) out.diagnostics.push_back("l+: " + rp.note);
    if (out.minus > out.plus) {
      out.diagnostics.push_back("refined values out of order; reporting lattice births");
      out.minus = out.raw_minus;
      out.plus = out.raw_plus;
      out.refined_minus = out.refined_plus = false;
    }
  }
  if (std::fabs(out.plus - out.minus) <= out.tol_spec && out.plus != out.minus)
    out.diagnostics.push_back("l- and l+ within tol_spec of each other (clustered)");
  return out;
}

double fiber_spectral_value(const Gfqi& s, double q, const SpectralConfig& cfg) {
  const Gfqi frozen = gfqi_from_callable(
      s.form(), s.bounds(), [s, q](double, std::span<const double> e) { return s.eval(q, e); }, "fiber@q");
  SpectralConfig c = cfg;
  c.lattice.n_q = 8;
  c.refine = false;
  LatticeSample sample;
  const FilteredComplex fc = build_filtration(frozen, c.lattice, &sample);
  const PersistenceResult pr = reduce(fc);
  for (const auto& ec : pr.essential)
    if (ec.degree == s.index()) return ec.birth;
  throw PipelineError("fiber function has no essential class in degree d_-");
}

ConvergenceReport convergence_study(const Gfqi& s, const std::vector<int>& resolutions, const SpectralConfig& base) {
  if (resolutions.size() < 2) throw InvalidInput("convergence_study needs at least two resolutions");
  ConvergenceReport rep;
  for (int r : resolutions) {
    SpectralConfig cfg = base;
    cfg.lattice.n_q = r;
    cfg.lattice.fiber_intervals = std::max(8, r / 2);
    const auto t0 = std::chrono::steady_clock::now();
    const auto sp = spectral_pair(s, cfg);
    ConvergenceRow row;
    row.resolution = r;
    row.raw_minus = sp.raw_minus;
    row.raw_plus = sp.raw_plus;
    row.minus = sp.minus;
    row.plus = sp.plus;
    row.tol_spec = sp.tol_spec;
    row.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    rep.rows.push_back(row);
  }
  // Drift between consecutive resolutions should not grow beyond first-order expectations.
  for (std::size_t k = 2; k < rep.rows.size(); ++k) {
    const double prev_m = std::fabs(rep.rows[k - 1].raw_minus - rep.rows[k - 2].raw_minus);
    const double cur_m = std::fabs(rep.rows[k].raw_minus - rep.rows[k - 1].raw_minus);
    const double prev_p = std::fabs(rep.rows[k - 1].raw_plus - rep.rows[k - 2].raw_plus);
    const double cur_p = std::fabs(rep.rows[k].raw_plus - rep.rows[k - 1].raw_plus);
    const double slack = 1e-12;
    if (cur_m > 1.5 * prev_m + slack)
      rep.flags.push_back("l- drift grew at resolution " + std::to_string(rep.rows[k].resolution));
    if (cur_p > 1.5 * prev_p + slack)
      rep.flags.push_back("l+ drift grew at resolution " + std::to_string(rep.rows[k].resolution));
  }
  return rep;
}

}  // namespace legspec
