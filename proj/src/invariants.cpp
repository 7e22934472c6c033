#include "legspec/invariants.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <numbers>
#include <random>
#include <sstream>

#include "legspec/error.hpp"
#include "legspec/flow.hpp"
#include "legspec/grid.hpp"

namespace legspec {

void SnapLog::merge(const SnapLog& other) {
  comparisons += other.comparisons;
  events.insert(events.end(), other.events.begin(), other.events.end());
}

namespace {

long long snapped(double x, double eps, SnapLog* log, const std::string& context, bool& hit) {
  if (!(eps >= 0.0 && eps < 0.5)) throw InvalidInput("robust rounding needs 0 <= eps < 0.5");
  if (!std::isfinite(x)) throw InvalidInput("robust rounding of a non-finite value");
  if (log) ++log->comparisons;
  const double r = std::nearbyint(x);
  const double d = std::fabs(x - r);
  hit = d <= eps;
  if (hit && d > 1e-9 && log) log->events.push_back({x, static_cast<long long>(r), context});
  return static_cast<long long>(r);
}

/// Uniform draw rounded to 4 decimals so that expression text reproduces it.
double draw(std::mt19937_64& rng, double lo, double hi) {
  const double x = std::uniform_real_distribution<double>(lo, hi)(rng);
  return std::round(x * 1e4) / 1e4;
}

ContactomorphismHandle random_atom(std::mt19937_64& rng, const ConjugatorOptions& opt) {
  const int kinds = opt.z_dependent ? 4 : 3;
  const int kind = std::uniform_int_distribution<int>(0, kinds - 1)(rng);
  std::ostringstream os;
  os << std::setprecision(6);
  switch (kind) {
    case 0: {
      // f = a1 cos(2 pi q + f1) + a2 cos(4 pi q + f2), sup |f| <= amplitude.
      const double a1 = draw(rng, -1.0, 1.0) * opt.translation_amplitude * 0.6;
      const double a2 = draw(rng, -1.0, 1.0) * opt.translation_amplitude * 0.4;
      const double f1 = draw(rng, 0.0, 1.0), f2 = draw(rng, 0.0, 1.0);
      os << a1 << "*cos(2*pi*(q - " << f1 << ")) + " << a2 << "*cos(4*pi*(q - " << f2 << "))";
      return ContactomorphismHandle::translation(CircleFunction::from_expression(Expression::parse(os.str())));
    }
    case 1: {
      const double a = draw(rng, -1.0, 1.0) * opt.flow_amplitude * 0.6;
      const double b = draw(rng, -1.0, 1.0) * opt.flow_amplitude * 0.4;
      const double f1 = draw(rng, 0.0, 1.0);
      os << "(" << a << "*cos(2*pi*(q - " << f1 << ")) + " << b << "*p)*plateau(p, 2.5, 3.5)";
      return ContactomorphismHandle::flow(std::make_shared<ContactHamiltonian>(lift_hamiltonian(os.str(), 3.5)));
    }
    case 2: return ContactomorphismHandle::reeb(draw(rng, -1.0, 1.0) * opt.reeb_amplitude);
    default: {
      const double a = draw(rng, -1.0, 1.0) * opt.flow_amplitude * 0.5;
      const double b = draw(rng, -1.0, 1.0) * opt.flow_amplitude * 0.5;
      const double f1 = draw(rng, 0.0, 1.0);
      os << "(" << a << "*sin(2*pi*(z - " << f1 << ")) + " << b << "*cos(2*pi*q))*plateau(p, 2.5, 3.5)";
      return ContactomorphismHandle::flow(
          std::make_shared<ContactHamiltonian>(ContactHamiltonian::parse(os.str(), 3.5)));
    }
  }
}

/// Runs f(i) for i < n in parallel; the first error (by index) is rethrown.
template <class F>
void parallel_jobs(int n, F f) {
  std::vector<std::string> errors(n);
  std::vector<int> kinds(n, 0);
#pragma omp parallel for schedule(dynamic, 1)
  for (int i = 0; i < n; ++i) {
    try {
      f(i);
    } catch (const UnsupportedClass& e) {
      errors[i] = e.what();
      kinds[i] = 1;
    } catch (const InvalidInput& e) {
      errors[i] = e.what();
      kinds[i] = 2;
    } catch (const std::exception& e) {
      errors[i] = e.what();
      kinds[i] = 3;
    }
  }
  for (int i = 0; i < n; ++i) {
    if (errors[i].empty()) continue;
    const std::string msg = "job " + std::to_string(i) + ": " + errors[i];
    if (kinds[i] == 1) throw UnsupportedClass(msg);
    if (kinds[i] == 2) throw InvalidInput(msg);
    throw PipelineError(msg);
  }
}

}  // namespace

long long robust_floor(double x, double eps, SnapLog* log, const std::string& context) {
  bool hit = false;
  const long long r = snapped(x, eps, log, context, hit);
  return hit ? r : static_cast<long long>(std::floor(x));
}

long long robust_ceil(double x, double eps, SnapLog* log, const std::string& context) {
  bool hit = false;
  const long long r = snapped(x, eps, log, context, hit);
  return hit ? r : static_cast<long long>(std::ceil(x));
}

SpectralReport ell_pm(const ContactomorphismHandle& phi, const InvariantConfig& cfg) {
  SpectralReport r;
  r.handle = phi.describe();
  const Gfqi s = phi.image_of_zero_section(cfg.pipeline);
  const SpectralPair pair = spectral_pair(s, cfg.spectral);
  r.minus = pair.minus;
  r.plus = pair.plus;
  r.tol_spec = pair.tol_spec;
  r.fiber_dim = s.fiber_dim();
  r.provenance = s.provenance();
  if (phi.periodic()) {
    r.has_integer_parts = true;
    r.floor_minus = robust_floor(r.minus, cfg.eps_int, &r.snaps, "floor l-(" + r.handle + ")");
    r.ceil_plus = robust_ceil(r.plus, cfg.eps_int, &r.snaps, "ceil l+(" + r.handle + ")");
  }
  return r;
}

ConjugatorSample make_conjugator_sample(std::uint64_t seed, const ConjugatorOptions& opt) {
  if (opt.size < 1) throw InvalidInput("conjugator sample size must be positive");
  if (opt.max_word_length < 1) throw InvalidInput("conjugator word length must be positive");
  ConjugatorSample s;
  s.seed = seed;
  s.members.push_back(ContactomorphismHandle::identity());
  std::mt19937_64 rng(seed);
  while (static_cast<int>(s.members.size()) < opt.size) {
    const int len = std::uniform_int_distribution<int>(1, opt.max_word_length)(rng);
    ContactomorphismHandle w;
    for (int k = 0; k < len; ++k) w = w.compose(random_atom(rng, opt));
    s.members.push_back(w);
  }
  return s;
}

std::shared_ptr<const ContactHamiltonian> random_periodic_hamiltonian(std::mt19937_64& rng, double level,
                                                                      bool z_dependent) {
  const double c = draw(rng, -level, level), a = draw(rng, -0.15, 0.15), f = draw(rng, 0.0, 1.0);
  const double b = z_dependent ? draw(rng, -0.1, 0.1) : 0.0, g = draw(rng, 0.0, 1.0);
  std::ostringstream os;
  os << std::setprecision(6) << "(" << c << " + " << a << "*cos(2*pi*(q - " << f << "))";
  if (z_dependent) os << " + " << b << "*sin(2*pi*(z - " << g << "))";
  os << ")*plateau(p, 3, 4)";
  if (z_dependent) return std::make_shared<ContactHamiltonian>(ContactHamiltonian::parse(os.str(), 4.0));
  return std::make_shared<ContactHamiltonian>(lift_hamiltonian(os.str(), 4.0));
}

std::string to_string(OrderResult::Verdict v) {
  return v == OrderResult::Verdict::violated ? "violated" : "consistent_on_sample";
}

OrderResult order_test(const ContactomorphismHandle& phi, const ContactomorphismHandle& psi,
                       const ConjugatorSample& sample, const InvariantConfig& cfg) {
  if (phi.periodic() != psi.periodic()) throw InvalidInput("order_test: handles from different groups");
  const ContactomorphismHandle chi = phi.compose(psi.inverse());
  const int n = static_cast<int>(sample.size());
  std::vector<double> values(n), tols(n);
  parallel_jobs(n, [&](int i) {
    const auto pair = spectral_pair(chi.conjugate(sample.members[i]).image_of_zero_section(cfg.pipeline), cfg.spectral);
    values[i] = pair.plus;
    // Refined values carry the Newton tolerance on top of the lattice one.
    tols[i] = pair.tol_spec + cfg.spectral.tol_crit;
  });
  OrderResult r;
  r.values = values;
  r.margin = -std::numeric_limits<double>::infinity();
  for (int i = 0; i < n; ++i) {
    r.margin = std::max(r.margin, values[i]);
    r.tol = std::max(r.tol, tols[i]);
    if (r.verdict == OrderResult::Verdict::consistent_on_sample && values[i] > tols[i]) {
      r.verdict = OrderResult::Verdict::violated;
      r.witness = i;
      r.witness_description = sample.members[i].describe();
      r.value = values[i];
    }
  }
  return r;
}

GeneratorBounds sample_generator_bounds(const ContactHamiltonian& h, double scale, double p_range) {
  const double r = p_range > 0 ? p_range : (std::isfinite(h.flags().p_support_radius) ? h.flags().p_support_radius : 5.0);
  const int nq = 128, np = 257, nz = h.flags().z_independent ? 1 : 32, nt = h.flags().time_dependent ? 33 : 1;
  std::vector<double> mx(nt, -1e300), mn(nt, 1e300);
  for (int it = 0; it < nt; ++it) {
    const double t = nt == 1 ? 0.0 : static_cast<double>(it) / (nt - 1);
    for (int iq = 0; iq < nq; ++iq)
      for (int ip = 0; ip < np; ++ip)
        for (int iz = 0; iz < nz; ++iz) {
          const double v = h(t, static_cast<double>(iq) / nq, -r + 2.0 * r * ip / (np - 1), static_cast<double>(iz) / nz);
          mx[it] = std::max(mx[it], v);
          mn[it] = std::min(mn[it], v);
        }
  }
  GeneratorBounds g;
  if (nt == 1) {
    g.int_max = mx[0];
    g.int_min = mn[0];
  } else {
    for (int it = 0; it + 1 < nt; ++it) {
      g.int_max += 0.5 * (mx[it] + mx[it + 1]) / (nt - 1);
      g.int_min += 0.5 * (mn[it] + mn[it + 1]) / (nt - 1);
    }
  }
  // A negative scale runs the flow backwards and swaps the roles.
  if (scale >= 0) return {scale * g.int_max, scale * g.int_min};
  return {scale * g.int_min, scale * g.int_max};
}

MetricEstimate metric_estimate(const ContactomorphismHandle& phi, const ContactomorphismHandle& psi,
                               const ConjugatorSample& sample, const InvariantConfig& cfg,
                               const GeneratorBounds* generator) {
  if (!phi.periodic() || !psi.periodic()) throw InvalidInput("metric_estimate needs periodic handles");
  const ContactomorphismHandle chi = phi.compose(psi.inverse());
  const int n = static_cast<int>(sample.size());
  MetricEstimate m;
  m.minus.resize(n);
  m.plus.resize(n);
  parallel_jobs(n, [&](int i) {
    const auto pair = spectral_pair(chi.conjugate(sample.members[i]).image_of_zero_section(cfg.pipeline), cfg.spectral);
    m.minus[i] = pair.minus;
    m.plus[i] = pair.plus;
  });
  m.rho_osc.lower = m.rho_sup.lower = std::numeric_limits<long long>::min();
  for (int i = 0; i < n; ++i) {
    const std::string ctx = "conjugator " + std::to_string(i);
    const long long c = robust_ceil(m.plus[i], cfg.eps_int, &m.snaps, "ceil l+ " + ctx);
    const long long f = robust_floor(m.minus[i], cfg.eps_int, &m.snaps, "floor l- " + ctx);
    if (c - f > m.rho_osc.lower) {
      m.rho_osc.lower = c - f;
      m.argmax_osc = i;
    }
    const long long s = std::max(std::llabs(c), std::llabs(f));
    if (s > m.rho_sup.lower) {
      m.rho_sup.lower = s;
      m.argmax_sup = i;
    }
  }
  if (generator) {
    const long long c = robust_ceil(generator->int_max, cfg.eps_int, &m.snaps, "ceil int max H");
    const long long f = robust_floor(generator->int_min, cfg.eps_int, &m.snaps, "floor int min H");
    m.rho_osc.upper = c - f;
    m.rho_sup.upper = std::max(std::llabs(c), std::llabs(f));
    m.rho_osc.has_upper = m.rho_sup.has_upper = true;
    m.consistent = m.rho_osc.lower <= m.rho_osc.upper && m.rho_sup.lower <= m.rho_sup.upper;
  }
  return m;
}

NuEstimate nu_estimate(const ContactomorphismHandle& phi, int max_power, const InvariantConfig& cfg,
                       const ContactomorphismHandle* alpha) {
  if (max_power < 4) throw InvalidInput("nu_estimate needs K >= 4");
  NuEstimate nu;
  // alpha phi^k alpha^-1 (O) = alpha(phi(... phi(alpha^-1(O)))), built one power at a time.
  Gfqi inner = alpha ? alpha->inverse().image_of_zero_section(cfg.pipeline) : zero_section();
  std::vector<Gfqi> images;
  for (int k = 1; k <= max_power; ++k) {
    inner = phi.image_of(inner, cfg.pipeline);
    images.push_back(alpha ? alpha->image_of(inner, cfg.pipeline) : inner);
  }
  nu.ell_plus.resize(max_power);
  parallel_jobs(max_power, [&](int i) { nu.ell_plus[i] = spectral_pair(images[i], cfg.spectral).plus; });
  for (int k = 1; k <= max_power; ++k) {
    nu.per_k.push_back(nu.ell_plus[k - 1] / k);
    nu.ceil_seq.push_back(
        robust_ceil(nu.ell_plus[k - 1], cfg.eps_int, &nu.snaps, "ceil l+(phi^" + std::to_string(k) + ")"));
  }
  for (int i = 1; i <= max_power; ++i)
    for (int j = i; i + j <= max_power; ++j)
      if (nu.ceil_seq[i + j - 1] > nu.ceil_seq[i - 1] + nu.ceil_seq[j - 1])
        nu.subadditivity_violations.push_back("a_" + std::to_string(i + j) + " = " +
                                              std::to_string(nu.ceil_seq[i + j - 1]) + " > a_" + std::to_string(i) +
                                              " + a_" + std::to_string(j));
  nu.upper = std::numeric_limits<double>::infinity();
  for (int k = 1; k <= max_power; ++k) nu.upper = std::min(nu.upper, static_cast<double>(nu.ceil_seq[k - 1]) / k);
  nu.lower = std::numeric_limits<double>::infinity();
  for (int k = (max_power + 1) / 2; k <= max_power; ++k) nu.lower = std::min(nu.lower, nu.per_k[k - 1]);
  nu.estimate = nu.per_k.back();
  return nu;
}

double displacement_energy_bound(double q0, double p0, double r, double gap) {
  const double s = 2.0 * r + gap;
  if (s > 1.0 - 2.0 * r) throw InvalidInput("disk too wide to be displaced around the circle");
  std::ostringstream os;
  os << std::setprecision(17) << s << "*p*plateau(p - " << p0 << ", " << r + 0.02 << ", " << r + 0.1 << ")";
  const auto h = std::make_shared<ContactHamiltonian>(lift_hamiltonian(os.str(), std::fabs(p0) + r + 0.1));
  // Check that the time-1 flow moves the disk off itself.
  HamiltonianFlowMap map(h, 0.0, 1.0);
  for (int i = 0; i < 64; ++i)
    for (int j = 0; j < 16; ++j) {
      const double a = 2.0 * std::numbers::pi * i / 64, rr = 1.05 * r * (j + 1) / 16.0;
      const JetPoint y = map.apply({q0 + rr * std::cos(a), p0 + rr * std::sin(a), 0.0});
      // Same chordal q-distance as the disk bumps use; it never exceeds the circle distance.
      const double dq = std::sin(std::numbers::pi * circle_distance(y.q, q0)) / std::numbers::pi, dp = y.p - p0;
      if (dq * dq + dp * dp <= r * r)
        throw PipelineError("displacing flow " + os.str() + " does not displace the disk");
    }
  const GeneratorBounds g = sample_generator_bounds(*h);
  return g.int_max - g.int_min;
}

bool RigidityReport::pass() const {
  for (const auto& c : checks)
    if (!c.pass) return false;
  return !checks.empty();
}

RigidityReport rigidity_scenario(const std::string& which, const ConjugatorSample& sample,
                                 const RigidityOptions& opt, const InvariantConfig& cfg) {
  RigidityReport rep;
  rep.scenario = which;
  const int K = opt.max_power;
  auto check = [&](std::string name, double value, double expected, double tol, bool pass) {
    rep.checks.push_back({std::move(name), value, expected, tol, pass});
  };
  if (which == "A") {
    // h = 1 on |p| <= 3 and 0 <= h <= 1: O is fixed and z advances by 1.
    const auto h = std::make_shared<ContactHamiltonian>(lift_hamiltonian("plateau(p, 3, 4)", 4.0));
    const auto phi = ContactomorphismHandle::flow(h);
    const double nu = nu_estimate(phi, K, cfg).estimate;
    check("nu(phi)", nu, 1.0, opt.tol, std::fabs(nu - 1.0) <= opt.tol);
    const auto t = ContactomorphismHandle::translation(CircleFunction::from_expression(Expression::parse("0.3*cos(2*pi*q)")));
    const double nt = nu_estimate(phi, K, cfg, &t).estimate;
    check("nu(T phi T^-1), T = translation(0.3 cos)", nt, 1.0, opt.tol, std::fabs(nt - 1.0) <= opt.tol);
    for (std::size_t i = 0; i < sample.size(); ++i) {
      const double na = nu_estimate(phi, K, cfg, &sample.members[i]).estimate;
      check("nu(a phi a^-1), a = sample[" + std::to_string(i) + "]", na, 1.0, opt.tol, std::fabs(na - 1.0) <= opt.tol);
    }
  } else if (which == "B") {
    const double r = 0.15, p0 = 0.75;
    auto disk = [&](double q0) {
      std::ostringstream os;
      os << std::setprecision(17) << "0.02*bump((sin(pi*(q - " << q0 << "))/pi)^2 + (p - " << p0 << ")^2, 0, " << r * r
         << ")";
      return std::make_shared<ContactHamiltonian>(lift_hamiltonian(os.str(), p0 + r));
    };
    const auto h1 = disk(0.25), h2 = disk(0.75);
    const double e1 = displacement_energy_bound(0.25, p0, r);
    const double e2 = displacement_energy_bound(0.75, p0, r);
    // Hamiltonians supported in U_j have spectral values within the
    // displacement energy of U_j; the bound is e(U_1) + e(U_2).
    const auto phi = ContactomorphismHandle::flow(h1).compose(ContactomorphismHandle::flow(h2));
    const double bound = (e1 + e2) / K + opt.tol;
    const double nu = nu_estimate(phi, K, cfg).estimate;
    check("nu(phi1 phi2)", nu, 0.0, bound, std::fabs(nu) <= bound);
    for (std::size_t i = 0; i < sample.size(); ++i) {
      const std::string name = "nu(a phi1 phi2 a^-1), a = sample[" + std::to_string(i) + "]";
      try {
        const double na = nu_estimate(phi, K, cfg, &sample.members[i]).estimate;
        check(name, na, 0.0, bound, std::fabs(na) <= bound);
      } catch (const UnsupportedClass& e) {
        // The twist of a disk flow folds steep parts of alpha^-1(O); slice transport cannot follow.
        rep.skipped.push_back(name + ": " + e.what());
      }
    }
    // Comparison: H >= c on the zero wall; nu(phi_H) = sqrt(a^2 - b^2) with a = c + 0.3, b = 0.3.
    std::ostringstream os;
    os << std::setprecision(17) << opt.c << "*plateau(p, 3, 4) + 0.3*(1 + sin(2*pi*z))*plateau(p, 3, 4)";
    const auto hc = std::make_shared<ContactHamiltonian>(ContactHamiltonian::parse(os.str(), 4.0));
    const double nc = nu_estimate(ContactomorphismHandle::flow(hc), K, cfg).estimate;
    check("nu(phi_H), H >= c on the zero wall", nc, opt.c, opt.tol, nc >= opt.c - opt.tol);
    // On O the flow is z' = a + b sin(2 pi z); the mean speed of this circle ODE is sqrt(a^2 - b^2).
    const double exact = std::sqrt((opt.c + 0.3) * (opt.c + 0.3) - 0.09);
    check("nu(phi_H) against the averaged z-speed", nc, exact, opt.tol, std::fabs(nc - exact) <= opt.tol);
  } else {
    throw InvalidInput("unknown rigidity scenario '" + which + "' (expected A or B)");
  }
  return rep;
}

}  // namespace legspec
