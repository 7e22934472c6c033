// Acceptance suite: one PASS/FAIL line per criterion, exit status 1 if any fails.
#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iterator>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "homology_oracle.hpp"
#include "legspec/error.hpp"
#include "legspec/family.hpp"
#include "legspec/invariants.hpp"
#include "legspec/scenario.hpp"
#include "legspec/spectral.hpp"

using namespace legspec;

namespace {

struct Outcome {
  bool pass = true;
  std::string detail;
};

std::string fmt(double v) {
  std::ostringstream os;
  os.precision(4);
  os << v;
  return os.str();
}

/// Collects the worst case and the first failure of a criterion.
struct Tally {
  bool pass = true;
  int checks = 0;
  std::string first_failure;
  void check(bool ok, const std::string& what) {
    ++checks;
    if (!ok && pass) first_failure = what;
    pass = pass && ok;
  }
  Outcome done(const std::string& summary) const {
    return {pass, pass ? summary + " (" + std::to_string(checks) + " checks)" : "first failure: " + first_failure};
  }
};

CircleFunction random_function(std::mt19937_64& rng, int max_degree, double max_amplitude, TrigPolynomial* out = nullptr) {
  const int deg = std::uniform_int_distribution<int>(1, max_degree)(rng);
  const double amp = std::uniform_real_distribution<double>(0.1 * max_amplitude, max_amplitude)(rng);
  TrigPolynomial t = TrigPolynomial::random(rng, deg, amp);
  if (out) *out = t;
  CircleFunction f = t.to_function();
  f.label = "trig(seeded, degree " + std::to_string(deg) + ")";
  return f;
}

SpectralConfig jet_config() {
  SpectralConfig c;
  c.lattice.n_q = 256;
  c.lattice.fiber_intervals = 64;
  return c;
}

// 1
Outcome jet_oracle() {
  std::mt19937_64 rng(101);
  const SpectralConfig cfg = jet_config();
  Tally t;
  double worst = 0.0;
  for (int i = 0; i < 20; ++i) {
    TrigPolynomial tp;
    const CircleFunction f = random_function(rng, 4, 2.0, &tp);
    const auto pr = spectral_pair(gfqi_graph(f), cfg);
    const double tol = 2.0 * f.sup_abs_derivative(8192) / cfg.lattice.n_q;
    const double e = std::max(std::fabs(pr.minus - tp.min_value()), std::fabs(pr.plus - tp.max_value()));
    worst = std::max(worst, e / tol);
    t.check(e <= tol, "f" + std::to_string(i) + ": error " + fmt(e) + " > " + fmt(tol));
  }
  return t.done("worst error / tol = " + fmt(worst));
}

// 2
Outcome duality() {
  std::mt19937_64 rng(101);
  const SpectralConfig cfg = jet_config();
  Tally t;
  double worst = 0.0;
  for (int i = 0; i < 20; ++i) {
    const Gfqi l = gfqi_graph(random_function(rng, 4, 2.0));
    const auto a = spectral_pair(l, cfg), b = spectral_pair(negate(l), cfg);
    const double e = std::fabs(a.plus + b.minus), tol = 2.0 * std::max(a.tol_spec, b.tol_spec);
    worst = std::max(worst, e);
    t.check(e <= tol, "f" + std::to_string(i) + ": |l+(L) + l-(-L)| = " + fmt(e) + " > " + fmt(tol));
  }
  return t.done("worst |l+(L) + l-(-L)| = " + fmt(worst));
}

/// Seeded Legendrians of fiber dimension 0, 1 or 2.
Gfqi fold_legendrian(std::mt19937_64& rng) {
  const double phase = std::uniform_real_distribution<double>(0.0, 1.0)(rng);
  const double a = 0.3 + 0.05 * std::uniform_real_distribution<double>(0.0, 1.0)(rng);
  std::ostringstream os;
  os << a << "*sin(2*pi*(q - " << phase << "))";
  const auto t = ContactomorphismHandle::translation(CircleFunction::from_expression(Expression::parse(os.str())));
  return ContactomorphismHandle::flow("0.3*p^2*plateau(p, 3, 4)", 0.0, 1.0).compose(t).image_of_zero_section();
}

Gfqi stabilized(std::mt19937_64& rng, double coefficient) {
  return stabilize(gfqi_graph(random_function(rng, 3, 1.0)), QuadraticForm({coefficient}));
}

// 3
Outcome triangle() {
  std::mt19937_64 rng(303);
  Tally t;
  int max_dim = 0;
  for (int i = 0; i < 10; ++i) {
    Gfqi l = zero_section(), m = zero_section();
    if (i < 4) {
      l = fold_legendrian(rng);
      m = gfqi_graph(random_function(rng, 3, 1.0));
    } else if (i < 7) {
      l = stabilized(rng, -1.0);
      m = stabilized(rng, 1.0);
    } else {
      l = gfqi_graph(random_function(rng, 4, 2.0));
      m = gfqi_graph(random_function(rng, 4, 2.0));
    }
    const Gfqi sum = oplus(l, m);
    max_dim = std::max(max_dim, sum.fiber_dim());
    const auto a = spectral_pair(l), b = spectral_pair(m), c = spectral_pair(sum);
    const double tol = a.tol_spec + b.tol_spec + c.tol_spec;
    const std::string tag = "pair " + std::to_string(i) + " (d = " + std::to_string(sum.fiber_dim()) + ")";
    t.check(c.plus <= a.plus + b.plus + tol,
            tag + ": l+(L+L') = " + fmt(c.plus) + " > " + fmt(a.plus) + " + " + fmt(b.plus) + " + " + fmt(tol));
    t.check(c.minus <= a.minus + b.plus + tol, tag + ": mixed (pt,[N]) case fails");
    t.check(c.minus <= a.plus + b.minus + tol, tag + ": mixed ([N],pt) case fails");
  }
  return t.done("combined fiber dimension up to " + std::to_string(max_dim));
}

// 4
Outcome zero_law() {
  std::mt19937_64 rng(404);
  Tally t;
  double worst = 0.0;
  for (int i = 0; i < 10; ++i) {
    Gfqi l = zero_section();
    if (i < 4) {
      l = gfqi_graph(random_function(rng, 4, 2.0));
    } else if (i < 7) {
      l = stabilized(rng, i % 2 ? 1.0 : -1.0);
    } else {
      std::ostringstream os;
      os << "(" << 0.03 * i << "*cos(2*pi*q) + 0.1*p)*plateau(p, 2, 3)";
      l = ContactomorphismHandle::flow(os.str(), 0.0, 1.0).image_of_zero_section();
    }
    const auto r = spectral_pair(ominus(l, l));
    const double e = std::max(std::fabs(r.minus), std::fabs(r.plus));
    worst = std::max(worst, e);
    t.check(e <= 2.0 * r.tol_spec, "case " + std::to_string(i) + ": |l(L - L)| = " + fmt(e));
  }
  return t.done("worst |l(L - L)| = " + fmt(worst));
}

// 5
Outcome homology_engine() {
  std::mt19937_64 rng(505);
  Tally t;
  long long pairs = 0;
  for (int trial = 0; trial < 50; ++trial) {
    FilteredComplex fc;
    do {
      ProductDomain dom;
      dom.base = CircleGrid(std::uniform_int_distribution<int>(8, 12)(rng));
      const int d = std::uniform_int_distribution<int>(0, 2)(rng);
      for (int j = 0; j < d; ++j) {
        const int m = std::uniform_int_distribution<int>(2, 4)(rng);
        std::vector<double> ax(m);
        for (int k = 0; k < m; ++k) ax[k] = k;
        dom.fiber_axes.push_back(ax);
      }
      std::vector<double> v(dom.cardinality());
      for (auto& x : v) x = std::uniform_int_distribution<int>(0, 9)(rng);
      const double b = std::bernoulli_distribution(0.5)(rng) ? -1.0 : std::uniform_int_distribution<int>(0, 3)(rng);
      fc = build_cubical_filtration(dom, v, b);
    } while (fc.size() + fc.masked_cells > 300 || fc.size() == 0);
    const auto pr = reduce(fc);
    std::vector<double> levels{-INFINITY};
    levels.insert(levels.end(), fc.values.begin(), fc.values.end());
    std::sort(levels.begin(), levels.end());
    levels.erase(std::unique(levels.begin(), levels.end()), levels.end());
    for (std::size_t i = 0; i < levels.size(); ++i)
      for (std::size_t j = i; j < levels.size(); ++j) {
        ++pairs;
        t.check(oracle::relative_betti(fc, levels[i], levels[j]) == oracle::barcode_betti(fc, pr, levels[i], levels[j]),
                "trial " + std::to_string(trial) + " levels (" + fmt(levels[i]) + ", " + fmt(levels[j]) + ")");
      }
  }
  return t.done(std::to_string(pairs) + " sublevel pairs on 50 filtrations");
}

std::vector<std::shared_ptr<const ContactHamiltonian>> family_suite(std::mt19937_64& rng, int translations,
                                                                    int lifted) {
  std::vector<std::shared_ptr<const ContactHamiltonian>> hs;
  for (int i = 0; i < translations; ++i) {
    const double a = std::uniform_real_distribution<double>(0.1, 0.5)(rng);
    const double b = std::uniform_real_distribution<double>(-0.2, 0.2)(rng);
    const double ph = std::uniform_real_distribution<double>(0.0, 1.0)(rng);
    std::ostringstream os;
    os << a << "*cos(2*pi*(q - " << ph << ")) + " << b << "*sin(4*pi*q)";
    hs.push_back(std::make_shared<ContactHamiltonian>(ContactHamiltonian::parse(os.str())));
  }
  for (int i = 0; i < lifted; ++i) {
    const double a = std::uniform_real_distribution<double>(0.05, 0.25)(rng);
    const double c = std::uniform_real_distribution<double>(-0.5, 0.5)(rng);
    const double s = std::uniform_real_distribution<double>(-0.15, 0.15)(rng);
    const double ph = std::uniform_real_distribution<double>(0.0, 1.0)(rng);
    std::ostringstream os;
    os << "(" << c << " + " << a << "*cos(2*pi*(q - " << ph << ")) + " << s << "*p)*plateau(p, 2, 3)";
    hs.push_back(std::make_shared<ContactHamiltonian>(lift_hamiltonian(os.str(), 3.0)));
  }
  return hs;
}

// 6
Outcome flow_family() {
  std::mt19937_64 rng(606);
  Tally t;
  FamilyOptions fo;
  double worst_front = 0.0;
  int rows = 0;
  for (const auto& h : family_suite(rng, 5, 5)) {
    const GfqiFamily fam = build_family(h, fo);
    const FamilyReport rep = validate_family(fam, fo);
    worst_front = std::max(worst_front, rep.front_distance / rep.tol_front);
    t.check(rep.front_distance <= 5.0 / fo.n_front,
            h->text() + ": front distance " + fmt(rep.front_distance) + " > 5/n");
    for (const auto& row : rep.lemma) {
      ++rows;
      t.check(row.pass, h->text() + ": Lemma bound at t = " + fmt(row.t0) + ".." + fmt(row.t1));
    }
    for (const auto& ob : rep.obligations) t.check(ob.pass, h->text() + ": " + ob.name + " " + ob.witness);
  }
  return t.done("worst front distance / tol_front = " + fmt(worst_front) + ", " + std::to_string(rows) + " Lemma rows");
}

// 7
Outcome cerf_slopes() {
  std::mt19937_64 rng(707);
  Tally t;
  double worst = 0.0;
  int simple = 0;
  for (const auto& h : family_suite(rng, 6, 0)) {
    const GfqiFamily fam = build_family(h);
    const CerfDiagram d = cerf_diagram(fam, zero_section());
    worst = std::max(worst, d.worst_slope_error / d.slope_tol);
    simple += d.simple_points;
    t.check(d.simple_points > 0, h->text() + ": no simple points");
    t.check(d.worst_slope_error <= d.slope_tol,
            h->text() + ": slope error " + fmt(d.worst_slope_error) + " > " + fmt(d.slope_tol));
  }
  return t.done(std::to_string(simple) + " simple points, worst error / slope_tol = " + fmt(worst));
}

ContactomorphismHandle plateau_flow(double k) {
  std::ostringstream os;
  os << k << "*plateau(p, 3, 4)";
  return ContactomorphismHandle::flow(std::make_shared<ContactHamiltonian>(lift_hamiltonian(os.str(), 4.0)));
}

GeneratorBounds plateau_bounds(double k) {
  std::ostringstream os;
  os << k << "*plateau(p, 3, 4)";
  return sample_generator_bounds(lift_hamiltonian(os.str(), 4.0));
}

// 8
Outcome z_embedding(const ConjugatorSample& sample) {
  Tally t;
  const auto id = ContactomorphismHandle::identity();
  for (int k = 1; k <= 5; ++k) {
    const GeneratorBounds g = plateau_bounds(k);
    const auto m = metric_estimate(plateau_flow(k), id, sample, {}, &g);
    t.check(m.rho_sup.lower == k && m.rho_sup.has_upper && m.rho_sup.upper == k,
            "k = " + std::to_string(k) + ": rho_sup in [" + std::to_string(m.rho_sup.lower) + ", " +
                std::to_string(m.rho_sup.upper) + "]");
  }
  for (int k = 1; k <= 3; ++k)
    for (int j = 1; j <= 3; ++j) {
      // phi_kH phi_jH^-1 is generated by (k - j) H.
      const GeneratorBounds g = plateau_bounds(k - j);
      const auto m = metric_estimate(plateau_flow(k), plateau_flow(j), sample, {}, &g);
      const long long want = std::abs(k - j);
      t.check(m.rho_sup.lower == want && m.rho_sup.upper == want,
              "rho_sup(phi_" + std::to_string(k) + "H, phi_" + std::to_string(j) + "H) in [" +
                  std::to_string(m.rho_sup.lower) + ", " + std::to_string(m.rho_sup.upper) + "]");
    }
  return t.done("intervals collapse to [k, k] and [|k - m|, |k - m|]");
}

// 9
Outcome integer_calculus(const ConjugatorSample& sample) {
  std::mt19937_64 rng(909);
  Tally t;
  SnapLog log;
  std::vector<ContactomorphismHandle> hs;
  std::vector<GeneratorBounds> gb;
  for (int i = 0; i < 20; ++i) {
    const auto h = random_periodic_hamiltonian(rng, 1.5, i % 2 == 1);
    hs.push_back(ContactomorphismHandle::flow(h));
    gb.push_back(sample_generator_bounds(*h));
  }
  std::vector<SpectralReport> base(hs.size()), inv(hs.size()), prod(hs.size());
  for (std::size_t i = 0; i < hs.size(); ++i) {
    base[i] = ell_pm(hs[i]);
    inv[i] = ell_pm(hs[i].inverse());
    prod[i] = ell_pm(hs[i].compose(hs[(i + 1) % hs.size()]));
  }
  for (std::size_t i = 0; i < hs.size(); ++i) {
    const auto& a = base[i];
    const auto& b = base[(i + 1) % hs.size()];
    const auto& ab = prod[i];
    const std::string tag = "handle " + std::to_string(i);
    for (const SpectralReport* r : {&a, static_cast<const SpectralReport*>(&inv[i]), &ab}) log.merge(r->snaps);
    t.check(a.ceil_plus == -inv[i].floor_minus, tag + ": duality");
    t.check(ab.ceil_plus <= a.ceil_plus + b.ceil_plus, tag + ": ceil l+ triangle");
    t.check(ab.floor_minus >= a.floor_minus + b.floor_minus, tag + ": floor l- triangle");
    t.check(ab.floor_minus <= a.floor_minus + b.ceil_plus, tag + ": mixed triangle (floor, ceil)");
    t.check(ab.floor_minus <= a.ceil_plus + b.floor_minus, tag + ": mixed triangle (ceil, floor)");
    const long long lo = robust_floor(gb[i].int_min, 1e-3, &log, "floor int min H");
    const long long hi = robust_ceil(gb[i].int_max, 1e-3, &log, "ceil int max H");
    std::vector<SpectralReport> conj(sample.size());
    for (std::size_t k = 0; k < sample.size(); ++k) conj[k] = ell_pm(hs[i].conjugate(sample.members[k]));
    for (std::size_t k = 0; k < sample.size(); ++k) {
      log.merge(conj[k].snaps);
      t.check(conj[k].floor_minus >= lo && conj[k].ceil_plus <= hi,
              tag + " conjugated by " + std::to_string(k) + ": outside [" + std::to_string(lo) + ", " +
                  std::to_string(hi) + "]");
    }
  }
  const double rate = log.rate();
  t.check(rate < 0.05, "snap rate " + fmt(rate));
  for (const auto& e : log.events) std::printf("  snap: %s: %.9g -> %lld\n", e.context.c_str(), e.value, e.result);
  return t.done(std::to_string(log.events.size()) + " snaps in " + std::to_string(log.comparisons) +
                " roundings (rate " + fmt(rate) + ")");
}

// 10
Outcome interval_property() {
  std::mt19937_64 rng(1010);
  Tally t;
  for (int i = 0; i < 10; ++i) {
    const auto phi = ContactomorphismHandle::flow(random_periodic_hamiltonian(rng, 1.5, i % 2 == 1));
    const Gfqi l = gfqi_graph(random_function(rng, 3, 0.5));
    const auto lhs = spectral_pair(phi.image_of(l));
    const auto rhs = spectral_pair(ominus(l, phi.inverse().image_of_zero_section()));
    t.check(robust_ceil(lhs.plus) == robust_ceil(rhs.plus),
            "case " + std::to_string(i) + ": l+(phi(L)) = " + fmt(lhs.plus) + ", l+(L - phi^-1(O)) = " + fmt(rhs.plus));
  }
  return t.done("ceil l+ agrees on all cases");
}

// 11
Outcome nu_properties(const ConjugatorSample& sample) {
  Tally t;
  for (double c : {-0.7, 0.3, 1.25}) {
    const auto nu = nu_estimate(ContactomorphismHandle::reeb(c), 8);
    t.check(std::fabs(nu.estimate - c) <= 1e-3, "Reeb(" + fmt(c) + "): nu = " + fmt(nu.estimate));
  }
  RigidityOptions opt;
  opt.max_power = 8;
  opt.tol = 1e-2;
  std::size_t skipped = 0;
  for (const char* which : {"A", "B"}) {
    const auto rep = rigidity_scenario(which, sample, opt, {});
    for (const auto& c : rep.checks)
      t.check(c.pass, std::string(which) + ": " + c.name + " = " + fmt(c.value) + " (expected " + fmt(c.expected) +
                          ", tol " + fmt(c.tol) + ")");
    for (const auto& sk : rep.skipped) std::printf("  skipped: %s\n", sk.c_str());
    skipped += rep.skipped.size();
  }
  return t.done("Reeb, comparison, displaceable and conjugated scenarios; " + std::to_string(skipped) +
                " folding conjugates skipped");
}

// 12
Outcome order_oracle(const ConjugatorSample& sample) {
  Tally t;
  std::mt19937_64 rng(1212);
  const auto phi = ContactomorphismHandle::flow(random_periodic_hamiltonian(rng, 1.0, false));
  const auto refl = order_test(phi, phi, sample);
  t.check(refl.verdict == OrderResult::Verdict::consistent_on_sample && std::fabs(refl.margin) <= refl.tol,
          "reflexivity margin " + fmt(refl.margin));
  const auto r1 = order_test(ContactomorphismHandle::reeb(1.0), ContactomorphismHandle::identity(), sample);
  t.check(r1.verdict == OrderResult::Verdict::violated && r1.witness == 0 && std::fabs(r1.value - 1.0) <= r1.tol,
          "Reeb(1) vs id: " + to_string(r1.verdict) + ", value " + fmt(r1.value));
  for (int i = 0; i < 5; ++i) {
    // K = H + (nonnegative bump), so H <= K pointwise.
    const double c = std::uniform_real_distribution<double>(-0.5, 0.5)(rng);
    const double a = std::uniform_real_distribution<double>(0.0, 0.2)(rng);
    const double d = std::uniform_real_distribution<double>(0.0, 0.1)(rng);
    const double ph = std::uniform_real_distribution<double>(0.0, 1.0)(rng);
    std::ostringstream h, k;
    h << "(" << c << " + " << a << "*cos(2*pi*(q - " << ph << ")))*plateau(p, 4, 5)";
    k << "(" << c << " + " << a << "*cos(2*pi*(q - " << ph << ")) + " << d << "*(1 + sin(2*pi*q)))*plateau(p, 4, 5)";
    const auto hh = ContactomorphismHandle::flow(std::make_shared<ContactHamiltonian>(lift_hamiltonian(h.str(), 5.0)));
    const auto kk = ContactomorphismHandle::flow(std::make_shared<ContactHamiltonian>(lift_hamiltonian(k.str(), 5.0)));
    const auto r = order_test(hh, kk, sample);
    t.check(r.verdict == OrderResult::Verdict::consistent_on_sample,
            "H <= K pair " + std::to_string(i) + " violated at alpha " + std::to_string(r.witness));
  }
  return t.done("reflexive, certificate for Reeb(1), 5 monotone pairs consistent");
}

std::string slurp(const std::filesystem::path& p) {
  std::ifstream f(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(f), std::istreambuf_iterator<char>()};
}

// 13
Outcome determinism() {
  namespace fs = std::filesystem;
  Tally t;
  const fs::path configs = LEGSPEC_CONFIG_DIR;
  const fs::path root = fs::temp_directory_path() / "legspec_acceptance";
  fs::remove_all(root);
  int files = 0;
  for (const auto& kind : scenario_kinds()) {
    const fs::path cfg = configs / (kind + ".json");
    if (!fs::exists(cfg)) {
      t.check(false, "missing config " + cfg.string());
      continue;
    }
    for (const char* run : {"a", "b"}) {
      const int rc = run_scenario_files(kind, cfg.string(), (root / run).string(), 17);
      t.check(rc == 0, kind + " run " + run + " exit code " + std::to_string(rc));
    }
    const std::string a = slurp(root / "a" / (kind + ".json")), b = slurp(root / "b" / (kind + ".json"));
    t.check(!a.empty() && a == b, kind + ".json differs between runs");
    t.check(slurp(root / "a" / (kind + ".csv")) == slurp(root / "b" / (kind + ".csv")), kind + ".csv differs");
    ++files;
  }
  return t.done(std::to_string(files) + " scenario reports byte-identical");
}

}  // namespace

int main() {
  const ConjugatorSample sample = make_conjugator_sample(2024);
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria = {
      {"jet oracle", jet_oracle},
      {"duality", duality},
      {"triangle", triangle},
      {"zero law", zero_law},
      {"homology engine oracle", homology_engine},
      {"flow/family consistency", flow_family},
      {"Cerf slope", cerf_slopes},
      {"Z-embedding", [&] { return z_embedding(sample); }},
      {"integer-part calculus", [&] { return integer_calculus(sample); }},
      {"interval property", interval_property},
      {"nu properties", [&] { return nu_properties(sample); }},
      {"order oracle", [&] { return order_oracle(sample); }},
      {"determinism", determinism},
  };
  int failed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = criteria[i].second();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const double s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    std::printf("%s [%zu] %s: %s [%.1f s]\n", o.pass ? "PASS" : "FAIL", i + 1, criteria[i].first.c_str(),
                o.detail.c_str(), s);
    std::fflush(stdout);
    failed += o.pass ? 0 : 1;
  }
  std::printf("%d/%zu criteria passed\n", static_cast<int>(criteria.size()) - failed, criteria.size());
  return failed ? 1 : 0;
}
