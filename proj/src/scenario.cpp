#include "legspec/scenario.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <set>
#include <sstream>

#include "legspec/error.hpp"
#include "legspec/family.hpp"
#include "legspec/spectral.hpp"

namespace legspec {

using nlohmann::json;

namespace {

/// Reads an object, records resolved values and rejects unknown keys.
class Reader {
 public:
  Reader(const json& j, std::string where) : j_(j), where_(std::move(where)) {
    if (!j_.is_object()) throw InvalidInput(where_ + ": expected an object");
  }

  bool has(const std::string& key) const { return j_.contains(key); }

  const json& raw(const std::string& key) {
    seen_.insert(key);
    if (!j_.contains(key)) throw InvalidInput(where_ + ": missing '" + key + "'");
    resolved[key] = j_.at(key);
    return j_.at(key);
  }

  double num(const std::string& key, std::optional<double> dflt, double lo, double hi) {
    seen_.insert(key);
    double v;
    if (j_.contains(key)) {
      if (!j_.at(key).is_number()) throw InvalidInput(where_ + ": '" + key + "' must be a number");
      v = j_.at(key).get<double>();
    } else if (dflt) {
      v = *dflt;
    } else {
      throw InvalidInput(where_ + ": missing '" + key + "'");
    }
    if (!(v >= lo && v <= hi))
      throw InvalidInput(where_ + ": '" + key + "' = " + fmt(v) + " outside [" + fmt(lo) + ", " + fmt(hi) + "]");
    resolved[key] = v;
    return v;
  }

  long long integer(const std::string& key, std::optional<long long> dflt, long long lo, long long hi) {
    seen_.insert(key);
    long long v;
    if (j_.contains(key)) {
      if (!j_.at(key).is_number_integer()) throw InvalidInput(where_ + ": '" + key + "' must be an integer");
      v = j_.at(key).get<long long>();
    } else if (dflt) {
      v = *dflt;
    } else {
      throw InvalidInput(where_ + ": missing '" + key + "'");
    }
    if (v < lo || v > hi)
      throw InvalidInput(where_ + ": '" + key + "' = " + std::to_string(v) + " outside [" + std::to_string(lo) +
                         ", " + std::to_string(hi) + "]");
    resolved[key] = v;
    return v;
  }

  bool flag(const std::string& key, bool dflt) {
    seen_.insert(key);
    bool v = dflt;
    if (j_.contains(key)) {
      if (!j_.at(key).is_boolean()) throw InvalidInput(where_ + ": '" + key + "' must be a boolean");
      v = j_.at(key).get<bool>();
    }
    resolved[key] = v;
    return v;
  }

  std::string str(const std::string& key, std::optional<std::string> dflt = std::nullopt) {
    seen_.insert(key);
    std::string v;
    if (j_.contains(key)) {
      if (!j_.at(key).is_string()) throw InvalidInput(where_ + ": '" + key + "' must be a string");
      v = j_.at(key).get<std::string>();
    } else if (dflt) {
      v = *dflt;
    } else {
      throw InvalidInput(where_ + ": missing '" + key + "'");
    }
    resolved[key] = v;
    return v;
  }

  void finish() const {
    for (const auto& [key, value] : j_.items())
      if (!seen_.count(key)) throw InvalidInput(where_ + ": unknown key '" + key + "'");
  }

  json resolved = json::object();

 private:
  static std::string fmt(double v) {
    std::ostringstream os;
    os << v;
    return os.str();
  }
  const json& j_;
  std::string where_;
  std::set<std::string> seen_;
};

struct Common {
  std::uint64_t seed = 0;
  InvariantConfig inv;
  ConjugatorOptions sample;
  json resolved;
};

Common read_common(Reader& r, std::optional<std::uint64_t> seed_override) {
  Common c;
  if (seed_override) {
    c.seed = *seed_override;
    r.integer("seed", 0, 0, std::numeric_limits<long long>::max());
  } else {
    c.seed = static_cast<std::uint64_t>(r.integer("seed", std::nullopt, 0, std::numeric_limits<long long>::max()));
  }
  r.resolved["seed"] = c.seed;
  json lattice = r.has("lattice") ? r.raw("lattice") : json::object();
  Reader lr(lattice, "lattice");
  auto& lat = c.inv.spectral.lattice;
  lat.n_q = static_cast<int>(lr.integer("n_q", 128, 8, 4096));
  lat.fiber_intervals = static_cast<int>(lr.integer("fiber_intervals", 32, 4, 1024));
  lat.margin = lr.num("margin", 1.0, 0.0, 100.0);
  lat.outer_points = static_cast<int>(lr.integer("outer_points", 3, 1, 64));
  lat.d_max = static_cast<int>(lr.integer("d_max", 3, 0, 4));
  c.inv.spectral.refine = lr.flag("refine", true);
  c.inv.spectral.tol_crit = lr.num("tol_crit", 1e-6, 1e-14, 1e-2);
  lr.finish();
  r.resolved["lattice"] = lr.resolved;

  json pipe = r.has("pipeline") ? r.raw("pipeline") : json::object();
  Reader pr(pipe, "pipeline");
  c.inv.pipeline.fine = static_cast<int>(pr.integer("fine", 512, 32, 1 << 16));
  c.inv.pipeline.min_graphicality = pr.num("min_graphicality", 0.25, 0.0, 1.0);
  c.inv.pipeline.allow_fold = pr.flag("allow_fold", true);
  pr.finish();
  r.resolved["pipeline"] = pr.resolved;

  c.inv.eps_int = r.num("eps_int", 1e-3, 0.0, 0.49);

  json samp = r.has("sample") ? r.raw("sample") : json::object();
  Reader sr(samp, "sample");
  c.sample.size = static_cast<int>(sr.integer("size", 24, 1, 4096));
  c.sample.max_word_length = static_cast<int>(sr.integer("max_word_length", 3, 1, 16));
  c.sample.translation_amplitude = sr.num("translation_amplitude", 0.08, 0.0, 1.0);
  c.sample.flow_amplitude = sr.num("flow_amplitude", 0.15, 0.0, 1.0);
  c.sample.reeb_amplitude = sr.num("reeb_amplitude", 0.5, 0.0, 10.0);
  c.sample.z_dependent = sr.flag("z_dependent", true);
  sr.finish();
  r.resolved["sample"] = sr.resolved;
  return c;
}

ContactomorphismHandle parse_atom(const json& j) {
  Reader r(j, "atom");
  ContactomorphismHandle h;
  if (r.has("reeb")) {
    h = ContactomorphismHandle::reeb(r.num("reeb", std::nullopt, -1e6, 1e6));
  } else if (r.has("translation")) {
    h = ContactomorphismHandle::translation(CircleFunction::from_expression(Expression::parse(r.str("translation"))));
  } else if (r.has("flow")) {
    const std::string text = r.str("flow");
    const double t0 = r.num("t0", 0.0, -1e6, 1e6), t1 = r.num("t1", 1.0, -1e6, 1e6);
    std::optional<double> support;
    if (r.has("support")) support = r.num("support", std::nullopt, 0.0, 1e6);
    h = ContactomorphismHandle::flow(std::make_shared<ContactHamiltonian>(ContactHamiltonian::parse(text, support)),
                                     t0, t1);
  } else {
    throw InvalidInput("atom: expected one of 'reeb', 'translation', 'flow'");
  }
  r.finish();
  return h;
}

std::string csv_number(double v) {
  std::ostringstream os;
  os << std::setprecision(12) << v;
  return os.str();
}

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char ch : s) out += ch == '"' ? std::string("\"\"") : std::string(1, ch);
  return out + "\"";
}

struct Run {
  std::string kind;
  ScenarioOutput out;
  std::ostringstream csv;
  json assertions = json::array();
  json results = json::array();

  void check(const std::string& name, bool pass, const std::string& detail) {
    assertions.push_back({{"name", name}, {"pass", pass}, {"detail", detail}});
    out.pass = out.pass && pass;
    log((pass ? "PASS " : "FAIL ") + name + ": " + detail);
  }
  void log(const std::string& line) { out.log.push_back("[" + kind + "] " + line); }
};

std::string fmt(double v) {
  std::ostringstream os;
  os << std::setprecision(6) << v;
  return os.str();
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

/// Item with a name and either a jet function "jet" or a handle "handle".
struct Subject {
  std::string name;
  Gfqi gf = zero_section();
  std::optional<CircleFunction> jet;
  std::optional<ContactomorphismHandle> handle;
};

Subject read_subject(Reader& r, const Common& c, const std::string& where) {
  Subject s;
  s.name = r.str("name");
  if (r.has("jet")) {
    s.jet = CircleFunction::from_expression(Expression::parse(r.str("jet")));
    s.gf = gfqi_graph(*s.jet);
  } else if (r.has("handle")) {
    s.handle = parse_handle(r.raw("handle"));
    s.gf = s.handle->image_of_zero_section(c.inv.pipeline);
  } else {
    throw InvalidInput(where + ": item '" + s.name + "' needs 'jet' or 'handle'");
  }
  return s;
}

json read_items(Reader& r, const std::string& key) {
  const json& items = r.raw(key);
  if (!items.is_array() || items.empty()) throw InvalidInput("'" + key + "' must be a non-empty array");
  return items;
}

void run_spectra(Run& run, Reader& r, const Common& c) {
  const json items = read_items(r, "items");
  json& results = run.results;
  json resolved = json::array();
  run.csv << "name,minus,plus,tol_spec,floor_minus,ceil_plus,fiber_dim\n";
  for (const auto& item : items) {
    const auto t0 = std::chrono::steady_clock::now();
    Reader ir(item, "spectra item");
    const Subject s = read_subject(ir, c, "spectra");
    std::optional<std::array<double, 2>> expect;
    double tol = -1.0;
    if (ir.has("expect")) {
      const json& e = ir.raw("expect");
      if (!e.is_array() || e.size() != 2) throw InvalidInput("expect must be [l-, l+]");
      expect = std::array<double, 2>{e[0].get<double>(), e[1].get<double>()};
      tol = ir.num("tol", -1.0, -1.0, 1e6);
    }
    ir.finish();
    resolved.push_back(ir.resolved);
    SpectralReport rep;
    if (s.handle) {
      rep = ell_pm(*s.handle, c.inv);
    } else {
      const auto pair = spectral_pair(s.gf, c.inv.spectral);
      rep.handle = s.jet->label;
      rep.minus = pair.minus;
      rep.plus = pair.plus;
      rep.tol_spec = pair.tol_spec;
      rep.provenance = s.gf.provenance();
    }
    json jr = {{"name", s.name},          {"description", rep.handle}, {"minus", rep.minus},
               {"plus", rep.plus},        {"tol_spec", rep.tol_spec},  {"fiber_dim", s.gf.fiber_dim()},
               {"provenance", rep.provenance}};
    if (rep.has_integer_parts) {
      jr["floor_minus"] = rep.floor_minus;
      jr["ceil_plus"] = rep.ceil_plus;
      jr["snap_events"] = rep.snaps.events.size();
    }
    run.check(s.name + ": l- <= l+", rep.minus <= rep.plus + rep.tol_spec,
              "l- = " + fmt(rep.minus) + ", l+ = " + fmt(rep.plus));
    if (s.jet) {
      // The generating function of j1 f has l- = min f and l+ = max f.
      const int n = 1 << 16;
      double mn = 1e300, mx = -1e300;
      for (int i = 0; i < n; ++i) {
        const double v = (*s.jet)(static_cast<double>(i) / n);
        mn = std::min(mn, v);
        mx = std::max(mx, v);
      }
      const double jt = 2.0 * s.jet->sup_abs_derivative() / c.inv.spectral.lattice.n_q + 1e-9;
      jr["oracle"] = {{"min", mn}, {"max", mx}, {"tol", jt}};
      run.check(s.name + ": jet oracle", std::fabs(rep.minus - mn) <= jt && std::fabs(rep.plus - mx) <= jt,
                "|l- - min f| = " + fmt(std::fabs(rep.minus - mn)) + ", |l+ - max f| = " +
                    fmt(std::fabs(rep.plus - mx)) + ", tol = " + fmt(jt));
    }
    if (expect) {
      const double et = tol >= 0 ? tol : 2.0 * rep.tol_spec;
      jr["expect"] = {{"minus", (*expect)[0]}, {"plus", (*expect)[1]}, {"tol", et}};
      run.check(s.name + ": expected values",
                std::fabs(rep.minus - (*expect)[0]) <= et && std::fabs(rep.plus - (*expect)[1]) <= et,
                "got (" + fmt(rep.minus) + ", " + fmt(rep.plus) + "), tol " + fmt(et));
    }
    results.push_back(jr);
    run.csv << csv_field(s.name) << ',' << csv_number(rep.minus) << ',' << csv_number(rep.plus) << ','
            << csv_number(rep.tol_spec) << ',' << (rep.has_integer_parts ? std::to_string(rep.floor_minus) : "")
            << ',' << (rep.has_integer_parts ? std::to_string(rep.ceil_plus) : "") << ',' << s.gf.fiber_dim()
            << '\n';
    run.log(s.name + " done in " + fmt(seconds_since(t0)) + " s");
  }
  r.resolved["items"] = resolved;
  run.out.report["results"] = results;
}

void run_order(Run& run, Reader& r, const Common& c, const ConjugatorSample& sample) {
  const json items = read_items(r, "pairs");
  json& results = run.results;
  json resolved = json::array();
  run.csv << "name,alpha,value\n";
  for (const auto& item : items) {
    Reader ir(item, "order pair");
    const std::string name = ir.str("name");
    const auto phi = parse_handle(ir.raw("phi")), psi = parse_handle(ir.raw("psi"));
    std::optional<std::string> expect;
    if (ir.has("expect")) {
      expect = ir.str("expect");
      if (*expect != "violated" && *expect != "consistent_on_sample")
        throw InvalidInput("order expect must be 'violated' or 'consistent_on_sample'");
    }
    ir.finish();
    resolved.push_back(ir.resolved);
    const OrderResult o = order_test(phi, psi, sample, c.inv);
    json jr = {{"name", name}, {"verdict", to_string(o.verdict)}, {"margin", o.margin}, {"tol", o.tol}};
    if (o.verdict == OrderResult::Verdict::violated)
      jr["witness"] = {{"index", o.witness}, {"alpha", o.witness_description}, {"value", o.value}};
    if (expect)
      run.check(name + ": verdict", to_string(o.verdict) == *expect,
                "got " + to_string(o.verdict) + ", expected " + *expect + ", margin " + fmt(o.margin));
    results.push_back(jr);
    for (std::size_t i = 0; i < o.values.size(); ++i)
      run.csv << csv_field(name) << ',' << i << ',' << csv_number(o.values[i]) << '\n';
  }
  r.resolved["pairs"] = resolved;
  run.out.report["results"] = results;
}

json interval_json(const IntegerInterval& iv) {
  json j = {{"lower", iv.lower}};
  j["upper"] = iv.has_upper ? json(iv.upper) : json(nullptr);
  return j;
}

void run_metric(Run& run, Reader& r, const Common& c, const ConjugatorSample& sample) {
  const json items = read_items(r, "pairs");
  json& results = run.results;
  json resolved = json::array();
  run.csv << "name,alpha,minus,plus\n";
  for (const auto& item : items) {
    Reader ir(item, "metric pair");
    const std::string name = ir.str("name");
    const auto phi = parse_handle(ir.raw("phi")), psi = parse_handle(ir.raw("psi"));
    std::optional<GeneratorBounds> gb;
    if (ir.has("generator")) {
      Reader gr(ir.raw("generator"), "generator");
      std::optional<double> support;
      if (gr.has("support")) support = gr.num("support", std::nullopt, 0.0, 1e6);
      const auto h = ContactHamiltonian::parse(gr.str("hamiltonian"), support);
      gb = sample_generator_bounds(h, gr.num("scale", 1.0, -1e6, 1e6), gr.num("p_range", -1.0, -1.0, 1e6));
      gr.finish();
    }
    json expect;
    if (ir.has("expect")) expect = ir.raw("expect");
    ir.finish();
    resolved.push_back(ir.resolved);
    const MetricEstimate m = metric_estimate(phi, psi, sample, c.inv, gb ? &*gb : nullptr);
    json jr = {{"name", name},
               {"rho_osc", interval_json(m.rho_osc)},
               {"rho_sup", interval_json(m.rho_sup)},
               {"argmax_osc", m.argmax_osc},
               {"argmax_sup", m.argmax_sup},
               {"snap_events", m.snaps.events.size()},
               {"snap_comparisons", m.snaps.comparisons}};
    if (gb) jr["generator_bounds"] = {{"int_max", gb->int_max}, {"int_min", gb->int_min}};
    run.check(name + ": lower <= upper", m.consistent,
              "rho_osc [" + std::to_string(m.rho_osc.lower) + ", " +
                  (m.rho_osc.has_upper ? std::to_string(m.rho_osc.upper) : "inf") + "], rho_sup [" +
                  std::to_string(m.rho_sup.lower) + ", " +
                  (m.rho_sup.has_upper ? std::to_string(m.rho_sup.upper) : "inf") + "]");
    for (const char* key : {"rho_osc", "rho_sup"}) {
      if (!expect.is_object() || !expect.contains(key)) continue;
      const json& e = expect.at(key);
      if (!e.is_array() || e.size() != 2) throw InvalidInput(std::string("expect.") + key + " must be [lower, upper]");
      const IntegerInterval& iv = std::string(key) == "rho_osc" ? m.rho_osc : m.rho_sup;
      const bool ok = iv.lower == e[0].get<long long>() && (e[1].is_null() || (iv.has_upper && iv.upper == e[1].get<long long>()));
      run.check(name + ": " + key, ok, "got " + interval_json(iv).dump() + ", expected " + e.dump());
    }
    results.push_back(jr);
    for (std::size_t i = 0; i < m.plus.size(); ++i)
      run.csv << csv_field(name) << ',' << i << ',' << csv_number(m.minus[i]) << ',' << csv_number(m.plus[i]) << '\n';
  }
  r.resolved["pairs"] = resolved;
  run.out.report["results"] = results;
}

void run_nu(Run& run, Reader& r, const Common& c) {
  const json items = read_items(r, "items");
  json& results = run.results;
  json resolved = json::array();
  run.csv << "name,k,ell_plus,per_k,ceil\n";
  for (const auto& item : items) {
    Reader ir(item, "nu item");
    const std::string name = ir.str("name");
    const auto phi = parse_handle(ir.raw("phi"));
    const int K = static_cast<int>(ir.integer("max_power", 8, 4, 256));
    std::optional<ContactomorphismHandle> alpha;
    if (ir.has("conjugate_by")) alpha = parse_handle(ir.raw("conjugate_by"));
    std::optional<double> expect, at_least, at_most;
    if (ir.has("expect")) expect = ir.num("expect", std::nullopt, -1e6, 1e6);
    if (ir.has("at_least")) at_least = ir.num("at_least", std::nullopt, -1e6, 1e6);
    if (ir.has("at_most_abs")) at_most = ir.num("at_most_abs", std::nullopt, 0.0, 1e6);
    const double tol = ir.num("tol", 1e-2, 0.0, 1e6);
    ir.finish();
    resolved.push_back(ir.resolved);
    const NuEstimate nu = nu_estimate(phi, K, c.inv, alpha ? &*alpha : nullptr);
    results.push_back({{"name", name},
                       {"per_k", nu.per_k},
                       {"ell_plus", nu.ell_plus},
                       {"ceil_seq", nu.ceil_seq},
                       {"upper", nu.upper},
                       {"lower", nu.lower},
                       {"estimate", nu.estimate},
                       {"subadditivity_violations", nu.subadditivity_violations},
                       {"snap_events", nu.snaps.events.size()}});
    run.check(name + ": subadditivity", nu.subadditivity_violations.empty(),
              nu.subadditivity_violations.empty() ? "ceil sequence subadditive for k <= " + std::to_string(K)
                                                  : nu.subadditivity_violations.front());
    if (expect)
      run.check(name + ": estimate", std::fabs(nu.estimate - *expect) <= tol,
                "nu ~ " + fmt(nu.estimate) + ", expected " + fmt(*expect) + " +- " + fmt(tol));
    if (at_least)
      run.check(name + ": lower bound", nu.estimate >= *at_least - tol,
                "nu ~ " + fmt(nu.estimate) + " >= " + fmt(*at_least) + " - " + fmt(tol));
    if (at_most)
      run.check(name + ": absolute bound", std::fabs(nu.estimate) <= *at_most + tol,
                "|nu| ~ " + fmt(std::fabs(nu.estimate)) + " <= " + fmt(*at_most) + " + " + fmt(tol));
    for (int k = 1; k <= K; ++k)
      run.csv << csv_field(name) << ',' << k << ',' << csv_number(nu.ell_plus[k - 1]) << ','
              << csv_number(nu.per_k[k - 1]) << ',' << nu.ceil_seq[k - 1] << '\n';
  }
  r.resolved["items"] = resolved;
  run.out.report["results"] = results;
}

void run_cerf(Run& run, Reader& r, const Common& c) {
  const json items = read_items(r, "hamiltonians");
  FamilyOptions fo;
  fo.time_samples = static_cast<int>(r.integer("time_samples", 17, 3, 1025));
  fo.steps = static_cast<int>(r.integer("steps", 32, 1, 1 << 16));
  fo.n_front = static_cast<int>(r.integer("n_front", 256, 16, 1 << 14));
  fo.spectral = c.inv.spectral;
  fo.pipeline = c.inv.pipeline;
  CerfOptions co;
  co.wave.n_q = fo.n_front;
  co.dt_fd = r.num("dt_fd", 1e-3, 1e-8, 0.1);
  co.min_hessian = r.num("min_hessian", 1e-3, 0.0, 1.0);
  json& results = run.results;
  json resolved = json::array();
  run.csv << "name,t,c,q,p,branch,simple,slope,h\n";
  for (const auto& item : items) {
    Reader ir(item, "cerf item");
    const std::string name = ir.str("name");
    std::optional<double> support;
    if (ir.has("support")) support = ir.num("support", std::nullopt, 0.0, 1e6);
    const auto h = std::make_shared<ContactHamiltonian>(ContactHamiltonian::parse(ir.str("hamiltonian"), support));
    ir.finish();
    resolved.push_back(ir.resolved);
    const GfqiFamily fam = build_family(h, fo);
    const FamilyReport fr = validate_family(fam, fo);
    for (const auto& ob : fr.obligations)
      run.check(name + ": " + ob.name, ob.pass,
                "margin " + fmt(ob.margin) + (ob.witness.empty() ? "" : ", " + ob.witness));
    const CerfDiagram d = cerf_diagram(fam, zero_section(), co);
    run.check(name + ": Cerf slopes", d.worst_slope_error <= d.slope_tol,
              "worst |slope - H| = " + fmt(d.worst_slope_error) + ", slope_tol = " + fmt(d.slope_tol) + " over " +
                  std::to_string(d.simple_points) + " simple points");
    json lemma = json::array();
    for (const auto& row : fr.lemma)
      lemma.push_back({{"t0", row.t0}, {"t1", row.t1}, {"minus", row.minus}, {"plus", row.plus},
                       {"lower", row.lower}, {"upper", row.upper}, {"tol", row.tol}, {"pass", row.pass}});
    results.push_back({{"name", name},
                       {"construction", fam.construction},
                       {"front_distance", fr.front_distance},
                       {"tol_front", fr.tol_front},
                       {"lemma", lemma},
                       {"slope_tol", d.slope_tol},
                       {"max_abs_h", d.max_abs_h},
                       {"worst_slope_error", d.worst_slope_error},
                       {"simple_points", d.simple_points},
                       {"skipped_points", d.skipped_points}});
    for (const auto& pt : d.points)
      run.csv << csv_field(name) << ',' << csv_number(pt.t) << ',' << csv_number(pt.c) << ',' << csv_number(pt.q)
              << ',' << csv_number(pt.p) << ',' << pt.branch << ',' << (pt.simple ? 1 : 0) << ','
              << csv_number(pt.slope) << ',' << csv_number(pt.h_value) << '\n';
  }
  r.resolved["hamiltonians"] = resolved;
  run.out.report["results"] = results;
}

void run_rigidity(Run& run, Reader& r, const Common& c, const ConjugatorSample& sample) {
  RigidityOptions opt;
  opt.max_power = static_cast<int>(r.integer("max_power", 8, 4, 256));
  opt.c = r.num("c", 0.5, 0.0, 10.0);
  opt.tol = r.num("tol", 1e-2, 0.0, 1.0);
  const json& which = r.raw("which");
  if (!which.is_array() || which.empty()) throw InvalidInput("'which' must be a non-empty array of scenario names");
  json& results = run.results;
  run.csv << "scenario,check,value,expected,tol,pass\n";
  for (const auto& w : which) {
    if (!w.is_string()) throw InvalidInput("'which' entries must be strings");
    const RigidityReport rep = rigidity_scenario(w.get<std::string>(), sample, opt, c.inv);
    json checks = json::array();
    for (const auto& ck : rep.checks) {
      checks.push_back({{"name", ck.name}, {"value", ck.value}, {"expected", ck.expected}, {"tol", ck.tol},
                        {"pass", ck.pass}});
      run.check(rep.scenario + ": " + ck.name, ck.pass,
                "value " + fmt(ck.value) + ", expected " + fmt(ck.expected) + ", tol " + fmt(ck.tol));
      run.csv << rep.scenario << ',' << csv_field(ck.name) << ',' << csv_number(ck.value) << ','
              << csv_number(ck.expected) << ',' << csv_number(ck.tol) << ',' << (ck.pass ? 1 : 0) << '\n';
    }
    for (const auto& sk : rep.skipped) run.log("skipped " + sk);
    results.push_back({{"scenario", rep.scenario}, {"pass", rep.pass()}, {"checks", checks}, {"skipped", rep.skipped}});
  }
  run.out.report["results"] = results;
}

void run_convergence(Run& run, Reader& r, const Common& c) {
  const json items = read_items(r, "items");
  const json& res = r.raw("resolutions");
  if (!res.is_array() || res.size() < 2) throw InvalidInput("'resolutions' needs at least two entries");
  std::vector<int> resolutions;
  for (const auto& v : res) {
    if (!v.is_number_integer() || v.get<int>() < 8 || v.get<int>() > 4096)
      throw InvalidInput("resolutions must be integers in [8, 4096]");
    resolutions.push_back(v.get<int>());
  }
  json& results = run.results;
  json resolved = json::array();
  run.csv << "name,resolution,raw_minus,raw_plus,minus,plus,tol_spec\n";
  for (const auto& item : items) {
    Reader ir(item, "convergence item");
    const Subject s = read_subject(ir, c, "convergence");
    ir.finish();
    resolved.push_back(ir.resolved);
    const auto t0 = std::chrono::steady_clock::now();
    const ConvergenceReport cr = convergence_study(s.gf, resolutions, c.inv.spectral);
    json rows = json::array();
    for (const auto& row : cr.rows) {
      rows.push_back({{"resolution", row.resolution}, {"raw_minus", row.raw_minus}, {"raw_plus", row.raw_plus},
                      {"minus", row.minus}, {"plus", row.plus}, {"tol_spec", row.tol_spec}});
      run.csv << csv_field(s.name) << ',' << row.resolution << ',' << csv_number(row.raw_minus) << ','
              << csv_number(row.raw_plus) << ',' << csv_number(row.minus) << ',' << csv_number(row.plus) << ','
              << csv_number(row.tol_spec) << '\n';
    }
    const auto& a = cr.rows[cr.rows.size() - 2];
    const auto& b = cr.rows.back();
    const double drift = std::max(std::fabs(b.raw_minus - a.raw_minus), std::fabs(b.raw_plus - a.raw_plus));
    run.check(s.name + ": final drift", drift <= a.tol_spec,
              "max raw drift " + fmt(drift) + " <= tol_spec " + fmt(a.tol_spec) + " at resolution " +
                  std::to_string(a.resolution));
    results.push_back({{"name", s.name}, {"rows", rows}, {"flags", cr.flags}});
    run.log(s.name + " done in " + fmt(seconds_since(t0)) + " s");
  }
  r.resolved["items"] = resolved;
  run.out.report["results"] = results;
}

}  // namespace

const std::vector<std::string>& scenario_kinds() {
  static const std::vector<std::string> kinds = {"spectra", "order", "metric", "nu", "cerf", "rigidity",
                                                 "convergence"};
  return kinds;
}

ContactomorphismHandle parse_handle(const json& j) {
  if (j.is_array()) {
    ContactomorphismHandle h;
    for (const auto& a : j) h = h.compose(parse_atom(a));
    return h;
  }
  Reader r(j, "handle");
  ContactomorphismHandle h;
  if (r.has("word")) h = parse_handle(r.raw("word"));
  if (r.flag("inverse", false)) h = h.inverse();
  const int k = static_cast<int>(r.integer("power", 1, 0, 1 << 16));
  if (k != 1) h = h.power(k);
  if (r.has("conjugate_by")) h = h.conjugate(parse_handle(r.raw("conjugate_by")));
  r.finish();
  return h;
}

ScenarioOutput run_scenario(const std::string& kind, json config, std::optional<std::uint64_t> seed_override,
                            ScenarioOutput* partial) {
  if (std::find(scenario_kinds().begin(), scenario_kinds().end(), kind) == scenario_kinds().end())
    throw InvalidInput("unknown scenario '" + kind + "'");
  Reader r(config, "config");
  const std::string declared = r.str("scenario", kind);
  if (declared != kind) throw InvalidInput("config is for scenario '" + declared + "', not '" + kind + "'");
  const Common c = read_common(r, seed_override);

  Run run;
  run.kind = kind;
  run.out.report = {{"schema_version", kSchemaVersion}, {"scenario", kind}, {"seed", c.seed}};
  auto sample = [&] {
    ConjugatorSample s = make_conjugator_sample(c.seed, c.sample);
    json members = json::array();
    for (const auto& m : s.members) members.push_back(m.describe());
    run.out.report["conjugator_sample"] = {
        {"seed", c.seed},
        {"size", s.size()},
        {"members", members},
        {"note", "finite sample standing in for all conjugators; Violated is a certificate, consistency is not"}};
    return s;
  };
  auto flush = [&](const std::string& what) {
    if (!partial) return;
    run.out.report["results"] = run.results;
    run.out.report["assertions"] = run.assertions;
    run.out.report["status"] = "error";
    run.out.report["error"] = what;
    run.out.csv = run.csv.str();
    *partial = run.out;
  };
  try {
    if (kind == "spectra") run_spectra(run, r, c);
    else if (kind == "order") run_order(run, r, c, sample());
    else if (kind == "metric") run_metric(run, r, c, sample());
    else if (kind == "nu") run_nu(run, r, c);
    else if (kind == "cerf") run_cerf(run, r, c);
    else if (kind == "rigidity") run_rigidity(run, r, c, sample());
    else run_convergence(run, r, c);
    r.finish();
  } catch (const InvalidInput& e) {
    flush(kind + ": " + e.what());
    throw InvalidInput(kind + ": " + e.what());
  } catch (const UnsupportedClass& e) {
    flush(kind + ": " + e.what());
    throw UnsupportedClass(kind + ": " + e.what());
  } catch (const Error& e) {
    flush(kind + ": " + e.what());
    throw PipelineError(kind + ": " + e.what());
  }
  run.out.report["config"] = r.resolved;
  run.out.report["tolerances"] = {{"eps_int", c.inv.eps_int},
                                  {"tol_crit", c.inv.spectral.tol_crit},
                                  {"tol_spec", "2 * sup|grad S| * lattice spacing, per report"},
                                  {"min_graphicality", c.inv.pipeline.min_graphicality}};
  run.out.report["assertions"] = run.assertions;
  run.out.report["status"] = run.out.pass ? "pass" : "fail";
  run.out.csv = run.csv.str();
  return run.out;
}

int run_scenario_files(const std::string& kind, const std::string& config_path, const std::string& out_dir,
                       std::optional<std::uint64_t> seed_override) {
  namespace fs = std::filesystem;
  std::vector<std::string> log;
  auto write = [&](const std::string& name, const std::string& text) {
    std::ofstream f(fs::path(out_dir) / name, std::ios::binary);
    f << text;
    if (!f) throw PipelineError("cannot write " + (fs::path(out_dir) / name).string());
  };
  try {
    fs::create_directories(out_dir);
    fs::remove(fs::path(out_dir) / (kind + ".FAILED"));
  } catch (const std::exception& e) {
    log.push_back(std::string("cannot prepare output directory: ") + e.what());
    for (const auto& l : log) std::fprintf(stderr, "%s\n", l.c_str());
    return 2;
  }
  const auto t0 = std::chrono::steady_clock::now();
  ScenarioOutput partial;
  try {
    std::ifstream in(config_path);
    if (!in) throw InvalidInput("cannot open config " + config_path);
    json config;
    try {
      config = json::parse(in);
    } catch (const json::exception& e) {
      throw InvalidInput(std::string("config is not valid JSON: ") + e.what());
    }
    ScenarioOutput out = run_scenario(kind, std::move(config), seed_override, &partial);
    out.log.push_back("[" + kind + "] total " + fmt(seconds_since(t0)) + " s");
    write(kind + ".json", out.report.dump(2) + "\n");
    write(kind + ".csv", out.csv);
    std::string text;
    for (const auto& l : out.log) text += l + "\n";
    write(kind + ".log", text);
    return out.pass ? 0 : 1;
  } catch (const std::exception& e) {
    json report = partial.report;
    if (report.is_null())
      report = {{"schema_version", kSchemaVersion}, {"scenario", kind}, {"status", "error"}, {"error", e.what()}};
    try {
      write(kind + ".json", report.dump(2) + "\n");
      if (!partial.csv.empty()) write(kind + ".csv", partial.csv);
      write(kind + ".FAILED", std::string(e.what()) + "\n");
      std::string text;
      for (const auto& l : partial.log) text += l + "\n";
      write(kind + ".log", text + "[" + kind + "] error: " + e.what() + "\n");
    } catch (...) {
    }
    const std::string msg = e.what();
    std::fprintf(stderr, "%s\n", (msg.rfind(kind + ": ", 0) == 0 ? msg : kind + ": " + msg).c_str());
    return 2;
  }
}

}  // namespace legspec
