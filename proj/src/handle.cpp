#include "legspec/handle.hpp"

#include <cmath>
#include <sstream>

#include "legspec/critical.hpp"
#include "legspec/error.hpp"

namespace legspec {

namespace {

/// Sum of momentum flows; they commute, so a run of them is one map.
struct MomentumRun {
  std::vector<std::pair<MomentumProfile, double>> parts;

  MomentumProfile combined() const {
    MomentumProfile m;
    auto parts_copy = parts;
    m.h = [parts_copy](double p) {
      double s = 0.0;
      for (const auto& [h, tau] : parts_copy) s += tau * h.h(p);
      return s;
    };
    m.dh = [parts_copy](double p) {
      double s = 0.0;
      for (const auto& [h, tau] : parts_copy) s += tau * h.dh(p);
      return s;
    };
    std::ostringstream os;
    for (std::size_t i = 0; i < parts.size(); ++i) {
      m.sup_h += std::fabs(parts[i].second) * parts[i].first.sup_h;
      m.sup_dh += std::fabs(parts[i].second) * parts[i].first.sup_dh;
      os << (i ? "+" : "") << parts[i].second << "*(" << parts[i].first.label << ")";
    }
    m.label = os.str();
    return m;
  }
};

bool is_momentum(const Atom& a) {
  return a.kind == Atom::Kind::flow && a.h->cls() == HamiltonianClass::momentum;
}

}  // namespace

Atom Atom::inverse() const {
  Atom a = *this;
  switch (kind) {
    case Kind::flow: std::swap(a.t0, a.t1); break;
    case Kind::translation: a.f = f.scaled(-1.0); break;
    case Kind::reeb: a.c = -c; break;
  }
  return a;
}

bool Atom::equivariant() const { return kind != Kind::flow || h->flags().z_independent; }
bool Atom::periodic() const { return kind != Kind::flow || h->flags().z_periodic; }

std::string Atom::describe() const {
  std::ostringstream os;
  switch (kind) {
    case Kind::flow: os << "flow[" << h->text() << "," << t0 << "->" << t1 << "]"; break;
    case Kind::translation: os << "T[" << f.label << "]"; break;
    case Kind::reeb: os << "reeb[" << c << "]"; break;
  }
  return os.str();
}

std::shared_ptr<const JetMap> Atom::map() const {
  switch (kind) {
    case Kind::translation: return std::make_shared<TranslationMap>(f);
    case Kind::reeb: return std::make_shared<ReebMap>(c);
    case Kind::flow: break;
  }
  const double tau = t1 - t0;
  switch (h->cls()) {
    case HamiltonianClass::constant: return std::make_shared<ReebMap>(tau * h->constant_value());
    case HamiltonianClass::base_function: return std::make_shared<TranslationMap>(h->base_function().scaled(tau));
    case HamiltonianClass::momentum: return std::make_shared<MomentumFlowMap>(h->momentum_profile(), tau);
    default: return std::make_shared<HamiltonianFlowMap>(h, t0, t1);
  }
}

ContactomorphismHandle::ContactomorphismHandle(std::vector<Atom> atoms) : atoms_(std::move(atoms)) {
  for (const auto& a : atoms_)
    if (a.kind == Atom::Kind::flow && !a.h) throw InvalidInput("flow atom without a Hamiltonian");
}

ContactomorphismHandle ContactomorphismHandle::flow(std::shared_ptr<const ContactHamiltonian> h, double t0, double t1) {
  Atom a;
  a.kind = Atom::Kind::flow;
  a.h = std::move(h);
  a.t0 = t0;
  a.t1 = t1;
  return ContactomorphismHandle({a});
}

ContactomorphismHandle ContactomorphismHandle::flow(const std::string& h, double t0, double t1) {
  return flow(std::make_shared<ContactHamiltonian>(ContactHamiltonian::parse(h)), t0, t1);
}

ContactomorphismHandle ContactomorphismHandle::translation(const CircleFunction& f) {
  Atom a;
  a.kind = Atom::Kind::translation;
  a.f = f;
  return ContactomorphismHandle({a});
}

ContactomorphismHandle ContactomorphismHandle::reeb(double c) {
  Atom a;
  a.kind = Atom::Kind::reeb;
  a.c = c;
  return ContactomorphismHandle({a});
}

ContactomorphismHandle ContactomorphismHandle::inverse() const {
  std::vector<Atom> out;
  out.reserve(atoms_.size());
  for (auto it = atoms_.rbegin(); it != atoms_.rend(); ++it) out.push_back(it->inverse());
  return ContactomorphismHandle(std::move(out));
}

ContactomorphismHandle ContactomorphismHandle::compose(const ContactomorphismHandle& other) const {
  std::vector<Atom> out = atoms_;
  out.insert(out.end(), other.atoms_.begin(), other.atoms_.end());
  return ContactomorphismHandle(std::move(out));
}

ContactomorphismHandle ContactomorphismHandle::conjugate(const ContactomorphismHandle& alpha) const {
  return alpha.compose(*this).compose(alpha.inverse());
}

ContactomorphismHandle ContactomorphismHandle::power(int k) const {
  const ContactomorphismHandle base = k < 0 ? inverse() : *this;
  ContactomorphismHandle out;
  for (int i = 0; i < std::abs(k); ++i) out = out.compose(base);
  return out;
}

bool ContactomorphismHandle::equivariant() const {
  for (const auto& a : atoms_)
    if (!a.equivariant()) return false;
  return true;
}

bool ContactomorphismHandle::periodic() const {
  for (const auto& a : atoms_)
    if (!a.periodic()) return false;
  return true;
}

std::string ContactomorphismHandle::describe() const {
  if (atoms_.empty()) return "id";
  std::string s;
  for (std::size_t i = 0; i < atoms_.size(); ++i) s += (i ? " o " : "") + atoms_[i].describe();
  return s;
}

std::vector<std::shared_ptr<const JetMap>> ContactomorphismHandle::maps() const {
  std::call_once(cache_->once, [this] {
    for (auto it = atoms_.rbegin(); it != atoms_.rend(); ++it) cache_->maps.push_back(it->map());
  });
  return cache_->maps;
}

JetPoint ContactomorphismHandle::apply(const JetPoint& x) const {
  JetPoint y = x;
  for (const auto& m : maps()) y = m->apply(y);
  return y;
}

void ContactomorphismHandle::apply_all(std::span<JetPoint> pts) const {
  for (const auto& m : maps()) m->apply_all(pts);
}

Gfqi ContactomorphismHandle::image_of(const Gfqi& l, const PipelineOptions& opt) const {
  Gfqi s = l;
  MomentumRun run;
  auto flush = [&] {
    if (run.parts.empty()) return;
    const MomentumProfile m = run.combined();
    run.parts.clear();
    auto map = std::make_shared<MomentumFlowMap>(m, 1.0);
    if (transport_graphicality(s, *map, opt.fine) >= opt.min_graphicality) {
      s = transport(s, map, opt.fine);
    } else if (opt.allow_fold) {
      s = fold_momentum(s, m, 1.0);
    } else {
      throw UnsupportedClass("momentum flow " + m.label + " folds the front and folding is disabled");
    }
  };
  for (auto it = atoms_.rbegin(); it != atoms_.rend(); ++it) {
    const Atom& a = *it;
    if (is_momentum(a)) {
      run.parts.emplace_back(a.h->momentum_profile(), a.t1 - a.t0);
      continue;
    }
    flush();
    if (a.kind == Atom::Kind::translation) {
      s = add_base_function(s, a.f);
    } else if (a.kind == Atom::Kind::reeb) {
      s = add_constant(s, a.c);
    } else if (a.h->cls() == HamiltonianClass::constant) {
      s = add_constant(s, (a.t1 - a.t0) * a.h->constant_value());
    } else if (a.h->cls() == HamiltonianClass::base_function) {
      s = add_base_function(s, a.h->base_function().scaled(a.t1 - a.t0));
    } else {
      // Every fiber point would need its own integrated slice table.
      if (s.fiber_dim() > 0)
        throw UnsupportedClass("flow of '" + a.h->text() + "' acts on a Gfqi with fiber dimension " +
                               std::to_string(s.fiber_dim()) + "; general flows are realized on graphs only");
      auto map = std::make_shared<HamiltonianFlowMap>(a.h, a.t0, a.t1);
      const double g = transport_graphicality(s, *map, opt.fine);
      if (g < opt.min_graphicality) {
        std::ostringstream os;
        os << "flow of '" << a.h->text() << "' folds the front (graphicality " << g
           << "); only momentum flows can be folded";
        throw UnsupportedClass(os.str());
      }
      s = transport(s, map, opt.fine);
    }
  }
  flush();
  return s;
}

LegendrianFront ContactomorphismHandle::front_of_zero_section(int n) const { return push_zero_section(maps(), n); }

double pipeline_front_discrepancy(const ContactomorphismHandle& phi, int n, const PipelineOptions& opt) {
  const Gfqi s = phi.image_of_zero_section(opt);
  WavefrontOptions wo;
  wo.n_q = n;
  const LegendrianFront a = wavefront(s, wo);
  const LegendrianFront b = phi.front_of_zero_section(n);
  return hausdorff_distance(a, b);
}

}  // namespace legspec
