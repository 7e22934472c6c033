#pragma once

#include <memory>
#include <mutex>
#include <string>
#include <vector>

#include "legspec/circle_function.hpp"
#include "legspec/flow.hpp"
#include "legspec/front.hpp"
#include "legspec/gfqi.hpp"
#include "legspec/hamiltonian.hpp"

namespace legspec {

/// One generator of a word: a Hamiltonian flow over [t0, t1], a translation
/// T_f, or a Reeb shift.
struct Atom {
  enum class Kind { flow, translation, reeb };
  Kind kind = Kind::reeb;
  std::shared_ptr<const ContactHamiltonian> h;
  double t0 = 0.0, t1 = 1.0;
  CircleFunction f;
  double c = 0.0;

  Atom inverse() const;
  bool equivariant() const;
  bool periodic() const;
  std::string describe() const;
  /// The atom as a point map; constant and base-function flows are exact.
  std::shared_ptr<const JetMap> map() const;
};

struct PipelineOptions {
  int fine = 512;                   // transport samples per slice
  double min_graphicality = 0.25;   // below this, momentum flows fold instead
  bool allow_fold = true;
};

/// Immutable contactomorphism given as the composition a_1 o a_2 o ... o a_n
/// (a_n acts first).
class ContactomorphismHandle {
 public:
  ContactomorphismHandle() = default;
  explicit ContactomorphismHandle(std::vector<Atom> atoms);

  static ContactomorphismHandle identity() { return {}; }
  static ContactomorphismHandle flow(std::shared_ptr<const ContactHamiltonian> h, double t0 = 0.0, double t1 = 1.0);
  static ContactomorphismHandle flow(const std::string& h, double t0 = 0.0, double t1 = 1.0);
  static ContactomorphismHandle translation(const CircleFunction& f);
  static ContactomorphismHandle reeb(double c);

  ContactomorphismHandle inverse() const;
  /// this o other.
  ContactomorphismHandle compose(const ContactomorphismHandle& other) const;
  /// alpha o this o alpha^-1.
  ContactomorphismHandle conjugate(const ContactomorphismHandle& alpha) const;
  ContactomorphismHandle power(int k) const;

  const std::vector<Atom>& atoms() const noexcept { return atoms_; }
  bool is_identity() const noexcept { return atoms_.empty(); }
  bool equivariant() const;
  bool periodic() const;
  std::string describe() const;

  JetPoint apply(const JetPoint& x) const;
  void apply_all(std::span<JetPoint> pts) const;
  /// Point maps in application order.
  std::vector<std::shared_ptr<const JetMap>> maps() const;

  /// Gfqi of the image of the Legendrian generated by `l`.
  Gfqi image_of(const Gfqi& l, const PipelineOptions& opt = {}) const;
  Gfqi image_of_zero_section(const PipelineOptions& opt = {}) const { return image_of(zero_section(), opt); }

  /// Image of O by pointwise transport with re-sampling.
  LegendrianFront front_of_zero_section(int n) const;

 private:
  std::vector<Atom> atoms_;
  struct MapCache {
    std::once_flag once;
    std::vector<std::shared_ptr<const JetMap>> maps;
  };
  std::shared_ptr<MapCache> cache_ = std::make_shared<MapCache>();
};

/// Hausdorff distance between the wavefront of the pipeline Gfqi and the
/// pointwise image of O.
double pipeline_front_discrepancy(const ContactomorphismHandle& phi, int n, const PipelineOptions& opt = {});

}  // namespace legspec
