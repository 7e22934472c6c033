#pragma once

#include <functional>
#include <iosfwd>
#include <memory>
#include <string>
#include <vector>

#include "legspec/critical.hpp"
#include "legspec/gfqi.hpp"
#include "legspec/hamiltonian.hpp"
#include "legspec/handle.hpp"
#include "legspec/spectral.hpp"

namespace legspec {

struct FamilyOptions {
  int time_samples = 17;    // m
  int steps = 32;           // k: RK4 steps per unit time, raised to the CFL guard when needed
  int n_front = 256;        // base resolution of wavefronts and transported fronts
  double front_margin = 2.0;
  SpectralConfig spectral;
  PipelineOptions pipeline;
};

/// S_t generating phi_H^t(L_0) at sample times in [0, 1].
struct GfqiFamily {
  std::shared_ptr<const ContactHamiltonian> h;
  Gfqi base = zero_section();
  std::vector<double> times;
  std::vector<Gfqi> members;
  std::function<Gfqi(double)> member_at;  // member at an arbitrary time
  std::string construction;
};

/// Builds the family without validation. Supported generators: H = f(q)
/// (translation identity), H = c (Reeb shift), z-independent H (transport of
/// the slices of L_0, folding for momentum flows). Others: UnsupportedClass.
GfqiFamily build_family(std::shared_ptr<const ContactHamiltonian> h, const FamilyOptions& opt = {},
                        const Gfqi& base = zero_section());

struct Obligation {
  std::string name;
  bool pass = true;
  double margin = 0.0;  // worst slack; negative when violated
  std::string witness;
};

/// ℓ±(S_{t1} ⊖ S_{t0}) against (t1 - t0)·[min H, max H] over the swept fronts.
struct LemmaRow {
  double t0 = 0.0, t1 = 0.0;
  double minus = 0.0, plus = 0.0;
  double lower = 0.0, upper = 0.0;
  double tol = 0.0;
  bool pass = true;
};

struct FamilyReport {
  std::vector<Obligation> obligations;
  std::vector<LemmaRow> lemma;
  double front_distance = 0.0;
  double tol_front = 0.0;
  bool pass() const;
  /// First failing obligation with its witness, or empty.
  std::string failure() const;
};

/// Checks (1) wavefront(S_1) against the RK4-transported front of L_0,
/// (2) the Lemma bounds for every consecutive pair, (3) closeness of
/// consecutive wavefronts, and (4) when `comparison` (generated by K >= H) is
/// given, ℓ± of members ordered pointwise in t.
FamilyReport validate_family(const GfqiFamily& family, const FamilyOptions& opt = {},
                             const GfqiFamily* comparison = nullptr);

/// build_family followed by validate_family; PipelineError on failure.
GfqiFamily family_for_isotopy(std::shared_ptr<const ContactHamiltonian> h, const FamilyOptions& opt = {},
                              const Gfqi& base = zero_section());

struct CerfPoint {
  double t = 0.0, c = 0.0;
  double q = 0.0, p = 0.0, z = 0.0;  // representing point of L_t
  int branch = -1;
  bool simple = false;               // nondegenerate and slope measured
  double slope = 0.0;
  double h_value = 0.0;              // H at the representing point
};

struct CerfOptions {
  WavefrontOptions wave;
  double dt_fd = 1e-3;
  double min_hessian = 1e-3;  // smaller |eigenvalue| counts as degenerate
  double slope_tol = -1.0;  // < 0: 0.05 * max |H| over the fronts
};

struct CerfDiagram {
  std::vector<CerfPoint> points;
  double slope_tol = 0.0;
  double max_abs_h = 0.0;
  double worst_slope_error = 0.0;
  int simple_points = 0;
  int skipped_points = 0;
  void write_csv(std::ostream& os) const;
};

/// Critical values of S_t ⊖ S_ref at the family times, with branch ids and
/// slopes measured by central differences of Newton-continued critical points.
CerfDiagram cerf_diagram(const GfqiFamily& family, const Gfqi& ref, const CerfOptions& opt = {});

}  // namespace legspec
