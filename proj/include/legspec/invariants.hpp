#pragma once

#include <cstdint>
#include <limits>
#include <random>
#include <string>
#include <vector>

#include "legspec/handle.hpp"
#include "legspec/spectral.hpp"

namespace legspec {

struct SnapEvent {
  double value = 0.0;
  long long result = 0;
  std::string context;
};

/// Record of robust rounding: every call counts as a comparison, every
/// non-exact snap to an integer is an event.
struct SnapLog {
  long long comparisons = 0;
  std::vector<SnapEvent> events;
  void merge(const SnapLog& other);
  double rate() const { return comparisons ? static_cast<double>(events.size()) / comparisons : 0.0; }
};

/// Values within eps of an integer snap to it before rounding. Values within
/// 1e-9 of an integer are treated as exact and not logged.
long long robust_floor(double x, double eps = 1e-3, SnapLog* log = nullptr, const std::string& context = {});
long long robust_ceil(double x, double eps = 1e-3, SnapLog* log = nullptr, const std::string& context = {});

struct InvariantConfig {
  SpectralConfig spectral;
  PipelineOptions pipeline;
  double eps_int = 1e-3;
};

struct SpectralReport {
  std::string handle;
  double minus = 0.0, plus = 0.0;
  double tol_spec = 0.0;
  int fiber_dim = 0;
  bool has_integer_parts = false;  // periodic handles only
  long long floor_minus = 0, ceil_plus = 0;
  std::string provenance;
  SnapLog snaps;
};

SpectralReport ell_pm(const ContactomorphismHandle& phi, const InvariantConfig& cfg = {});

/// Finite stand-in for "for all alpha": identity first, then seeded
/// translations, lifted flows, Reeb shifts and short words of them.
struct ConjugatorSample {
  std::uint64_t seed = 0;
  std::vector<ContactomorphismHandle> members;
  std::size_t size() const noexcept { return members.size(); }
};

struct ConjugatorOptions {
  int size = 24;
  int max_word_length = 3;
  double translation_amplitude = 0.08;  // sup |f| of random translations
  double flow_amplitude = 0.15;         // sup |H| of random lifted flows
  double reeb_amplitude = 0.5;
  bool z_dependent = true;              // allow z-periodic flows (not z-independent)
};

ConjugatorSample make_conjugator_sample(std::uint64_t seed, const ConjugatorOptions& opt = {});

/// (c + a cos 2pi(q - f) + b sin 2pi(z - g)) plateau(p, 3, 4) with |c| <= level,
/// |a| <= 0.15, |b| <= 0.1 (b = 0 unless z_dependent). The orbit of O stays
/// where the plateau is 1, so the flow keeps O graphical.
std::shared_ptr<const ContactHamiltonian> random_periodic_hamiltonian(std::mt19937_64& rng, double level,
                                                                      bool z_dependent);

struct OrderResult {
  enum class Verdict { violated, consistent_on_sample };
  Verdict verdict = Verdict::consistent_on_sample;
  int witness = -1;           // index into the sample when violated
  std::string witness_description;
  double value = 0.0;         // l+ at the witness
  double margin = 0.0;        // max over the sample of l+(a phi psi^-1 a^-1)
  double tol = 0.0;
  std::vector<double> values;
};

std::string to_string(OrderResult::Verdict v);

/// phi <= psi iff l+(a phi psi^-1 a^-1) <= 0 for all a. A sampled value above
/// tol certifies NOT(phi <= psi); otherwise only consistency with the sample.
OrderResult order_test(const ContactomorphismHandle& phi, const ContactomorphismHandle& psi,
                       const ConjugatorSample& sample, const InvariantConfig& cfg = {});

/// Integrals over [0, 1] of max H_t and min H_t for a generator of phi psi^-1.
struct GeneratorBounds {
  double int_max = 0.0;
  double int_min = 0.0;
};

/// Sampled max/min of H_t over q, |p| <= p_range, z in [0, 1) integrated in t.
GeneratorBounds sample_generator_bounds(const ContactHamiltonian& h, double scale = 1.0, double p_range = -1.0);

struct IntegerInterval {
  long long lower = 0;
  long long upper = std::numeric_limits<long long>::max();  // max() when no generator bound
  bool has_upper = false;
};

struct MetricEstimate {
  IntegerInterval rho_osc, rho_sup;
  int argmax_osc = -1, argmax_sup = -1;
  std::vector<double> minus, plus;  // per conjugator
  bool consistent = true;           // lower <= upper
  SnapLog snaps;
};

MetricEstimate metric_estimate(const ContactomorphismHandle& phi, const ContactomorphismHandle& psi,
                               const ConjugatorSample& sample, const InvariantConfig& cfg = {},
                               const GeneratorBounds* generator = nullptr);

struct NuEstimate {
  std::vector<double> ell_plus;       // l+(phi^k), k = 1..K
  std::vector<double> per_k;          // l+(phi^k) / k
  std::vector<long long> ceil_seq;    // robust ceil of l+(phi^k)
  std::vector<std::string> subadditivity_violations;
  double upper = 0.0;                 // inf_k ceil_k / k (Fekete)
  double lower = 0.0;                 // min of per_k over the tail k >= K/2
  double estimate = 0.0;              // l+(phi^K) / K
  SnapLog snaps;
};

/// With `alpha`, the sequence is l+(alpha phi^k alpha^-1).
NuEstimate nu_estimate(const ContactomorphismHandle& phi, int max_power, const InvariantConfig& cfg = {},
                       const ContactomorphismHandle* alpha = nullptr);

/// Upper bound on the displacement energy of the disk of radius r centred at
/// (q0, p0): q-translation by 2r + gap generated by s p chi(p), whose
/// oscillation is returned after checking numerically that the disk is moved
/// off itself.
double displacement_energy_bound(double q0, double p0, double r, double gap = 0.05);

struct ScenarioCheck {
  std::string name;
  double value = 0.0;
  double expected = 0.0;
  double tol = 0.0;
  bool pass = false;
};

struct RigidityReport {
  std::string scenario;
  std::vector<ScenarioCheck> checks;
  std::vector<std::string> skipped;  // conjugates outside the supported pipeline
  bool pass() const;
};

struct RigidityOptions {
  int max_power = 8;
  double c = 0.5;          // scenario B comparison level
  double tol = 1e-2;
};

/// Scenario "A": h = 1 near the zero section, nu(phi) and nu(a phi a^-1) = 1.
/// Scenario "B": phi_1 phi_2 generated in disjoint displaceable disks has
/// nu = 0 while a generator >= c on the zero wall has nu >= c.
RigidityReport rigidity_scenario(const std::string& which, const ConjugatorSample& sample,
                                 const RigidityOptions& opt = {}, const InvariantConfig& cfg = {});

}  // namespace legspec
