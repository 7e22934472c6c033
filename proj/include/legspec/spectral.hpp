#pragma once

#include <string>
#include <vector>

#include "legspec/gfqi.hpp"
#include "legspec/lattice.hpp"
#include "legspec/persistence.hpp"

namespace legspec {

struct SpectralConfig {
  LatticeConfig lattice;
  bool refine = true;       // Newton-polish births to nearby critical values
  double tol_crit = 1e-6;
};

/// (l_-, l_+) of a Gfqi: births of the essential classes in degrees d_- and
/// d_- + 1 of the sublevel filtration relative to its negative end.
struct SpectralPair {
  double minus = 0.0;
  double plus = 0.0;
  double raw_minus = 0.0;   // lattice births before refinement
  double raw_plus = 0.0;
  double tol_spec = 0.0;    // 2 * sup|grad S| * spacing
  int degree_minus = 0;
  bool refined_minus = false;
  bool refined_plus = false;
  double r_plus = 0.0, r_minus = 0.0, b = 0.0;
  ReductionStats stats;
  std::vector<std::string> diagnostics;
};

SpectralPair spectral_pair(const Gfqi& s, const SpectralConfig& cfg = {});

/// Lattice pipeline pieces, exposed for tests and the benchmark.
FilteredComplex build_filtration(const Gfqi& s, const LatticeConfig& cfg, LatticeSample* sample_out = nullptr);

/// Birth of the degree-d_- essential class of the fiber function S(q, .),
/// i.e. the spectral value of S restricted to {q} x fiber.
double fiber_spectral_value(const Gfqi& s, double q, const SpectralConfig& cfg);

struct ConvergenceRow {
  int resolution = 0;
  double raw_minus = 0.0, raw_plus = 0.0;
  double minus = 0.0, plus = 0.0;
  double tol_spec = 0.0;
  double seconds = 0.0;
};

struct ConvergenceReport {
  std::vector<ConvergenceRow> rows;
  std::vector<std::string> flags;  // non-monotone drift warnings
};

/// Spectral pair at each resolution (base n_q = resolution, fiber intervals
/// = resolution / 2, clamped to at least 8).
ConvergenceReport convergence_study(const Gfqi& s, const std::vector<int>& resolutions, const SpectralConfig& base);

}  // namespace legspec
