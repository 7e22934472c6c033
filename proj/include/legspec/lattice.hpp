#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "legspec/gfqi.hpp"
#include "legspec/grid.hpp"

namespace legspec {

struct LatticeConfig {
  int n_q = 128;              // base samples
  int fiber_intervals = 32;   // intervals across [-R+, R+] on each fiber axis (made even)
  double margin = 1.0;        // R+ = core radius + margin
  int outer_points = 3;       // extra points per side on negative axes, out to R-
  int d_max = 3;
  std::size_t cell_cap = 50'000'000;
  bool parallel = true;       // OpenMP sampling kernel
};

/// Truncation box and negative-end level chosen from Gfqi metadata.
struct BoxChoice {
  double r_plus = 0.0;
  double r_minus = 0.0;
  double b = 0.0;
  bool b_from_samples = false;  // d_- = 0: b = min(sampled S) - 1
  ProductDomain domain;
};

BoxChoice choose_box(const Gfqi& s, const LatticeConfig& cfg);

/// Vertex values on the product lattice in domain order.
/// The serial and parallel kernels produce bitwise identical output.
std::vector<double> sample_lattice_serial(const Gfqi& s, const ProductDomain& domain);
std::vector<double> sample_lattice_parallel(const Gfqi& s, const ProductDomain& domain);

struct LatticeSample {
  BoxChoice box;
  std::vector<double> values;
};

/// Chooses the box, samples S, fixes b and checks the box boundary: S must
/// increase outward across positive faces and lie below b on negative faces.
/// Throws PipelineError with a witness point otherwise.
LatticeSample sample_gfqi(const Gfqi& s, const LatticeConfig& cfg);

/// Crude sup of |grad S| over the core part of the lattice (finite differences).
double lattice_gradient_bound(const LatticeSample& sample);

}  // namespace legspec
