#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "legspec/grid.hpp"

namespace legspec {

/// Cubical lower-star filtration on S^1 x (fiber lattice), relative to the
/// masked subcomplex {S <= b}, which is deleted. Cells are stored in
/// filtration order; boundaries are CSR lists of positions (ascending).
///
/// Cell code: vertex * 2^(d+1) + direction bits (bit 0 = q, bit j+1 = fiber
/// axis j). Ties are broken by (dimension, code).
struct FilteredComplex {
  ProductDomain domain;
  double b = 0.0;
  int max_dim = 0;
  std::size_t masked_cells = 0;
  std::vector<double> values;
  std::vector<std::uint8_t> dims;
  std::vector<std::uint64_t> codes;
  std::vector<std::size_t> offsets;
  std::vector<std::uint32_t> faces;

  std::size_t size() const noexcept { return values.size(); }
  std::span<const std::uint32_t> boundary(std::size_t pos) const {
    return {faces.data() + offsets[pos], offsets[pos + 1] - offsets[pos]};
  }
};

FilteredComplex build_cubical_filtration(const ProductDomain& domain, std::span<const double> vertex_values,
                                         double b);

/// Vertex (index into the domain) achieving the value of the cell `code`.
std::size_t cell_argmax_vertex(const ProductDomain& domain, std::span<const double> vertex_values,
                               std::uint64_t code);

struct IndexPair {
  std::uint32_t birth;
  std::uint32_t death;
  int degree;
};

struct Interval {
  double birth;
  double death;
  int degree;
};

struct EssentialClass {
  double birth;
  int degree;
  std::uint32_t position;
};

struct ReductionStats {
  std::size_t cells = 0;
  std::size_t masked_cells = 0;
  std::size_t column_additions = 0;
  std::size_t cleared_columns = 0;
  double seconds = 0.0;
};

struct PersistenceResult {
  std::vector<IndexPair> index_pairs;      // every pairing, including zero-length ones
  std::vector<Interval> finite;            // pairs with death > birth
  std::vector<EssentialClass> essential;
  ReductionStats stats;
};

/// Z/2 reduction with clearing, dimensions processed top-down.
PersistenceResult reduce(const FilteredComplex& complex);

}  // namespace legspec
