#include "legspec/persistence.hpp"

#include <algorithm>
#include <bit>
#include <chrono>
#include <numeric>

#include "legspec/error.hpp"

namespace legspec {

namespace {

struct CubicalIndex {
  const ProductDomain& dom;
  int d;
  std::size_t n;
  std::vector<std::size_t> stride;  // vertex stride per direction (q first)
  std::vector<int> extent;          // points per direction

  explicit CubicalIndex(const ProductDomain& domain)
      : dom(domain), d(domain.fiber_dim()), n(domain.base.size()) {
    stride.push_back(1);
    extent.push_back(static_cast<int>(n));
    std::size_t s = n;
    for (int j = 0; j < d; ++j) {
      stride.push_back(s);
      extent.push_back(static_cast<int>(dom.fiber_axes[j].size()));
      s *= dom.fiber_axes[j].size();
    }
  }

  int directions() const { return d + 1; }

  void coords(std::size_t v, std::vector<int>& c) const {
    for (int a = 0; a <= d; ++a) {
      c[a] = static_cast<int>(v % extent[a]);
      v /= extent[a];
    }
  }

  /// Neighbour along direction a (wraps in q). Caller checks validity.
  std::size_t step(std::size_t v, int a, int ca) const {
    if (a == 0) return ca + 1 == extent[0] ? v + 1 - extent[0] : v + 1;
    return v + stride[a];
  }

  bool valid(const std::vector<int>& c, unsigned bits) const {
    for (int a = 1; a <= d; ++a)
      if ((bits >> a & 1u) && c[a] + 1 >= extent[a]) return false;
    return true;
  }

  template <class F>
  void for_vertices(std::size_t v, unsigned bits, std::vector<int>& c, F&& f) const {
    coords(v, c);
    const unsigned dirs = static_cast<unsigned>(d + 1);
    for (unsigned sub = bits;; sub = (sub - 1) & bits) {
      std::size_t w = v;
      for (unsigned a = 0; a < dirs; ++a)
        if (sub >> a & 1u) w = step(w, static_cast<int>(a), c[a]);
      f(w);
      if (sub == 0) break;
    }
  }
};

}  // namespace

std::size_t cell_argmax_vertex(const ProductDomain& domain, std::span<const double> vertex_values,
                               std::uint64_t code) {
  CubicalIndex ix(domain);
  const unsigned shift = static_cast<unsigned>(ix.directions());
  const std::size_t v = code >> shift;
  const unsigned bits = static_cast<unsigned>(code & ((1u << shift) - 1));
  std::vector<int> c(ix.directions());
  std::size_t best = v;
  ix.for_vertices(v, bits, c, [&](std::size_t w) {
    if (vertex_values[w] > vertex_values[best]) best = w;
  });
  return best;
}

FilteredComplex build_cubical_filtration(const ProductDomain& domain, std::span<const double> vertex_values,
                                         double b) {
  if (vertex_values.size() != domain.cardinality())
    throw InvalidInput("build_cubical_filtration: value count does not match the lattice");
  CubicalIndex ix(domain);
  const int dirs = ix.directions();
  const unsigned shift = static_cast<unsigned>(dirs);
  const unsigned nbits = 1u << shift;
  const std::size_t nv = domain.cardinality();
  if (static_cast<double>(nv) * nbits >= 4.0e9) throw PipelineError("lattice too large for 32-bit positions");

  FilteredComplex fc;
  fc.domain = domain;
  fc.b = b;
  fc.max_dim = dirs;

  struct Cell {
    double value;
    std::uint64_t code;
    std::uint8_t dim;
  };
  std::vector<Cell> cells;
  cells.reserve(nv * nbits / 2);
  std::vector<int> c(dirs);
  for (std::size_t v = 0; v < nv; ++v) {
    ix.coords(v, c);
    for (unsigned bits = 0; bits < nbits; ++bits) {
      if (!ix.valid(c, bits)) continue;
      double m = -1e300;
      ix.for_vertices(v, bits, c, [&](std::size_t w) { m = std::max(m, vertex_values[w]); });
      if (m <= b) {
        ++fc.masked_cells;
        continue;
      }
      cells.push_back({m, (static_cast<std::uint64_t>(v) << shift) | bits,
                       static_cast<std::uint8_t>(std::popcount(bits))});
    }
  }
  std::sort(cells.begin(), cells.end(), [](const Cell& x, const Cell& y) {
    if (x.value != y.value) return x.value < y.value;
    if (x.dim != y.dim) return x.dim < y.dim;
    return x.code < y.code;
  });

  const std::size_t ncells = cells.size();
  std::vector<std::uint32_t> position(nv * nbits, UINT32_MAX);
  fc.values.resize(ncells);
  fc.dims.resize(ncells);
  fc.codes.resize(ncells);
  for (std::size_t i = 0; i < ncells; ++i) {
    fc.values[i] = cells[i].value;
    fc.dims[i] = cells[i].dim;
    fc.codes[i] = cells[i].code;
    position[cells[i].code] = static_cast<std::uint32_t>(i);
  }
  cells.clear();
  cells.shrink_to_fit();

  fc.offsets.resize(ncells + 1);
  fc.offsets[0] = 0;
  std::vector<std::uint32_t> col;
  for (std::size_t i = 0; i < ncells; ++i) {
    const std::uint64_t code = fc.codes[i];
    const std::size_t v = code >> shift;
    const unsigned bits = static_cast<unsigned>(code & (nbits - 1));
    col.clear();
    ix.coords(v, c);
    for (int a = 0; a < dirs; ++a) {
      if (!(bits >> a & 1u)) continue;
      const unsigned fb = bits & ~(1u << a);
      const std::uint32_t f0 = position[(static_cast<std::uint64_t>(v) << shift) | fb];
      const std::size_t w = ix.step(v, a, c[a]);
      const std::uint32_t f1 = position[(static_cast<std::uint64_t>(w) << shift) | fb];
      if (f0 != UINT32_MAX) col.push_back(f0);
      if (f1 != UINT32_MAX) col.push_back(f1);
    }
    std::sort(col.begin(), col.end());
    fc.faces.insert(fc.faces.end(), col.begin(), col.end());
    fc.offsets[i + 1] = fc.faces.size();
  }
  return fc;
}

PersistenceResult reduce(const FilteredComplex& fc) {
  const auto t0 = std::chrono::steady_clock::now();
  const std::size_t n = fc.size();
  PersistenceResult res;
  res.stats.cells = n;
  res.stats.masked_cells = fc.masked_cells;

  std::vector<std::vector<std::uint32_t>> by_dim(fc.max_dim + 1);
  for (std::size_t i = 0; i < n; ++i) by_dim[fc.dims[i]].push_back(static_cast<std::uint32_t>(i));

  // Reduced column owning pivot row r lives at pool[start[r], start[r] + len[r]).
  std::vector<std::int64_t> start(n, -1);
  std::vector<std::uint32_t> len(n, 0);
  std::vector<std::uint32_t> pool;
  std::vector<std::uint8_t> cleared(n, 0), is_death(n, 0), is_birth(n, 0);
  std::vector<std::uint32_t> col, tmp;

  for (int k = fc.max_dim; k >= 1; --k) {
    for (std::uint32_t j : by_dim[k]) {
      if (cleared[j]) {
        ++res.stats.cleared_columns;
        continue;
      }
      auto bd = fc.boundary(j);
      col.assign(bd.begin(), bd.end());
      while (!col.empty()) {
        const std::uint32_t low = col.back();
        if (start[low] < 0) break;
        const std::uint32_t* other = pool.data() + start[low];
        tmp.clear();
        std::set_symmetric_difference(col.begin(), col.end(), other, other + len[low], std::back_inserter(tmp));
        col.swap(tmp);
        ++res.stats.column_additions;
      }
      if (col.empty()) continue;
      const std::uint32_t low = col.back();
      start[low] = static_cast<std::int64_t>(pool.size());
      len[low] = static_cast<std::uint32_t>(col.size());
      pool.insert(pool.end(), col.begin(), col.end());
      cleared[low] = 1;
      is_birth[low] = 1;
      is_death[j] = 1;
      res.index_pairs.push_back({low, j, k - 1});
    }
  }
  std::sort(res.index_pairs.begin(), res.index_pairs.end(),
            [](const IndexPair& a, const IndexPair& b) { return a.birth < b.birth; });
  for (const auto& p : res.index_pairs)
    if (fc.values[p.death] > fc.values[p.birth]) res.finite.push_back({fc.values[p.birth], fc.values[p.death], p.degree});
  for (std::size_t i = 0; i < n; ++i)
    if (!is_birth[i] && !is_death[i])
      res.essential.push_back({fc.values[i], fc.dims[i], static_cast<std::uint32_t>(i)});
  res.stats.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return res;
}

}  // namespace legspec
