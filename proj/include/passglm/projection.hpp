#pragma once

// Sparse random projection R^D -> R^k with lazily generated entries.

#include <cmath>
#include <cstdint>
#include <memory>

#include "passglm/records.hpp"

namespace passglm {

/// Entries are +-sqrt(s/k) with probability 1/(2s) each and 0 otherwise,
/// s = sqrt(D). Column j is regenerated on demand from a hash of (seed, j),
/// so no O(D k) matrix is ever stored.
struct ProjectionSpec {
  std::uint64_t seed = 0;
  std::size_t input_dim = 0;   // D
  std::size_t output_dim = 0;  // k

  ProjectionSpec(std::uint64_t seed, std::size_t input_dim, std::size_t output_dim);

  double sparsity() const { return std::sqrt(static_cast<double>(input_dim)); }
  double entry_magnitude() const { return std::sqrt(sparsity() / static_cast<double>(output_dim)); }
};

/// Calls fn(row, value) for each nonzero of column `col`, rows ascending.
template <typename Fn>
void for_each_column_entry(const ProjectionSpec& spec, std::uint32_t col, Fn&& fn);

/// P x. Throws InvalidArgument when an index is >= D.
SparseVector project(const ProjectionSpec& spec, const SparseVector& x);

/// Dense P for small problems and tests.
Eigen::MatrixXd projection_matrix(const ProjectionSpec& spec);

/// Applies a projection to every record of an underlying stream.
class ProjectedStream final : public RecordStream {
 public:
  ProjectedStream(std::unique_ptr<RecordStream> inner, ProjectionSpec spec);

  bool next(Record& out) override;
  void reset() override;
  std::size_t dim() const override { return spec_.output_dim; }

 private:
  std::unique_ptr<RecordStream> inner_;
  ProjectionSpec spec_;
  Record buf_;
};

namespace detail {

inline std::uint64_t splitmix64(std::uint64_t& state) {
  std::uint64_t z = (state += 0x9E3779B97F4A7C15ULL);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

// uniform in (0, 1]
inline double unit_open_closed(std::uint64_t& state) {
  return (static_cast<double>(splitmix64(state) >> 11) + 1.0) * 0x1.0p-53;
}

}  // namespace detail

template <typename Fn>
void for_each_column_entry(const ProjectionSpec& spec, std::uint32_t col, Fn&& fn) {
  std::uint64_t state = spec.seed ^ (0xD1B54A32D192ED03ULL * (static_cast<std::uint64_t>(col) + 1));
  detail::splitmix64(state);
  const double s = spec.sparsity();
  const double mag = spec.entry_magnitude();
  const std::size_t k = spec.output_dim;
  if (s <= 1.0) {
    // D = 1: every entry is nonzero
    for (std::size_t row = 0; row < k; ++row) {
      fn(static_cast<std::uint32_t>(row), (detail::splitmix64(state) & 1) ? mag : -mag);
    }
    return;
  }
  // Gaps between nonzeros are geometric with success probability 1/s.
  const double log_q = std::log1p(-1.0 / s);
  double row = -1.0;
  while (true) {
    const double gap = std::floor(std::log(detail::unit_open_closed(state)) / log_q);
    row += gap + 1.0;
    if (row >= static_cast<double>(k)) return;
    fn(static_cast<std::uint32_t>(row), (detail::splitmix64(state) & 1) ? mag : -mag);
  }
}

}  // namespace passglm
