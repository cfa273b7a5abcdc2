#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <vector>

namespace passglm {

inline constexpr std::uint64_t kDefaultIndexCap = std::uint64_t{1} << 26;

/// All multi-indices k in N^d with |k| <= M in graded lexicographic order.
///
/// A multi-index of degree m is represented by its nondecreasing variable
/// tuple (j_1 <= ... <= j_m); k = (2,0) is {0,0}, k = (1,1) is {0,1}. Within a
/// degree, indices are ordered lexicographically on these tuples, which is
/// descending lexicographic order on exponent vectors. Positions are computed
/// by combinatorial ranking, so the set is never materialized.
class MultiIndexSet {
 public:
  MultiIndexSet(std::size_t dim, int degree, std::uint64_t cap = kDefaultIndexCap);

  std::size_t dim() const { return dim_; }
  int degree() const { return degree_; }
  std::size_t size() const { return size_; }

  /// First position of the degree-m block.
  std::size_t block_offset(int m) const { return offsets_[m]; }

  /// Position of a nondecreasing variable tuple.
  std::size_t position(std::span<const std::uint32_t> vars) const;

  /// Nondecreasing variable tuple at `pos`.
  std::vector<std::uint32_t> vars_at(std::size_t pos) const;

  /// Exponent vector at `pos` (length d).
  std::vector<int> exponents_at(std::size_t pos) const;

  /// Visits every index in order as (position, tuple).
  void for_each(const std::function<void(std::size_t, std::span<const std::uint32_t>)>& fn) const;

  /// Multinomial coefficient (|k|; k) of a variable tuple.
  static double multinomial(std::span<const std::uint32_t> vars);

  bool operator==(const MultiIndexSet& o) const {
    return dim_ == o.dim_ && degree_ == o.degree_;
  }

 private:
  // Number of nondecreasing tuples of length len over `vars` variables.
  std::uint64_t count(std::uint64_t vars, int len) const;

  std::size_t dim_;
  int degree_;
  std::size_t size_;
  std::vector<std::size_t> offsets_;
};

/// binomial(n, k) with overflow saturating to UINT64_MAX.
std::uint64_t binomial_saturating(std::uint64_t n, std::uint64_t k);

}  // namespace passglm
