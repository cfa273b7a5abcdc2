#include "passglm/multi_index.hpp"

#include <limits>
#include <string>

#include "passglm/errors.hpp"

namespace passglm {

std::uint64_t binomial_saturating(std::uint64_t n, std::uint64_t k) {
  if (k > n) return 0;
  k = std::min(k, n - k);
  unsigned __int128 acc = 1;
  for (std::uint64_t i = 1; i <= k; ++i) {
    acc = acc * (n - k + i) / i;
    if (acc > std::numeric_limits<std::uint64_t>::max()) {
      return std::numeric_limits<std::uint64_t>::max();
    }
  }
  return static_cast<std::uint64_t>(acc);
}

MultiIndexSet::MultiIndexSet(std::size_t dim, int degree, std::uint64_t cap)
    : dim_(dim), degree_(degree) {
  if (dim < 1) throw InvalidArgument("dimension must be at least 1");
  if (degree < 0) throw InvalidArgument("degree must be nonnegative");
  const std::uint64_t total = binomial_saturating(dim + degree, dim);
  if (total > cap) {
    throw CapacityError("binomial(d+M, d) = " +
                        (total == std::numeric_limits<std::uint64_t>::max()
                             ? std::string("overflow")
                             : std::to_string(total)) +
                        " statistics exceed the cap of " + std::to_string(cap) +
                        "; reduce d with a random projection (passglm project)");
  }
  size_ = static_cast<std::size_t>(total);
  offsets_.resize(degree + 2);
  offsets_[0] = 0;
  for (int m = 0; m <= degree; ++m) offsets_[m + 1] = offsets_[m] + count(dim, m);
}

std::uint64_t MultiIndexSet::count(std::uint64_t vars, int len) const {
  if (len == 0) return 1;
  if (vars == 0) return 0;
  return binomial_saturating(vars + len - 1, len);
}

std::size_t MultiIndexSet::position(std::span<const std::uint32_t> vars) const {
  const int m = static_cast<int>(vars.size());
  if (m > degree_) throw InvalidArgument("multi-index degree exceeds M");
  std::size_t rank = 0;
  std::uint32_t lo = 0;
  for (int p = 0; p < m; ++p) {
    const int rest = m - p - 1;
    // Tuples whose p-th entry is v in [lo, vars[p]) precede this one:
    // sum_v C(d - v + rest - 1, rest) = C(d - lo + rest, rest + 1) - C(d - hi + rest, rest + 1).
    const std::uint64_t hi = vars[p];
    if (hi >= dim_) throw InvalidArgument("multi-index variable out of range");
    if (hi > lo) {
      rank += binomial_saturating(dim_ - lo + rest, rest + 1) -
              binomial_saturating(dim_ - hi + rest, rest + 1);
    }
    lo = vars[p];
  }
  return offsets_[m] + rank;
}

std::vector<std::uint32_t> MultiIndexSet::vars_at(std::size_t pos) const {
  if (pos >= size_) throw InvalidArgument("multi-index position out of range");
  int m = 0;
  while (pos >= offsets_[m + 1]) ++m;
  std::size_t rank = pos - offsets_[m];
  std::vector<std::uint32_t> out(m);
  std::uint32_t lo = 0;
  for (int p = 0; p < m; ++p) {
    const int rest = m - p - 1;
    std::uint32_t v = lo;
    for (;; ++v) {
      const std::uint64_t c = count(dim_ - v, rest);
      if (rank < c) break;
      rank -= c;
    }
    out[p] = v;
    lo = v;
  }
  return out;
}

std::vector<int> MultiIndexSet::exponents_at(std::size_t pos) const {
  std::vector<int> k(dim_, 0);
  for (std::uint32_t v : vars_at(pos)) ++k[v];
  return k;
}

void MultiIndexSet::for_each(
    const std::function<void(std::size_t, std::span<const std::uint32_t>)>& fn) const {
  std::size_t pos = 0;
  std::vector<std::uint32_t> tuple;
  for (int m = 0; m <= degree_; ++m) {
    tuple.assign(m, 0);
    while (true) {
      fn(pos++, tuple);
      // next nondecreasing tuple in lexicographic order
      int p = m - 1;
      while (p >= 0 && tuple[p] == dim_ - 1) --p;
      if (p < 0) break;
      const std::uint32_t v = tuple[p] + 1;
      for (int q = p; q < m; ++q) tuple[q] = v;
    }
  }
}

double MultiIndexSet::multinomial(std::span<const std::uint32_t> vars) {
  // m! / prod(k_j!) over runs of equal variables
  double acc = 1.0;
  std::size_t run = 0;
  for (std::size_t i = 0; i < vars.size(); ++i) {
    run = (i > 0 && vars[i] == vars[i - 1]) ? run + 1 : 1;
    acc = acc * static_cast<double>(i + 1) / static_cast<double>(run);
  }
  return acc;
}

}  // namespace passglm
