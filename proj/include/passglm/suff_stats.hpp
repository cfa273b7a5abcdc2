#pragma once

// Polynomial approximate sufficient statistics: single-pass accumulation,
// exact shard merge, and the binary stats file format.

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <memory>
#include <span>
#include <vector>

#include "passglm/glm_mappings.hpp"
#include "passglm/multi_index.hpp"
#include "passglm/records.hpp"

namespace passglm {

struct StatsConfig {
  Model model = Model::kLogit;
  std::size_t dim = 1;
  int degree = 2;
  double radius = 4.0;
  double scale = 1.0;  // mapping scale (Huber b, gamma nu); not serialized

  bool operator==(const StatsConfig&) const = default;
};

/// Accumulated statistics t_k for every multi-index |k| <= M.
///
/// Logistic-shaped mappings store raw monomial sums t_k = sum_n (y_n x_n)^k;
/// the polynomial coefficients are applied when the posterior is built.
/// Other mappings fold a'(k, |k|, M, y) in per record. Every entry is a
/// compensated (Neumaier) sum.
class SuffStats {
 public:
  /// Empty statistics for `spec`. General-form mappings fit their term
  /// approximations on [-radius, radius] here.
  SuffStats(const MappingSpec& spec, std::size_t dim, int degree, double radius,
            std::uint64_t cap = kDefaultIndexCap);

  const StatsConfig& config() const { return config_; }
  const MultiIndexSet& index_set() const { return *index_; }
  bool raw() const { return coef_ == nullptr; }
  /// Term approximations folded into general-form statistics (empty if raw).
  const YCoefficient* y_coefficient() const { return coef_.get(); }

  std::size_t size() const { return sum_.size(); }
  std::uint64_t count() const { return n_; }

  /// Resolved entry t_k at a graded-lex position.
  double value(std::size_t pos) const { return sum_[pos] + comp_[pos]; }
  std::vector<double> values() const;

  /// Absorbs one record. Throws InvalidArgument on a dimension mismatch or a
  /// non-finite covariate.
  void accumulate(const Record& r);

  /// Absorbs every remaining record of the stream (one pass).
  void accumulate(RecordStream& stream);

  /// Adds `other` entry-wise. Throws MismatchError when configurations differ.
  void merge(const SuffStats& other);

  /// Largest ||x_n||_2 seen so far.
  double max_covariate_norm() const { return max_norm_; }

  /// Bytes held by the statistics arrays (independent of the record count).
  std::size_t memory_bytes() const {
    return (sum_.capacity() + comp_.capacity()) * sizeof(double) + sizeof(*this);
  }

  /// Replaces the resolved entries and count (used by deserialization).
  void assign(std::span<const double> values, std::uint64_t n);

 private:
  void add(std::size_t pos, double v) {
    const double t = sum_[pos] + v;
    if (std::abs(sum_[pos]) >= std::abs(v)) {
      comp_[pos] += (sum_[pos] - t) + v;
    } else {
      comp_[pos] += (v - t) + sum_[pos];
    }
    sum_[pos] = t;
  }
  SuffStats(const StatsConfig& config, std::shared_ptr<const YCoefficient> coef,
            std::uint64_t cap);
  friend SuffStats deserialize(std::span<const std::uint8_t> bytes, double scale);

  // Adds weights[m] * mult(k) * prod (x_scale * x)^k for every k supported on
  // the nonzeros of x.
  void accumulate_terms(const SparseVector& x, double x_scale, std::span<const double> weights,
                        bool multinomial);

  StatsConfig config_;
  std::shared_ptr<const MultiIndexSet> index_;
  std::shared_ptr<const YCoefficient> coef_;
  std::vector<double> sum_;
  std::vector<double> comp_;
  std::uint64_t n_ = 0;
  double max_norm_ = 0.0;
  bool warned_ = false;
  std::vector<double> scratch_;
};

SuffStats merge(const SuffStats& a, const SuffStats& b);

inline constexpr std::uint16_t kStatsFormatVersion = 1;

/// "PGLM" | u16 version | u16 model | u64 d | u16 M | f64 R | u64 n |
/// f64[size] entries in graded-lex order | u32 CRC32C of everything before.
/// All fields little-endian.
std::vector<std::uint8_t> serialize(const SuffStats& stats);

/// Throws FormatError on bad magic, version, length, or checksum. `scale`
/// rebuilds the mapping for general-form models.
SuffStats deserialize(std::span<const std::uint8_t> bytes, double scale = 1.0);

void write_stats_file(const SuffStats& stats, const std::filesystem::path& path);
SuffStats read_stats_file(const std::filesystem::path& path, double scale = 1.0);

/// CRC32C (Castagnoli).
std::uint32_t crc32c(std::span<const std::uint8_t> bytes);

}  // namespace passglm
