#include "passglm/suff_stats.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <iterator>
#include <string>

#include <boost/crc.hpp>
#include <spdlog/spdlog.h>

#include "passglm/errors.hpp"

namespace passglm {

namespace {

constexpr std::uint8_t kMagic[4] = {'P', 'G', 'L', 'M'};
constexpr std::size_t kHeaderBytes = 4 + 2 + 2 + 8 + 2 + 8 + 8;

static_assert(std::endian::native == std::endian::little,
              "stats serialization assumes a little-endian host");

template <typename T>
void put(std::vector<std::uint8_t>& out, T v) {
  const auto* p = reinterpret_cast<const std::uint8_t*>(&v);
  out.insert(out.end(), p, p + sizeof(T));
}

template <typename T>
T get(std::span<const std::uint8_t> bytes, std::size_t& off) {
  T v;
  std::memcpy(&v, bytes.data() + off, sizeof(T));
  off += sizeof(T);
  return v;
}

bool is_raw_model(Model m) { return m == Model::kLogit || m == Model::kCustom; }

}  // namespace

std::uint32_t crc32c(std::span<const std::uint8_t> bytes) {
  boost::crc_optimal<32, 0x1EDC6F41, 0xFFFFFFFF, 0xFFFFFFFF, true, true> crc;
  crc.process_bytes(bytes.data(), bytes.size());
  return crc.checksum();
}

SuffStats::SuffStats(const MappingSpec& spec, std::size_t dim, int degree, double radius,
                     std::uint64_t cap)
    : SuffStats(StatsConfig{spec.model(), dim, degree, radius, spec.scale()},
                spec.raw_statistics()
                    ? nullptr
                    : std::make_shared<const YCoefficient>(spec, fit_terms(spec, degree, radius)),
                cap) {}

SuffStats::SuffStats(const StatsConfig& config, std::shared_ptr<const YCoefficient> coef,
                     std::uint64_t cap)
    : config_(config),
      index_(std::make_shared<const MultiIndexSet>(config.dim, config.degree, cap)),
      coef_(std::move(coef)),
      sum_(index_->size(), 0.0),
      comp_(index_->size(), 0.0),
      scratch_(config.degree + 1, 1.0) {
  if (!(config.radius > 0.0)) throw InvalidArgument("radius must be positive");
}

std::vector<double> SuffStats::values() const {
  std::vector<double> out(sum_.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = value(i);
  return out;
}

void SuffStats::accumulate(const Record& r) {
  const SparseVector& x = r.x;
  if (!x.index.empty() && x.index.back() >= config_.dim) {
    throw InvalidArgument("record has feature index " + std::to_string(x.index.back()) +
                          " but dimension is " + std::to_string(config_.dim));
  }
  double sq = 0.0;
  for (double v : x.value) {
    if (!std::isfinite(v)) throw InvalidArgument("non-finite covariate");
    sq += v * v;
  }
  if (!std::isfinite(r.y)) throw InvalidArgument("non-finite outcome");
  const double norm = std::sqrt(sq);
  if (norm > max_norm_) {
    max_norm_ = norm;
    if (norm > 1.0 && !warned_) {
      warned_ = true;
      spdlog::warn("covariate norm {:.4g} exceeds 1; approximation guarantees assume "
                   "normalized covariates (see --rescale)", norm);
    }
  }

  if (raw()) {
    // t_k += (y x)^k
    std::fill(scratch_.begin(), scratch_.end(), 1.0);
    accumulate_terms(x, r.y, scratch_, false);
  } else {
    coef_->weights(r.y, scratch_);
    accumulate_terms(x, 1.0, scratch_, true);
  }
  ++n_;
}

void SuffStats::accumulate_terms(const SparseVector& x, double x_scale,
                                 std::span<const double> weights, bool multinomial) {
  const int M = config_.degree;
  const std::size_t nnz = x.nnz();
  const std::size_t d = config_.dim;
  add(0, weights[0]);
  if (M == 0 || nnz == 0) return;

  if (M <= 2) {
    const std::size_t off1 = index_->block_offset(1);
    for (std::size_t a = 0; a < nnz; ++a) {
      add(off1 + x.index[a], weights[1] * x_scale * x.value[a]);
    }
    if (M == 2) {
      const std::size_t off2 = index_->block_offset(2);
      const double w2 = weights[2] * x_scale * x_scale;
      for (std::size_t a = 0; a < nnz; ++a) {
        const std::size_t i = x.index[a];
        const std::size_t row = off2 + i * d - i * (i - 1) / 2 - i;
        const double wa = w2 * x.value[a];
        add(row + i, wa * x.value[a]);
        const double cross = multinomial ? 2.0 * wa : wa;
        for (std::size_t b = a + 1; b < nnz; ++b) add(row + x.index[b], cross * x.value[b]);
      }
    }
    return;
  }

  // Nondecreasing tuples over the nonzero slots, degree by degree.
  std::vector<std::size_t> slot;
  std::vector<std::uint32_t> vars;
  for (int m = 1; m <= M; ++m) {
    slot.assign(m, 0);
    vars.resize(m);
    while (true) {
      double prod = weights[m];
      for (int p = 0; p < m; ++p) {
        vars[p] = x.index[slot[p]];
        prod *= x_scale * x.value[slot[p]];
      }
      if (multinomial) prod *= MultiIndexSet::multinomial(vars);
      add(index_->position(vars), prod);
      int p = m - 1;
      while (p >= 0 && slot[p] == nnz - 1) --p;
      if (p < 0) break;
      const std::size_t v = slot[p] + 1;
      for (int q = p; q < m; ++q) slot[q] = v;
    }
  }
}

void SuffStats::accumulate(RecordStream& stream) {
  if (stream.dim() != config_.dim) {
    throw InvalidArgument("stream dimension " + std::to_string(stream.dim()) +
                          " does not match statistics dimension " +
                          std::to_string(config_.dim));
  }
  Record rec;
  while (stream.next(rec)) accumulate(rec);
}

void SuffStats::merge(const SuffStats& other) {
  if (!(config_ == other.config_)) {
    throw MismatchError("cannot merge statistics with different model, dimension, degree, "
                        "radius, or scale");
  }
  for (std::size_t i = 0; i < sum_.size(); ++i) {
    add(i, other.sum_[i]);
    comp_[i] += other.comp_[i];
  }
  n_ += other.n_;
  max_norm_ = std::max(max_norm_, other.max_norm_);
}

void SuffStats::assign(std::span<const double> values, std::uint64_t n) {
  if (values.size() != sum_.size()) throw InvalidArgument("entry count mismatch");
  std::copy(values.begin(), values.end(), sum_.begin());
  std::fill(comp_.begin(), comp_.end(), 0.0);
  n_ = n;
}

SuffStats merge(const SuffStats& a, const SuffStats& b) {
  SuffStats out = a;
  out.merge(b);
  return out;
}

std::vector<std::uint8_t> serialize(const SuffStats& stats) {
  const StatsConfig& c = stats.config();
  std::vector<std::uint8_t> out;
  out.reserve(kHeaderBytes + stats.size() * 8 + 4);
  out.insert(out.end(), std::begin(kMagic), std::end(kMagic));
  put<std::uint16_t>(out, kStatsFormatVersion);
  put<std::uint16_t>(out, static_cast<std::uint16_t>(c.model));
  put<std::uint64_t>(out, c.dim);
  put<std::uint16_t>(out, static_cast<std::uint16_t>(c.degree));
  put<double>(out, c.radius);
  put<std::uint64_t>(out, stats.count());
  for (std::size_t i = 0; i < stats.size(); ++i) put<double>(out, stats.value(i));
  put<std::uint32_t>(out, crc32c(out));
  return out;
}

SuffStats deserialize(std::span<const std::uint8_t> bytes, double scale) {
  if (bytes.size() < kHeaderBytes + 4) throw FormatError("stats payload truncated");
  if (std::memcmp(bytes.data(), kMagic, 4) != 0) throw FormatError("bad magic: not a PGLM stats file");
  std::size_t off = bytes.size() - 4;
  const auto stored_crc = get<std::uint32_t>(bytes, off);
  if (crc32c(bytes.first(bytes.size() - 4)) != stored_crc) {
    throw FormatError("checksum failure: stats payload is corrupt or truncated");
  }
  off = 4;
  const auto version = get<std::uint16_t>(bytes, off);
  if (version != kStatsFormatVersion) {
    throw FormatError("unsupported stats format version " + std::to_string(version));
  }
  StatsConfig config;
  config.model = static_cast<Model>(get<std::uint16_t>(bytes, off));
  config.dim = get<std::uint64_t>(bytes, off);
  config.degree = get<std::uint16_t>(bytes, off);
  config.radius = get<double>(bytes, off);
  const auto n = get<std::uint64_t>(bytes, off);

  std::shared_ptr<const YCoefficient> coef;
  if (!is_raw_model(config.model)) {
    const MappingSpec spec = mapping_for(config.model, scale);
    config.scale = spec.scale();
    coef = std::make_shared<const YCoefficient>(spec, fit_terms(spec, config.degree, config.radius));
  }
  SuffStats out(config, coef, std::numeric_limits<std::uint64_t>::max());
  if (bytes.size() != kHeaderBytes + out.size() * 8 + 4) {
    throw FormatError("stats payload length does not match its header");
  }
  std::vector<double> values(out.size());
  std::memcpy(values.data(), bytes.data() + kHeaderBytes, values.size() * 8);
  out.assign(values, n);
  return out;
}

void write_stats_file(const SuffStats& stats, const std::filesystem::path& path) {
  const auto bytes = serialize(stats);
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InvalidArgument("cannot write " + path.string());
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
}

SuffStats read_stats_file(const std::filesystem::path& path, double scale) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InvalidArgument("cannot read " + path.string());
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)),
                                  std::istreambuf_iterator<char>());
  return deserialize(bytes, scale);
}

}  // namespace passglm
