#pragma once

// Observation records, the single-pass RecordStream abstraction, and
// libsvm-format ingestion.

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <ostream>
#include <memory>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

namespace passglm {

/// Sparse covariate vector with strictly increasing indices.
struct SparseVector {
  std::vector<std::uint32_t> index;
  std::vector<double> value;

  std::size_t nnz() const { return index.size(); }
  double dot(const Eigen::VectorXd& theta) const {
    double acc = 0.0;
    for (std::size_t i = 0; i < index.size(); ++i) acc += value[i] * theta[index[i]];
    return acc;
  }
  double squared_norm() const {
    double acc = 0.0;
    for (double v : value) acc += v * v;
    return acc;
  }
  static SparseVector from_dense(const Eigen::VectorXd& x);
};

struct Record {
  double y = 0.0;
  SparseVector x;
};

/// How raw labels are normalized at ingestion.
enum class LabelMode {
  kReal,      // taken as-is
  kPlusMinus, // binary, {0,1} or {-1,+1} -> {-1,+1}
  kZeroOne,   // binary, {0,1} or {-1,+1} -> {0,1}
};

/// In-memory, replayable collection of records.
struct Dataset {
  std::size_t dim = 0;
  std::vector<Record> records;

  std::size_t size() const { return records.size(); }
};

/// Single pass source of records. Replayable sources support reset().
class RecordStream {
 public:
  virtual ~RecordStream() = default;

  /// Fills `out` with the next record; false at end of pass.
  virtual bool next(Record& out) = 0;
  /// Starts a new pass. Throws for sources that can be consumed once.
  virtual void reset() = 0;
  virtual std::size_t dim() const = 0;

  /// Number of passes started (the first pass counts once any record or the
  /// end of the stream is read).
  std::size_t passes() const { return passes_; }
  std::size_t records_read() const { return records_read_; }

 protected:
  void note_read() {
    if (!in_pass_) {
      in_pass_ = true;
      ++passes_;
    }
    ++records_read_;
  }
  void note_reset() { in_pass_ = false; }

 private:
  std::size_t passes_ = 0;
  std::size_t records_read_ = 0;
  bool in_pass_ = false;
};

class MemoryStream final : public RecordStream {
 public:
  explicit MemoryStream(std::shared_ptr<const Dataset> data) : data_(std::move(data)) {}

  bool next(Record& out) override;
  void reset() override {
    pos_ = 0;
    note_reset();
  }
  std::size_t dim() const override { return data_->dim; }

 private:
  std::shared_ptr<const Dataset> data_;
  std::size_t pos_ = 0;
};

/// Divides every covariate by a fixed factor, e.g. to bring ||x|| within 1.
class ScaledStream final : public RecordStream {
 public:
  ScaledStream(std::unique_ptr<RecordStream> inner, double divisor);

  bool next(Record& out) override;
  void reset() override;
  std::size_t dim() const override { return inner_->dim(); }

 private:
  std::unique_ptr<RecordStream> inner_;
  double inv_;
};

struct ParseOptions {
  LabelMode labels = LabelMode::kReal;
  bool strict = true;
  /// Declared dimension; 0 infers max index + 1 (requires a full read).
  std::size_t dim = 0;
};

/// Streams a libsvm file ("label idx:val ..." with 1-based indices).
class LibsvmStream final : public RecordStream {
 public:
  LibsvmStream(std::filesystem::path path, ParseOptions opts);

  bool next(Record& out) override;
  void reset() override;
  std::size_t dim() const override { return opts_.dim; }

  /// Lines skipped in lenient mode during the current pass.
  std::size_t skipped_lines() const { return skipped_; }

 private:
  std::filesystem::path path_;
  ParseOptions opts_;
  std::ifstream in_;
  std::string line_;
  std::size_t line_no_ = 0;
  std::size_t skipped_ = 0;
};

/// Parses one libsvm line. Returns false for blank or comment lines. Throws
/// FormatError with the offending column on malformed input.
bool parse_libsvm_line(std::string_view line, LabelMode labels, Record& out);

/// Applies a label normalization rule; throws FormatError for labels that do
/// not fit a binary mode.
double normalize_label(double y, LabelMode labels);

/// Reads an entire libsvm file into memory.
Dataset read_libsvm(const std::filesystem::path& path, ParseOptions opts);

void write_libsvm(const Dataset& data, const std::filesystem::path& path);
/// One line in the shortest round-trip decimal form.
void write_libsvm_record(std::ostream& out, const Record& r);

/// Drains a stream into memory (one pass).
Dataset collect(RecordStream& stream);

}  // namespace passglm
