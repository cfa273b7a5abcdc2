#include "passglm/records.hpp"

#include <charconv>
#include <cmath>
#include <string_view>

#include "passglm/errors.hpp"

namespace passglm {

namespace {

bool is_space(char c) { return c == ' ' || c == '\t' || c == '\r'; }

double parse_double(std::string_view tok, std::string_view what) {
  double v = 0.0;
  auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
  if (ec != std::errc() || ptr != tok.data() + tok.size()) {
    throw FormatError("cannot parse " + std::string(what) + " '" + std::string(tok) + "'");
  }
  return v;
}

}  // namespace

SparseVector SparseVector::from_dense(const Eigen::VectorXd& x) {
  SparseVector out;
  for (Eigen::Index j = 0; j < x.size(); ++j) {
    if (x[j] != 0.0) {
      out.index.push_back(static_cast<std::uint32_t>(j));
      out.value.push_back(x[j]);
    }
  }
  return out;
}

double normalize_label(double y, LabelMode labels) {
  switch (labels) {
    case LabelMode::kReal:
      return y;
    case LabelMode::kPlusMinus:
      if (y == 1.0) return 1.0;
      if (y == 0.0 || y == -1.0) return -1.0;
      break;
    case LabelMode::kZeroOne:
      if (y == 1.0) return 1.0;
      if (y == 0.0 || y == -1.0) return 0.0;
      break;
  }
  throw FormatError("label " + std::to_string(y) + " is not binary");
}

bool parse_libsvm_line(std::string_view line, LabelMode labels, Record& out) {
  out.x.index.clear();
  out.x.value.clear();
  std::size_t pos = 0;
  auto skip = [&] {
    while (pos < line.size() && is_space(line[pos])) ++pos;
  };
  auto token = [&] {
    const std::size_t start = pos;
    while (pos < line.size() && !is_space(line[pos])) ++pos;
    return line.substr(start, pos - start);
  };

  skip();
  if (pos == line.size() || line[pos] == '#') return false;
  std::string_view label = token();
  if (!label.empty() && label.front() == '+') label.remove_prefix(1);
  out.y = normalize_label(parse_double(label, "label"), labels);

  std::uint32_t last = 0;
  bool first = true;
  for (skip(); pos < line.size() && line[pos] != '#'; skip()) {
    const std::size_t column = pos + 1;
    std::string_view tok = token();
    const auto colon = tok.find(':');
    if (colon == std::string_view::npos) {
      throw FormatError("missing ':' at column " + std::to_string(column));
    }
    std::uint64_t idx = 0;
    auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + colon, idx);
    if (ec != std::errc() || ptr != tok.data() + colon || idx == 0 || idx > UINT32_MAX) {
      throw FormatError("bad feature index at column " + std::to_string(column));
    }
    const double v = parse_double(tok.substr(colon + 1), "feature value");
    if (!std::isfinite(v)) {
      throw FormatError("non-finite feature value at column " + std::to_string(column));
    }
    const auto zero_based = static_cast<std::uint32_t>(idx - 1);
    if (!first && zero_based <= last) {
      throw FormatError("feature indices not strictly increasing at column " +
                        std::to_string(column));
    }
    first = false;
    last = zero_based;
    if (v != 0.0) {
      out.x.index.push_back(zero_based);
      out.x.value.push_back(v);
    }
  }
  return true;
}

bool MemoryStream::next(Record& out) {
  if (pos_ >= data_->records.size()) {
    return false;
  }
  out = data_->records[pos_++];
  note_read();
  return true;
}

LibsvmStream::LibsvmStream(std::filesystem::path path, ParseOptions opts)
    : path_(std::move(path)), opts_(opts) {
  if (!std::filesystem::exists(path_)) {
    throw InvalidArgument("no such file: " + path_.string());
  }
  if (opts_.dim == 0) {
    // Dimension not declared: infer it with a scan that is not a data pass.
    std::ifstream scan(path_);
    std::string line;
    Record rec;
    std::size_t max_dim = 0;
    while (std::getline(scan, line)) {
      try {
        if (parse_libsvm_line(line, LabelMode::kReal, rec) && !rec.x.index.empty()) {
          max_dim = std::max<std::size_t>(max_dim, rec.x.index.back() + 1);
        }
      } catch (const FormatError&) {
        // reported on the real pass
      }
    }
    opts_.dim = max_dim;
  }
  in_.open(path_);
}

bool LibsvmStream::next(Record& out) {
  while (std::getline(in_, line_)) {
    ++line_no_;
    try {
      if (!parse_libsvm_line(line_, opts_.labels, out)) continue;
      if (!out.x.index.empty() && out.x.index.back() >= opts_.dim) {
        throw FormatError("feature index " + std::to_string(out.x.index.back() + 1) +
                          " exceeds dimension " + std::to_string(opts_.dim));
      }
    } catch (const FormatError& e) {
      if (opts_.strict) {
        throw FormatError(path_.string() + ":" + std::to_string(line_no_) + ": " + e.what());
      }
      ++skipped_;
      continue;
    }
    note_read();
    return true;
  }
  return false;
}

void LibsvmStream::reset() {
  in_.close();
  in_.clear();
  in_.open(path_);
  line_no_ = 0;
  skipped_ = 0;
  note_reset();
}

Dataset read_libsvm(const std::filesystem::path& path, ParseOptions opts) {
  LibsvmStream stream(path, opts);
  return collect(stream);
}

void write_libsvm_record(std::ostream& out, const Record& r) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof buf, r.y);
  out.write(buf, res.ptr - buf);
  for (std::size_t i = 0; i < r.x.nnz(); ++i) {
    out << ' ' << (r.x.index[i] + 1) << ':';
    res = std::to_chars(buf, buf + sizeof buf, r.x.value[i]);
    out.write(buf, res.ptr - buf);
  }
  out << '\n';
}

void write_libsvm(const Dataset& data, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw InvalidArgument("cannot write " + path.string());
  for (const Record& r : data.records) write_libsvm_record(out, r);
}

ScaledStream::ScaledStream(std::unique_ptr<RecordStream> inner, double divisor)
    : inner_(std::move(inner)), inv_(1.0 / divisor) {
  if (!(divisor > 0.0) || !std::isfinite(divisor)) throw InvalidArgument("rescale divisor must be positive");
}

bool ScaledStream::next(Record& out) {
  if (!inner_->next(out)) return false;
  for (double& v : out.x.value) v *= inv_;
  note_read();
  return true;
}

void ScaledStream::reset() {
  inner_->reset();
  note_reset();
}

Dataset collect(RecordStream& stream) {
  Dataset out;
  out.dim = stream.dim();
  Record rec;
  while (stream.next(rec)) out.records.push_back(rec);
  return out;
}

}  // namespace passglm
