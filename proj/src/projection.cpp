#include "passglm/projection.hpp"

#include <algorithm>
#include <limits>
#include <string>

#include "passglm/errors.hpp"

namespace passglm {

ProjectionSpec::ProjectionSpec(std::uint64_t s, std::size_t d, std::size_t k)
    : seed(s), input_dim(d), output_dim(k) {
  if (d == 0 || k == 0) throw InvalidArgument("projection dimensions must be positive");
  if (k > std::numeric_limits<std::uint32_t>::max()) throw InvalidArgument("output dimension too large");
}

SparseVector project(const ProjectionSpec& spec, const SparseVector& x) {
  std::vector<std::pair<std::uint32_t, double>> acc;
  for (std::size_t i = 0; i < x.nnz(); ++i) {
    if (x.index[i] >= spec.input_dim) {
      throw InvalidArgument("feature index " + std::to_string(x.index[i] + 1) +
                            " exceeds projection input dimension " + std::to_string(spec.input_dim));
    }
    const double v = x.value[i];
    for_each_column_entry(spec, x.index[i], [&](std::uint32_t row, double p) { acc.emplace_back(row, p * v); });
  }
  std::sort(acc.begin(), acc.end(), [](const auto& a, const auto& b) { return a.first < b.first; });
  SparseVector out;
  for (std::size_t i = 0; i < acc.size();) {
    double sum = 0.0;
    std::size_t j = i;
    for (; j < acc.size() && acc[j].first == acc[i].first; ++j) sum += acc[j].second;
    if (sum != 0.0) {
      out.index.push_back(acc[i].first);
      out.value.push_back(sum);
    }
    i = j;
  }
  return out;
}

Eigen::MatrixXd projection_matrix(const ProjectionSpec& spec) {
  Eigen::MatrixXd p = Eigen::MatrixXd::Zero(spec.output_dim, spec.input_dim);
  for (std::size_t j = 0; j < spec.input_dim; ++j) {
    for_each_column_entry(spec, static_cast<std::uint32_t>(j),
                          [&](std::uint32_t row, double v) { p(row, j) = v; });
  }
  return p;
}

ProjectedStream::ProjectedStream(std::unique_ptr<RecordStream> inner, ProjectionSpec spec)
    : inner_(std::move(inner)), spec_(spec) {
  if (inner_->dim() > spec_.input_dim) {
    throw InvalidArgument("stream dimension " + std::to_string(inner_->dim()) +
                          " exceeds projection input dimension " + std::to_string(spec_.input_dim));
  }
}

bool ProjectedStream::next(Record& out) {
  if (!inner_->next(buf_)) return false;
  out.y = buf_.y;
  out.x = project(spec_, buf_.x);
  note_read();
  return true;
}

void ProjectedStream::reset() {
  inner_->reset();
  note_reset();
}

}  // namespace passglm
