#include "passglm/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include <Eigen/Eigenvalues>
#include <spdlog/spdlog.h>

#include "passglm/errors.hpp"

namespace passglm {

GaussianSummary GaussianSummary::from(const GaussianPosterior& post) {
  return {post.mean(), post.covariance()};
}

GaussianSummary GaussianSummary::from_draws(const Eigen::MatrixXd& draws) {
  if (draws.rows() < 2) throw InvalidArgument("need at least two draws");
  GaussianSummary s;
  s.mean = draws.colwise().mean().transpose();
  const Eigen::MatrixXd centered = draws.rowwise() - s.mean.transpose();
  s.cov = centered.transpose() * centered / static_cast<double>(draws.rows() - 1);
  return s;
}

Eigen::MatrixXd psd_sqrt(const Eigen::MatrixXd& a) {
  const Eigen::MatrixXd sym = 0.5 * (a + a.transpose());
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(sym);
  if (eig.info() != Eigen::Success) throw NumericError("eigendecomposition failed");
  const Eigen::VectorXd root = eig.eigenvalues().cwiseMax(0.0).cwiseSqrt();
  return eig.eigenvectors() * root.asDiagonal() * eig.eigenvectors().transpose();
}

double w2(const GaussianSummary& a, const GaussianSummary& b) {
  if (a.mean.size() != b.mean.size() || a.cov.rows() != b.cov.rows()) {
    throw InvalidArgument("w2: dimension mismatch");
  }
  const Eigen::MatrixXd ra = psd_sqrt(a.cov);
  const Eigen::MatrixXd cross = psd_sqrt(ra * b.cov * ra);
  const double tr = a.cov.trace() + b.cov.trace() - 2.0 * cross.trace();
  const double sq = (a.mean - b.mean).squaredNorm() + std::max(tr, 0.0);
  return std::sqrt(sq);
}

EvalReport compare_posteriors(const GaussianSummary& a, const GaussianSummary& b) {
  if (a.mean.size() != b.mean.size()) throw InvalidArgument("compare_posteriors: dimension mismatch");
  const double d = static_cast<double>(a.mean.size());
  EvalReport r;
  r.mean_err = (a.mean - b.mean).cwiseAbs().sum() / d;
  r.var_err = (a.cov.diagonal() - b.cov.diagonal()).cwiseAbs().sum() / d;
  r.w2 = w2(a, b);
  return r;
}

double test_nll(const MappingSpec& spec, const Eigen::VectorXd& theta, const Dataset& test) {
  if (test.size() == 0) throw InvalidArgument("empty test set");
  double acc = 0.0;
  for (const Record& r : test.records) {
    acc -= spec.record_loglik(r.y, r.x.dot(theta)) + spec.data_constant(r.y);
  }
  return acc / static_cast<double>(test.size());
}

double test_nll_predictive(const MappingSpec& spec, const GaussianPosterior& post,
                           const Dataset& test, std::size_t draws, std::uint64_t seed) {
  if (test.size() == 0) throw InvalidArgument("empty test set");
  if (draws == 0) throw InvalidArgument("need at least one draw");
  const Eigen::MatrixXd thetas = sample(post, draws, seed);
  std::vector<double> ll(draws);
  double acc = 0.0;
  for (const Record& r : test.records) {
    for (std::size_t s = 0; s < draws; ++s) {
      ll[s] = spec.record_loglik(r.y, r.x.dot(thetas.row(s).transpose()));
    }
    const double mx = *std::max_element(ll.begin(), ll.end());
    double se = 0.0;
    for (double v : ll) se += std::exp(v - mx);
    acc -= mx + std::log(se / static_cast<double>(draws)) + spec.data_constant(r.y);
  }
  return acc / static_cast<double>(test.size());
}

double roc_auc(const std::vector<double>& scores, const std::vector<double>& labels) {
  if (scores.size() != labels.size()) throw InvalidArgument("roc_auc: size mismatch");
  std::vector<std::size_t> order(scores.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return scores[a] < scores[b]; });
  double rank_sum = 0.0;
  std::size_t pos = 0;
  for (std::size_t i = 0; i < order.size();) {
    std::size_t j = i;
    while (j + 1 < order.size() && scores[order[j + 1]] == scores[order[i]]) ++j;
    const double avg = 0.5 * static_cast<double>(i + j) + 1.0;
    for (std::size_t k = i; k <= j; ++k) {
      if (labels[order[k]] > 0.0) {
        rank_sum += avg;
        ++pos;
      }
    }
    i = j + 1;
  }
  const std::size_t neg = scores.size() - pos;
  if (pos == 0 || neg == 0) throw InvalidArgument("AUC is undefined for single-class labels");
  const double np = static_cast<double>(pos);
  const double u = rank_sum - np * (np + 1.0) / 2.0;
  return u / (np * static_cast<double>(neg));
}

std::pair<std::vector<double>, std::vector<double>> score_dataset(const Dataset& data,
                                                                  const Eigen::VectorXd& theta) {
  std::vector<double> scores, labels;
  scores.reserve(data.size());
  labels.reserve(data.size());
  for (const Record& r : data.records) {
    scores.push_back(r.x.dot(theta));
    labels.push_back(r.y > 0.0 ? 1.0 : 0.0);
  }
  return {std::move(scores), std::move(labels)};
}

InnerProductHistogram inner_product_histogram(const Dataset& data, const Eigen::VectorXd& theta,
                                              double radius, int bins, double lo, double hi) {
  if (bins < 1 || !(hi > lo)) throw InvalidArgument("histogram needs bins >= 1 and hi > lo");
  InnerProductHistogram h;
  h.radius = radius;
  h.counts.assign(bins, 0);
  h.edges.resize(bins + 1);
  const double width = (hi - lo) / bins;
  for (int i = 0; i <= bins; ++i) h.edges[i] = lo + width * i;
  std::uint64_t inside = 0;
  for (const Record& r : data.records) {
    const double v = r.y * r.x.dot(theta);
    if (std::abs(v) <= radius) ++inside;
    if (v < lo) {
      ++h.below;
    } else if (v > hi) {
      ++h.above;
    } else {
      const int b = std::min(bins - 1, static_cast<int>((v - lo) / width));
      ++h.counts[b];
    }
  }
  h.in_range_fraction = data.size() ? static_cast<double>(inside) / data.size() : 1.0;
  if (h.in_range_fraction < 0.5) {
    spdlog::warn("only {:.1f}% of inner products lie in [-{}, {}]; the polynomial approximation "
                 "is unreliable for this data", 100.0 * h.in_range_fraction, radius, radius);
  }
  return h;
}

}  // namespace passglm
