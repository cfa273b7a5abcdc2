#pragma once

// Posterior comparison and predictive quality metrics.

#include <cstdint>
#include <optional>
#include <vector>

#include <Eigen/Dense>

#include "passglm/glm_mappings.hpp"
#include "passglm/posterior.hpp"
#include "passglm/records.hpp"

namespace passglm {

/// Mean and full covariance of a (possibly approximate) posterior.
struct GaussianSummary {
  Eigen::VectorXd mean;
  Eigen::MatrixXd cov;

  static GaussianSummary from(const GaussianPosterior& post);
  /// Sample mean and covariance of draws stored as rows.
  static GaussianSummary from_draws(const Eigen::MatrixXd& draws);
};

struct EvalReport {
  std::optional<double> mean_err;
  std::optional<double> var_err;
  std::optional<double> w2;
  std::optional<double> test_nll;
  std::optional<double> auc;
  std::vector<std::pair<std::string, double>> timings;  // seconds
};

/// mean_err, var_err (marginal variances) and w2 between two summaries.
EvalReport compare_posteriors(const GaussianSummary& a, const GaussianSummary& b);

/// 2-Wasserstein distance between Gaussians.
double w2(const GaussianSummary& a, const GaussianSummary& b);

/// Symmetric PSD square root through an eigendecomposition; negative
/// eigenvalues from round-off are clamped to zero.
Eigen::MatrixXd psd_sqrt(const Eigen::MatrixXd& a);

/// Mean of -phi at the plug-in estimate over test records.
double test_nll(const MappingSpec& spec, const Eigen::VectorXd& theta, const Dataset& test);

/// Monte Carlo predictive NLL: -mean_n log mean_s exp(loglik(theta_s)).
double test_nll_predictive(const MappingSpec& spec, const GaussianPosterior& post,
                           const Dataset& test, std::size_t draws, std::uint64_t seed);

/// Mann-Whitney AUC; ties count one half. Labels > 0 are positive.
/// Throws InvalidArgument for single-class input.
double roc_auc(const std::vector<double>& scores, const std::vector<double>& labels);

/// Scores x.theta and binary labels of a dataset, ready for roc_auc.
std::pair<std::vector<double>, std::vector<double>> score_dataset(const Dataset& data,
                                                                  const Eigen::VectorXd& theta);

struct InnerProductHistogram {
  std::vector<double> edges;           // bins + 1 edges
  std::vector<std::uint64_t> counts;   // per bin
  std::uint64_t below = 0;             // left of edges.front()
  std::uint64_t above = 0;             // right of edges.back()
  double in_range_fraction = 1.0;      // share with |y x.theta| <= radius
  double radius = 0.0;
};

/// Histogram of y_n x_n.theta over `bins` equal bins on [lo, hi] and the
/// fraction inside [-radius, radius]. Logs a warning below one half.
InnerProductHistogram inner_product_histogram(const Dataset& data, const Eigen::VectorXd& theta,
                                              double radius, int bins = 40, double lo = -8.0,
                                              double hi = 8.0);

}  // namespace passglm
