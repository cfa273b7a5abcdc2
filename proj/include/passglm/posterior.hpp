#pragma once

// Approximate posteriors built from sufficient statistics: the closed-form
// Gaussian for M = 2 logistic-shaped models, surrogate MAP + Laplace for
// general M, and the MAP error certificate.

#include <cstdint>
#include <limits>
#include <vector>

#include <Eigen/Dense>

#include "passglm/glm_mappings.hpp"
#include "passglm/poly_approx.hpp"
#include "passglm/suff_stats.hpp"

namespace passglm {

struct PriorSpec {
  enum class Kind { kGaussian, kFlat };

  Kind kind = Kind::kFlat;
  Eigen::VectorXd mean;      // theta_0
  Eigen::VectorXd variance;  // diagonal of Sigma_0

  static PriorSpec gaussian(std::size_t dim, double variance);
  static PriorSpec gaussian(Eigen::VectorXd mean, Eigen::VectorXd variance);
  static PriorSpec flat(std::size_t dim);

  std::size_t dim() const { return static_cast<std::size_t>(mean.size()); }
  bool is_flat() const { return kind == Kind::kFlat; }

  /// Unnormalized log density, gradient, and Hessian diagonal.
  double log_density(const Eigen::VectorXd& theta) const;
  Eigen::VectorXd grad(const Eigen::VectorXd& theta) const;
  Eigen::VectorXd precision_diag() const;
};

class GaussianPosterior {
 public:
  GaussianPosterior() = default;
  /// Takes the lower Cholesky factor of the covariance directly.
  GaussianPosterior(Eigen::VectorXd mean, Eigen::MatrixXd chol_lower);

  /// Builds from a symmetric positive definite precision matrix without
  /// forming its general inverse. Throws NumericError if the precision is
  /// not positive definite.
  static GaussianPosterior from_precision(Eigen::VectorXd mean, const Eigen::MatrixXd& precision);

  const Eigen::VectorXd& mean() const { return mean_; }
  const Eigen::MatrixXd& chol() const { return chol_; }
  double logdet() const { return logdet_; }
  std::size_t dim() const { return static_cast<std::size_t>(mean_.size()); }

  Eigen::MatrixXd covariance() const;
  Eigen::VectorXd marginal_variances() const;

 private:
  Eigen::VectorXd mean_;
  Eigen::MatrixXd chol_;
  double logdet_ = 0.0;
};

/// `count` draws (rows) of mean + chol z, deterministic under `seed`.
Eigen::MatrixXd sample(const GaussianPosterior& post, std::size_t count, std::uint64_t seed);

/// Closed-form PASS posterior for M = 2 logistic-shaped statistics:
/// precision = Sigma_0^{-1} - 2 b_2 T_2, mean = precision^{-1}(b_1 t_1 + Sigma_0^{-1} theta_0).
/// Throws InvalidArgument when b_2 >= 0 or the statistics are not raw with
/// M >= 2; NumericError when the precision is not positive definite.
GaussianPosterior posterior_lr2(const SuffStats& stats, const PolyApprox& approx,
                                const PriorSpec& prior);

/// Log-likelihood surrogate sum_k coef_k theta^k over an index set.
class SurrogatePolynomial {
 public:
  /// Raw statistics: coef_k = multinomial(k) b_{|k|} t_k (b from `approx`).
  static SurrogatePolynomial from_raw(const SuffStats& stats, const PolyApprox& approx);
  /// General-form statistics: coef_k = t_k.
  static SurrogatePolynomial from_general(const SuffStats& stats);

  std::size_t dim() const { return dim_; }
  int degree() const { return degree_; }
  const std::vector<double>& coefficients() const { return coef_; }

  double value(const Eigen::VectorXd& theta) const;
  /// Value, gradient, and Hessian in one sweep.
  double evaluate(const Eigen::VectorXd& theta, Eigen::VectorXd* grad,
                  Eigen::MatrixXd* hess) const;

 private:
  std::size_t dim_ = 0;
  int degree_ = 0;
  std::vector<double> coef_;
  std::vector<std::vector<std::uint32_t>> vars_;
};

struct NewtonOptions {
  double grad_tol = 1e-8;
  int max_iter = 500;
  double armijo = 1e-4;
};

struct SurrogatePosterior {
  SurrogatePolynomial surrogate;
  Eigen::VectorXd map;
  GaussianPosterior laplace;
  double log_posterior_at_map = 0.0;
  double domain_radius = std::numeric_limits<double>::infinity();
  int iterations = 0;
};

/// Maximizes log prior + surrogate by (projected) Newton with Armijo
/// backtracking, then fits a Laplace approximation at the optimum. The
/// raw-statistics overload applies `approx`; the other uses folded
/// statistics. Rejects pathological approximations (odd or positive leading
/// coefficient, non-concave surrogate) with InvalidArgument and reports
/// non-convergence with ConvergenceError.
SurrogatePosterior posterior_general(const SuffStats& stats, const PolyApprox& approx,
                                     const PriorSpec& prior,
                                     double domain_radius = std::numeric_limits<double>::infinity(),
                                     const NewtonOptions& opts = {});
SurrogatePosterior posterior_general(const SuffStats& stats, const PriorSpec& prior,
                                     double domain_radius = std::numeric_limits<double>::infinity(),
                                     const NewtonOptions& opts = {});

/// Throws InvalidArgument when the leading effective coefficient of a fitted
/// mapping polynomial makes the surrogate log-likelihood unbounded above.
void check_leading_coefficient(const PolyApprox& approx);

struct MapCertificate {
  double eps_n = 0.0;          // N * sup |phi - f_M| on [-R, R]
  double rho_n = 0.0;          // min eigenvalue of -Hessian of exact log posterior at MAP
  double bound = 0.0;          // 4 eps_n / rho_n
  double measured = 0.0;       // ||theta_MAP - surrogate MAP||^2
  double in_range_fraction = 0.0;
  bool premise_in_range = false;          // >= 98% of arguments inside [-R, R]
  bool premise_prior_log_concave = false;
  bool premise_strictly_concave = false;  // rho_n > 0
  bool holds = false;                     // measured <= bound
  Eigen::VectorXd surrogate_map;
};

/// Evaluates the MAP error bound 4 eps_N / rho_N against the measured
/// distance between the exact MAP and the PASS surrogate MAP. Premise
/// failures are flagged in the report, never thrown.
MapCertificate map_error_certificate(const MappingSpec& spec, const Dataset& data,
                                     const Eigen::VectorXd& exact_map, const PolyApprox& approx,
                                     const SuffStats& stats, const PriorSpec& prior);

}  // namespace passglm
