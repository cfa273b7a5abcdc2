#pragma once

// GLM mapping functions in the general form
//
//   log p(y | x, theta) = sum_k y^{alpha_k} phi_k(y^{beta_k} x.theta - a_k y)
//                         + const(y)
//
// plus the exact log-likelihood and its derivatives used by the baselines.

#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "passglm/poly_approx.hpp"
#include "passglm/records.hpp"

namespace passglm {

enum class Model : std::uint16_t {
  kLogit = 1,
  kPoisson = 2,
  kSmoothedHuber = 3,
  kCauchy = 4,
  kGamma = 5,
  kProbit = 6,
  kCustom = 255,
};

/// CLI spelling ("logit", "poisson-exp", "shuber", "cauchy", "gamma", "probit").
std::string_view model_name(Model m);
Model parse_model(std::string_view name);

/// A scalar function with its first two derivatives.
struct ScalarMap {
  ScalarFn f;
  ScalarFn df;
  ScalarFn d2f;
};

struct MappingTerm {
  ScalarMap phi;
  int alpha = 0;  // exponent of y outside phi
  int beta = 0;   // exponent of y multiplying x.theta
  int a = 0;      // y-offset coefficient inside phi
};

class MappingSpec {
 public:
  /// Validates exponents in {0,1} and probes every phi for finite values and
  /// derivatives on [-5, 5].
  MappingSpec(Model model, std::string name, std::vector<MappingTerm> terms,
              double scale, LabelMode labels, bool log_concave,
              ScalarFn data_constant = {});

  Model model() const { return model_; }
  const std::string& name() const { return name_; }
  std::span<const MappingTerm> terms() const { return terms_; }
  double scale() const { return scale_; }
  LabelMode labels() const { return labels_; }
  bool log_concave() const { return log_concave_; }

  /// True for a single term with alpha = 0, beta = 1, a = 0 (logistic
  /// shape): statistics are the raw monomials of y x.
  bool raw_statistics() const;

  /// Per-record log-likelihood as a function of s = x.theta, and its first
  /// two derivatives with respect to s.
  double record_loglik(double y, double s) const;
  double record_dloglik(double y, double s) const;
  double record_d2loglik(double y, double s) const;

  /// theta-free part of the record log-likelihood (e.g. -log y! for Poisson).
  double data_constant(double y) const { return data_constant_ ? data_constant_(y) : 0.0; }

 private:
  Model model_;
  std::string name_;
  std::vector<MappingTerm> terms_;
  double scale_;
  LabelMode labels_;
  bool log_concave_;
  ScalarFn data_constant_;
};

MappingSpec mapping_logit();
MappingSpec mapping_poisson();
MappingSpec mapping_shuber(double b);
MappingSpec mapping_cauchy(double b);
MappingSpec mapping_gamma(double nu);
MappingSpec mapping_probit();

/// Builds a mapping by model id; `scale` is used by shuber, cauchy, gamma.
MappingSpec mapping_for(Model model, double scale = 1.0);

/// Single-term logistic-shaped mapping phi(y x.theta) from a user function.
MappingSpec mapping_custom(std::string name, ScalarMap phi, bool log_concave);

// Logistic helpers shared with baselines and metrics.
double phi_logit(double s);
double sigmoid(double s);

/// Exact data log-likelihood sum_n log p(y_n | x_n, theta), including the
/// theta-free data constants. Throws NumericError naming the record index on
/// a non-finite contribution.
double log_likelihood(const MappingSpec& spec, const Eigen::VectorXd& theta,
                      const Dataset& data);

Eigen::VectorXd log_likelihood_grad(const MappingSpec& spec, const Eigen::VectorXd& theta,
                                    const Dataset& data);

Eigen::MatrixXd log_likelihood_hessian(const MappingSpec& spec,
                                       const Eigen::VectorXd& theta, const Dataset& data);

/// Per-degree y coefficients of the general form,
///
///   w_i(y) = sum_terms y^{alpha + i beta} sum_{m=i}^{M} b_m C(m,i) (-a y)^{m-i},
///
/// so that a'(k, |k|, M, y) = multinomial(|k|; k) * w_{|k|}(y).
class YCoefficient {
 public:
  /// `approx[t]` is the fitted polynomial for term t of `spec`.
  YCoefficient(const MappingSpec& spec, std::vector<PolyApprox> approx);

  int degree() const { return degree_; }
  const std::vector<PolyApprox>& approximations() const { return approx_; }

  /// Fills w[0..M] for label y.
  void weights(double y, std::span<double> w) const;

  /// Full a'(k, kbar, M, y) given the multinomial coefficient of k.
  double operator()(double multinomial, int kbar, double y) const;

 private:
  std::vector<int> alpha_, beta_, a_;
  std::vector<PolyApprox> approx_;
  int degree_ = 0;
  std::vector<std::vector<double>> binom_;
};

/// Fits one Chebyshev approximation per term of `spec`.
std::vector<PolyApprox> fit_terms(const MappingSpec& spec, int degree, double radius);

}  // namespace passglm
