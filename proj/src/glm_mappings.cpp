#include "passglm/glm_mappings.hpp"

#include <cmath>
#include <numbers>

#include "passglm/errors.hpp"

namespace passglm {

namespace {

double ypow(double y, int e) { return e == 0 ? 1.0 : y; }

// log Phi(s) for the standard normal CDF, stable in the lower tail.
double log_ndtr(double s) {
  if (s > -30.0) return std::log(0.5 * std::erfc(-s / std::numbers::sqrt2));
  return -0.5 * s * s - std::log(-s) - 0.5 * std::log(2.0 * std::numbers::pi) +
         std::log1p(-1.0 / (s * s));
}

// Inverse Mills ratio pdf(s) / Phi(s).
double mills(double s) {
  const double log_pdf = -0.5 * s * s - 0.5 * std::log(2.0 * std::numbers::pi);
  return std::exp(log_pdf - log_ndtr(s));
}

void require_positive(double v, const char* what) {
  if (!(v > 0.0) || !std::isfinite(v)) {
    throw InvalidArgument(std::string(what) + " must be positive");
  }
}

}  // namespace

std::string_view model_name(Model m) {
  switch (m) {
    case Model::kLogit: return "logit";
    case Model::kPoisson: return "poisson-exp";
    case Model::kSmoothedHuber: return "shuber";
    case Model::kCauchy: return "cauchy";
    case Model::kGamma: return "gamma";
    case Model::kProbit: return "probit";
    case Model::kCustom: return "custom";
  }
  return "unknown";
}

Model parse_model(std::string_view name) {
  if (name == "logit" || name == "logistic") return Model::kLogit;
  if (name == "poisson-exp" || name == "poisson") return Model::kPoisson;
  if (name == "shuber") return Model::kSmoothedHuber;
  if (name == "cauchy") return Model::kCauchy;
  if (name == "gamma") return Model::kGamma;
  if (name == "probit") return Model::kProbit;
  throw InvalidArgument("unknown model '" + std::string(name) + "'");
}

double phi_logit(double s) {
  return s >= 0.0 ? -std::log1p(std::exp(-s)) : s - std::log1p(std::exp(s));
}

double sigmoid(double s) {
  if (s >= 0.0) return 1.0 / (1.0 + std::exp(-s));
  const double e = std::exp(s);
  return e / (1.0 + e);
}

MappingSpec::MappingSpec(Model model, std::string name, std::vector<MappingTerm> terms,
                         double scale, LabelMode labels, bool log_concave,
                         ScalarFn data_constant)
    : model_(model),
      name_(std::move(name)),
      terms_(std::move(terms)),
      scale_(scale),
      labels_(labels),
      log_concave_(log_concave),
      data_constant_(std::move(data_constant)) {
  if (terms_.empty()) throw InvalidArgument("mapping needs at least one term");
  for (const MappingTerm& t : terms_) {
    for (int e : {t.alpha, t.beta, t.a}) {
      if (e != 0 && e != 1) throw InvalidArgument("mapping exponents must be 0 or 1");
    }
    if (!t.phi.f || !t.phi.df || !t.phi.d2f) {
      throw InvalidArgument("mapping term is missing a derivative");
    }
    for (int i = 0; i <= 100; ++i) {
      const double s = -5.0 + 0.1 * i;
      if (!std::isfinite(t.phi.f(s)) || !std::isfinite(t.phi.df(s)) ||
          !std::isfinite(t.phi.d2f(s))) {
        throw InvalidArgument("mapping '" + name_ + "' is not finite at s = " +
                              std::to_string(s));
      }
    }
  }
}

bool MappingSpec::raw_statistics() const {
  return terms_.size() == 1 && terms_[0].alpha == 0 && terms_[0].beta == 1 &&
         terms_[0].a == 0;
}

double MappingSpec::record_loglik(double y, double s) const {
  double acc = 0.0;
  for (const MappingTerm& t : terms_) {
    acc += ypow(y, t.alpha) * t.phi.f(ypow(y, t.beta) * s - t.a * y);
  }
  return acc;
}

double MappingSpec::record_dloglik(double y, double s) const {
  double acc = 0.0;
  for (const MappingTerm& t : terms_) {
    const double yb = ypow(y, t.beta);
    acc += ypow(y, t.alpha) * yb * t.phi.df(yb * s - t.a * y);
  }
  return acc;
}

double MappingSpec::record_d2loglik(double y, double s) const {
  double acc = 0.0;
  for (const MappingTerm& t : terms_) {
    const double yb = ypow(y, t.beta);
    acc += ypow(y, t.alpha) * yb * yb * t.phi.d2f(yb * s - t.a * y);
  }
  return acc;
}

MappingSpec mapping_logit() {
  ScalarMap phi{
      phi_logit,
      [](double s) { return sigmoid(-s); },
      [](double s) { return -sigmoid(s) * sigmoid(-s); },
  };
  return MappingSpec(Model::kLogit, "logit", {MappingTerm{phi, 0, 1, 0}}, 1.0,
                     LabelMode::kPlusMinus, true);
}

MappingSpec mapping_poisson() {
  ScalarMap linear{[](double s) { return s; }, [](double) { return 1.0; },
                   [](double) { return 0.0; }};
  ScalarMap neg_exp{[](double s) { return -std::exp(s); }, [](double s) { return -std::exp(s); },
                    [](double s) { return -std::exp(s); }};
  return MappingSpec(Model::kPoisson, "poisson-exp",
                     {MappingTerm{linear, 1, 0, 0}, MappingTerm{neg_exp, 0, 0, 0}}, 1.0,
                     LabelMode::kReal, true, [](double y) { return -std::lgamma(y + 1.0); });
}

MappingSpec mapping_shuber(double b) {
  require_positive(b, "smoothed Huber scale");
  const double b2 = b * b;
  ScalarMap phi{
      [b2](double u) { return -b2 * (std::sqrt(1.0 + u * u / b2) - 1.0); },
      [b2](double u) { return -u / std::sqrt(1.0 + u * u / b2); },
      [b2](double u) { return -std::pow(1.0 + u * u / b2, -1.5); },
  };
  return MappingSpec(Model::kSmoothedHuber, "shuber", {MappingTerm{phi, 0, 0, 1}}, b,
                     LabelMode::kReal, true);
}

MappingSpec mapping_cauchy(double b) {
  require_positive(b, "Cauchy scale");
  const double b2 = b * b;
  ScalarMap phi{
      [b2](double u) { return -std::log1p(u * u / b2); },
      [b2](double u) { return -2.0 * u / (b2 + u * u); },
      [b2](double u) {
        const double q = b2 + u * u;
        return -2.0 * (b2 - u * u) / (q * q);
      },
  };
  // Not log-concave: posterior-quality guarantees do not apply.
  return MappingSpec(Model::kCauchy, "cauchy", {MappingTerm{phi, 0, 0, 1}}, b,
                     LabelMode::kReal, false);
}

MappingSpec mapping_gamma(double nu) {
  require_positive(nu, "gamma shape");
  ScalarMap linear{[nu](double s) { return -nu * s; }, [nu](double) { return -nu; },
                   [](double) { return 0.0; }};
  ScalarMap decay{[nu](double s) { return -nu * std::exp(-s); },
                  [nu](double s) { return nu * std::exp(-s); },
                  [nu](double s) { return -nu * std::exp(-s); }};
  auto constant = [nu](double y) {
    return nu * std::log(nu) - std::lgamma(nu) + (nu - 1.0) * std::log(y);
  };
  return MappingSpec(Model::kGamma, "gamma",
                     {MappingTerm{linear, 0, 0, 0}, MappingTerm{decay, 1, 0, 0}}, nu,
                     LabelMode::kReal, true, constant);
}

MappingSpec mapping_probit() {
  // ln(1 - Phi(s)) = ln Phi(-s)
  ScalarMap lower{
      [](double s) { return log_ndtr(-s); },
      [](double s) { return -mills(-s); },
      [](double s) {
        const double m = mills(-s);
        return -m * (m - s);
      },
  };
  ScalarMap odds{
      [](double s) { return log_ndtr(s) - log_ndtr(-s); },
      [](double s) { return mills(s) + mills(-s); },
      [](double s) {
        const double mp = mills(s);
        const double mn = mills(-s);
        return -mp * (s + mp) + mn * (mn - s);
      },
  };
  return MappingSpec(Model::kProbit, "probit",
                     {MappingTerm{lower, 0, 0, 0}, MappingTerm{odds, 1, 0, 0}}, 1.0,
                     LabelMode::kZeroOne, true);
}

MappingSpec mapping_for(Model model, double scale) {
  switch (model) {
    case Model::kLogit: return mapping_logit();
    case Model::kPoisson: return mapping_poisson();
    case Model::kSmoothedHuber: return mapping_shuber(scale);
    case Model::kCauchy: return mapping_cauchy(scale);
    case Model::kGamma: return mapping_gamma(scale);
    case Model::kProbit: return mapping_probit();
    case Model::kCustom: break;
  }
  throw InvalidArgument("custom mappings cannot be built by id");
}

MappingSpec mapping_custom(std::string name, ScalarMap phi, bool log_concave) {
  return MappingSpec(Model::kCustom, std::move(name), {MappingTerm{std::move(phi), 0, 1, 0}},
                     1.0, LabelMode::kReal, log_concave);
}

double log_likelihood(const MappingSpec& spec, const Eigen::VectorXd& theta,
                      const Dataset& data) {
  if (static_cast<std::size_t>(theta.size()) != data.dim) {
    throw InvalidArgument("theta dimension does not match data dimension");
  }
  double acc = 0.0;
  for (std::size_t n = 0; n < data.records.size(); ++n) {
    const Record& r = data.records[n];
    const double v = spec.record_loglik(r.y, r.x.dot(theta)) + spec.data_constant(r.y);
    if (!std::isfinite(v)) {
      throw NumericError("non-finite log-likelihood at record " + std::to_string(n));
    }
    acc += v;
  }
  return acc;
}

Eigen::VectorXd log_likelihood_grad(const MappingSpec& spec, const Eigen::VectorXd& theta,
                                    const Dataset& data) {
  if (static_cast<std::size_t>(theta.size()) != data.dim) {
    throw InvalidArgument("theta dimension does not match data dimension");
  }
  Eigen::VectorXd g = Eigen::VectorXd::Zero(theta.size());
  for (std::size_t n = 0; n < data.records.size(); ++n) {
    const Record& r = data.records[n];
    const double w = spec.record_dloglik(r.y, r.x.dot(theta));
    if (!std::isfinite(w)) {
      throw NumericError("non-finite gradient at record " + std::to_string(n));
    }
    for (std::size_t i = 0; i < r.x.nnz(); ++i) g[r.x.index[i]] += w * r.x.value[i];
  }
  return g;
}

Eigen::MatrixXd log_likelihood_hessian(const MappingSpec& spec,
                                       const Eigen::VectorXd& theta, const Dataset& data) {
  if (static_cast<std::size_t>(theta.size()) != data.dim) {
    throw InvalidArgument("theta dimension does not match data dimension");
  }
  Eigen::MatrixXd h = Eigen::MatrixXd::Zero(theta.size(), theta.size());
  for (std::size_t n = 0; n < data.records.size(); ++n) {
    const Record& r = data.records[n];
    const double w = spec.record_d2loglik(r.y, r.x.dot(theta));
    if (!std::isfinite(w)) {
      throw NumericError("non-finite Hessian at record " + std::to_string(n));
    }
    for (std::size_t i = 0; i < r.x.nnz(); ++i) {
      for (std::size_t j = 0; j <= i; ++j) {
        h(r.x.index[i], r.x.index[j]) += w * r.x.value[i] * r.x.value[j];
      }
    }
  }
  return h.selfadjointView<Eigen::Lower>();
}

YCoefficient::YCoefficient(const MappingSpec& spec, std::vector<PolyApprox> approx)
    : approx_(std::move(approx)) {
  const auto terms = spec.terms();
  if (approx_.size() != terms.size()) {
    throw InvalidArgument("need one polynomial approximation per mapping term");
  }
  degree_ = approx_.front().degree;
  for (std::size_t t = 0; t < terms.size(); ++t) {
    if (approx_[t].degree != degree_) {
      throw InvalidArgument("all term approximations must share one degree");
    }
    alpha_.push_back(terms[t].alpha);
    beta_.push_back(terms[t].beta);
    a_.push_back(terms[t].a);
  }
  binom_.assign(degree_ + 1, std::vector<double>(degree_ + 1, 0.0));
  for (int m = 0; m <= degree_; ++m) {
    binom_[m][0] = 1.0;
    for (int i = 1; i <= m; ++i) binom_[m][i] = binom_[m - 1][i - 1] + (i <= m - 1 ? binom_[m - 1][i] : 0.0);
  }
}

void YCoefficient::weights(double y, std::span<double> w) const {
  for (int i = 0; i <= degree_; ++i) {
    double acc = 0.0;
    for (std::size_t t = 0; t < approx_.size(); ++t) {
      const std::vector<double>& b = approx_[t].b;
      double inner = 0.0;
      if (a_[t] == 0) {
        inner = b[i];
      } else {
        const double shift = -static_cast<double>(a_[t]) * y;
        double p = 1.0;
        for (int m = i; m <= degree_; ++m) {
          inner += b[m] * binom_[m][i] * p;
          p *= shift;
        }
      }
      const double ypre = ypow(y, alpha_[t]) * (beta_[t] == 0 ? 1.0 : std::pow(y, i));
      acc += ypre * inner;
    }
    w[i] = acc;
  }
}

double YCoefficient::operator()(double multinomial, int kbar, double y) const {
  std::vector<double> w(degree_ + 1);
  weights(y, w);
  return multinomial * w[kbar];
}

std::vector<PolyApprox> fit_terms(const MappingSpec& spec, int degree, double radius) {
  std::vector<PolyApprox> out;
  for (const MappingTerm& t : spec.terms()) out.push_back(fit_chebyshev(t.phi.f, degree, radius));
  return out;
}

}  // namespace passglm
