#include "passglm/posterior.hpp"

#include <cmath>
#include <random>
#include <string>

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>

#include "passglm/errors.hpp"

namespace passglm {

namespace {

// Effective degree of a fitted polynomial: the largest m whose scale-free
// magnitude |b_m| R^m is not negligible.
int effective_degree(const PolyApprox& p) {
  double biggest = 0.0;
  double rm = 1.0;
  std::vector<double> scaled(p.b.size());
  for (std::size_t m = 0; m < p.b.size(); ++m) {
    scaled[m] = std::abs(p.b[m]) * rm;
    biggest = std::max(biggest, scaled[m]);
    rm *= p.radius;
  }
  for (std::size_t m = p.b.size(); m-- > 0;) {
    if (scaled[m] > 1e-10 * biggest) return static_cast<int>(m);
  }
  return 0;
}

void require_dim(const PriorSpec& prior, std::size_t dim) {
  if (prior.dim() != dim) {
    throw InvalidArgument("prior dimension " + std::to_string(prior.dim()) +
                          " does not match statistics dimension " + std::to_string(dim));
  }
}

const char* kPathological =
    "surrogate log-posterior is not concave: the polynomial approximation makes the "
    "log-likelihood unbounded above (pathological M; for logistic use M = 2 + 4k)";

Eigen::VectorXd project_ball(const Eigen::VectorXd& theta, double radius) {
  const double n = theta.norm();
  if (std::isfinite(radius) && n > radius) return theta * (radius / n);
  return theta;
}

SurrogatePosterior optimize(SurrogatePolynomial poly, const PriorSpec& prior,
                            double domain_radius, const NewtonOptions& opts) {
  const std::size_t d = poly.dim();
  require_dim(prior, d);
  const Eigen::VectorXd prior_prec = prior.precision_diag();

  auto objective = [&](const Eigen::VectorXd& th, Eigen::VectorXd* g, Eigen::MatrixXd* h) {
    double v = poly.evaluate(th, g, h) + prior.log_density(th);
    if (g) *g += prior.grad(th);
    if (h) h->diagonal() -= prior_prec;
    return v;
  };

  Eigen::VectorXd theta = project_ball(prior.is_flat() ? Eigen::VectorXd::Zero(d) : prior.mean,
                                       domain_radius);
  Eigen::VectorXd g(d);
  Eigen::MatrixXd h(d, d);
  double f = objective(theta, &g, &h);

  SurrogatePosterior out;
  out.domain_radius = domain_radius;
  int it = 0;
  for (;; ++it) {
    if (!std::isfinite(f)) throw NumericError("surrogate log-posterior is not finite");
    Eigen::LLT<Eigen::MatrixXd> llt(-h);
    if (llt.info() != Eigen::Success) throw InvalidArgument(kPathological);
    if (g.norm() <= opts.grad_tol * std::max(1.0, std::abs(f))) break;
    if (it >= opts.max_iter) {
      throw ConvergenceError("surrogate Newton did not converge in " +
                             std::to_string(opts.max_iter) + " iterations (|grad| = " +
                             std::to_string(g.norm()) + ")");
    }
    const Eigen::VectorXd step = llt.solve(g);
    if (g.dot(step) <= 1e-12 * std::max(1.0, std::abs(f))) {
      // Predicted gain is below the rounding level of f: take the full step.
      const Eigen::VectorXd next = project_ball(theta + step, domain_radius);
      if ((next - theta).norm() <= 1e-15 * (1.0 + theta.norm())) break;
      theta = next;
      f = objective(theta, &g, &h);
      continue;
    }
    double t = 1.0;
    Eigen::VectorXd next;
    double fn = 0.0;
    bool moved = false;
    while (t > 1e-14) {
      next = project_ball(theta + t * step, domain_radius);
      fn = objective(next, nullptr, nullptr);
      if (std::isfinite(fn) && fn >= f + opts.armijo * g.dot(next - theta)) {
        moved = true;
        break;
      }
      t *= 0.5;
    }
    if (!moved || (next - theta).norm() <= 1e-15 * (1.0 + theta.norm())) {
      // Stationary up to rounding, or pinned to the domain boundary.
      break;
    }
    theta = next;
    f = objective(theta, &g, &h);
  }

  Eigen::LLT<Eigen::MatrixXd> final_llt(-h);
  if (final_llt.info() != Eigen::Success) throw InvalidArgument(kPathological);
  out.laplace = GaussianPosterior::from_precision(theta, -h);
  out.map = theta;
  out.log_posterior_at_map = f;
  out.iterations = it;
  out.surrogate = std::move(poly);
  return out;
}

}  // namespace

PriorSpec PriorSpec::gaussian(std::size_t dim, double variance) {
  return gaussian(Eigen::VectorXd::Zero(dim), Eigen::VectorXd::Constant(dim, variance));
}

PriorSpec PriorSpec::gaussian(Eigen::VectorXd mean, Eigen::VectorXd variance) {
  if (mean.size() != variance.size()) throw InvalidArgument("prior mean/variance size mismatch");
  for (double v : variance) {
    if (!(v > 0.0) || !std::isfinite(v)) throw InvalidArgument("prior variance must be positive");
  }
  PriorSpec p;
  p.kind = Kind::kGaussian;
  p.mean = std::move(mean);
  p.variance = std::move(variance);
  return p;
}

PriorSpec PriorSpec::flat(std::size_t dim) {
  PriorSpec p;
  p.kind = Kind::kFlat;
  p.mean = Eigen::VectorXd::Zero(dim);
  p.variance = Eigen::VectorXd::Constant(dim, std::numeric_limits<double>::infinity());
  return p;
}

double PriorSpec::log_density(const Eigen::VectorXd& theta) const {
  if (is_flat()) return 0.0;
  return -0.5 * ((theta - mean).array().square() / variance.array()).sum();
}

Eigen::VectorXd PriorSpec::grad(const Eigen::VectorXd& theta) const {
  if (is_flat()) return Eigen::VectorXd::Zero(theta.size());
  return -((theta - mean).array() / variance.array()).matrix();
}

Eigen::VectorXd PriorSpec::precision_diag() const {
  if (is_flat()) return Eigen::VectorXd::Zero(mean.size());
  return variance.cwiseInverse();
}

GaussianPosterior::GaussianPosterior(Eigen::VectorXd mean, Eigen::MatrixXd chol_lower)
    : mean_(std::move(mean)), chol_(std::move(chol_lower)) {
  if (chol_.rows() != mean_.size() || chol_.cols() != mean_.size()) {
    throw InvalidArgument("Cholesky factor shape does not match mean");
  }
  logdet_ = 2.0 * chol_.diagonal().array().log().sum();
}

GaussianPosterior GaussianPosterior::from_precision(Eigen::VectorXd mean,
                                                    const Eigen::MatrixXd& precision) {
  const Eigen::Index d = precision.rows();
  // Reversed Cholesky: precision = U U^T with U upper triangular, so the
  // covariance is U^{-T} U^{-1} and U^{-T} is its lower factor.
  const Eigen::MatrixXd reversed = precision.reverse();
  Eigen::LLT<Eigen::MatrixXd> llt(reversed);
  if (llt.info() != Eigen::Success) {
    throw NumericError("posterior precision is not positive definite");
  }
  const Eigen::MatrixXd upper = Eigen::MatrixXd(llt.matrixL()).reverse();
  Eigen::MatrixXd lower = upper.transpose().triangularView<Eigen::Lower>().solve(
      Eigen::MatrixXd::Identity(d, d));
  lower.triangularView<Eigen::StrictlyUpper>().setZero();
  return GaussianPosterior(std::move(mean), std::move(lower));
}

Eigen::MatrixXd GaussianPosterior::covariance() const { return chol_ * chol_.transpose(); }

Eigen::VectorXd GaussianPosterior::marginal_variances() const {
  return chol_.array().square().rowwise().sum();
}

Eigen::MatrixXd sample(const GaussianPosterior& post, std::size_t count, std::uint64_t seed) {
  if (count < 1) throw InvalidArgument("sample count must be at least 1");
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal;
  const auto d = static_cast<Eigen::Index>(post.dim());
  Eigen::MatrixXd z(d, static_cast<Eigen::Index>(count));
  for (Eigen::Index c = 0; c < z.cols(); ++c) {
    for (Eigen::Index j = 0; j < d; ++j) z(j, c) = normal(rng);
  }
  Eigen::MatrixXd draws = post.chol().triangularView<Eigen::Lower>() * z;
  draws.colwise() += post.mean();
  return draws.transpose();
}

GaussianPosterior posterior_lr2(const SuffStats& stats, const PolyApprox& approx,
                                const PriorSpec& prior) {
  if (!stats.raw()) throw InvalidArgument("closed-form posterior needs logistic-shaped statistics");
  if (stats.config().degree < 2) throw InvalidArgument("closed-form posterior needs M >= 2 statistics");
  if (approx.degree != 2) throw InvalidArgument("closed-form posterior needs a degree-2 approximation");
  const double b1 = approx.b[1];
  const double b2 = approx.b[2];
  if (!(b2 < 0.0)) {
    throw InvalidArgument("degree-2 coefficient b_2 >= 0 makes the surrogate unbounded "
                          "(pathological approximation)");
  }
  const std::size_t d = stats.config().dim;
  require_dim(prior, d);

  const MultiIndexSet& idx = stats.index_set();
  const std::size_t off1 = idx.block_offset(1);
  const std::size_t off2 = idx.block_offset(2);
  Eigen::MatrixXd precision(d, d);
  Eigen::VectorXd rhs(d);
  std::size_t pos = off2;
  for (std::size_t i = 0; i < d; ++i) {
    rhs[i] = b1 * stats.value(off1 + i);
    for (std::size_t j = i; j < d; ++j, ++pos) {
      const double v = -2.0 * b2 * stats.value(pos);
      precision(i, j) = v;
      precision(j, i) = v;
    }
  }
  const Eigen::VectorXd pp = prior.precision_diag();
  precision.diagonal() += pp;
  if (!prior.is_flat()) rhs += (pp.array() * prior.mean.array()).matrix();

  Eigen::LLT<Eigen::MatrixXd> llt(precision);
  if (llt.info() != Eigen::Success) {
    throw NumericError("posterior precision is not positive definite");
  }
  Eigen::VectorXd mean = llt.solve(rhs);
  return GaussianPosterior::from_precision(std::move(mean), precision);
}

SurrogatePolynomial SurrogatePolynomial::from_raw(const SuffStats& stats,
                                                  const PolyApprox& approx) {
  if (!stats.raw()) throw InvalidArgument("statistics are not raw monomial sums");
  if (approx.degree > stats.config().degree) {
    throw InvalidArgument("approximation degree exceeds statistics degree");
  }
  SurrogatePolynomial out;
  out.dim_ = stats.config().dim;
  out.degree_ = approx.degree;
  const MultiIndexSet& idx = stats.index_set();
  const std::size_t n = idx.block_offset(approx.degree + 1);
  out.coef_.reserve(n);
  out.vars_.reserve(n);
  idx.for_each([&](std::size_t pos, std::span<const std::uint32_t> vars) {
    if (pos >= n) return;
    const double c = MultiIndexSet::multinomial(vars) * approx.b[vars.size()] * stats.value(pos);
    out.coef_.push_back(c);
    out.vars_.emplace_back(vars.begin(), vars.end());
  });
  return out;
}

SurrogatePolynomial SurrogatePolynomial::from_general(const SuffStats& stats) {
  if (stats.raw()) throw InvalidArgument("raw statistics need a polynomial approximation");
  SurrogatePolynomial out;
  out.dim_ = stats.config().dim;
  out.degree_ = stats.config().degree;
  out.coef_ = stats.values();
  out.vars_.reserve(out.coef_.size());
  stats.index_set().for_each([&](std::size_t, std::span<const std::uint32_t> vars) {
    out.vars_.emplace_back(vars.begin(), vars.end());
  });
  return out;
}

double SurrogatePolynomial::value(const Eigen::VectorXd& theta) const {
  return evaluate(theta, nullptr, nullptr);
}

double SurrogatePolynomial::evaluate(const Eigen::VectorXd& theta, Eigen::VectorXd* grad,
                                     Eigen::MatrixXd* hess) const {
  const auto d = static_cast<Eigen::Index>(dim_);
  if (theta.size() != d) throw InvalidArgument("theta dimension mismatch");
  if (grad) grad->setZero(d);
  if (hess) hess->setZero(d, d);
  double value = 0.0;
  for (std::size_t i = 0; i < coef_.size(); ++i) {
    const double c = coef_[i];
    if (c == 0.0) continue;
    const std::vector<std::uint32_t>& v = vars_[i];
    const std::size_t m = v.size();
    double prod = c;
    for (std::uint32_t j : v) prod *= theta[j];
    value += prod;
    if (grad) {
      for (std::size_t p = 0; p < m; ++p) {
        double others = c;
        for (std::size_t q = 0; q < m; ++q) {
          if (q != p) others *= theta[v[q]];
        }
        (*grad)[v[p]] += others;
      }
    }
    if (hess) {
      for (std::size_t p = 0; p < m; ++p) {
        for (std::size_t q = p + 1; q < m; ++q) {
          double others = c;
          for (std::size_t r = 0; r < m; ++r) {
            if (r != p && r != q) others *= theta[v[r]];
          }
          (*hess)(v[p], v[q]) += others;
          (*hess)(v[q], v[p]) += others;
        }
      }
    }
  }
  return value;
}

void check_leading_coefficient(const PolyApprox& approx) {
  const int lead = effective_degree(approx);
  if (lead == 0) return;
  if (lead % 2 == 1 || approx.b[lead] > 0.0) {
    throw InvalidArgument(std::string(kPathological) + " [order-" + std::to_string(approx.degree) +
                          " approximation has leading term of degree " + std::to_string(lead) +
                          " with coefficient " + std::to_string(approx.b[lead]) + "]");
  }
}

SurrogatePosterior posterior_general(const SuffStats& stats, const PolyApprox& approx,
                                     const PriorSpec& prior, double domain_radius,
                                     const NewtonOptions& opts) {
  check_leading_coefficient(approx);
  return optimize(SurrogatePolynomial::from_raw(stats, approx), prior, domain_radius, opts);
}

SurrogatePosterior posterior_general(const SuffStats& stats, const PriorSpec& prior,
                                     double domain_radius, const NewtonOptions& opts) {
  const YCoefficient* coef = stats.y_coefficient();
  if (coef == nullptr) throw InvalidArgument("raw statistics need a polynomial approximation");
  // The highest-degree term decides boundedness.
  int top = 0;
  for (const PolyApprox& p : coef->approximations()) top = std::max(top, effective_degree(p));
  for (const PolyApprox& p : coef->approximations()) {
    if (effective_degree(p) == top) check_leading_coefficient(p);
  }
  return optimize(SurrogatePolynomial::from_general(stats), prior, domain_radius, opts);
}

MapCertificate map_error_certificate(const MappingSpec& spec, const Dataset& data,
                                     const Eigen::VectorXd& exact_map, const PolyApprox& approx,
                                     const SuffStats& stats, const PriorSpec& prior) {
  MapCertificate out;
  const double n = static_cast<double>(data.size());
  out.eps_n = n * approx.sup_err_est;

  Eigen::MatrixXd neg_hess = -log_likelihood_hessian(spec, exact_map, data);
  neg_hess.diagonal() += prior.precision_diag();
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(neg_hess, Eigen::EigenvaluesOnly);
  out.rho_n = eig.eigenvalues().minCoeff();
  out.premise_strictly_concave = out.rho_n > 0.0 && spec.log_concave();
  out.premise_prior_log_concave = true;  // Gaussian and flat priors are log-concave

  const MappingTerm& term = spec.terms().front();
  std::size_t inside = 0;
  for (const Record& r : data.records) {
    const double arg = (term.beta == 1 ? r.y : 1.0) * r.x.dot(exact_map) - term.a * r.y;
    if (std::abs(arg) <= approx.radius) ++inside;
  }
  out.in_range_fraction = data.size() == 0 ? 1.0 : static_cast<double>(inside) / n;
  out.premise_in_range = out.in_range_fraction >= 0.98;

  if (stats.raw() && approx.degree == 2 && !prior.is_flat()) {
    out.surrogate_map = posterior_lr2(stats, approx, prior).mean();
  } else if (stats.raw()) {
    out.surrogate_map = posterior_general(stats, approx, prior).map;
  } else {
    out.surrogate_map = posterior_general(stats, prior).map;
  }
  out.measured = (exact_map - out.surrogate_map).squaredNorm();
  out.bound = out.rho_n > 0.0 ? 4.0 * out.eps_n / out.rho_n : std::numeric_limits<double>::infinity();
  out.holds = out.measured <= out.bound;
  return out;
}

}  // namespace passglm
