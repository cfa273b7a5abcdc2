#include <doctest.h>

#include <random>

#include "oracles.hpp"
#include "passglm/baselines.hpp"
#include "passglm/errors.hpp"
#include "passglm/posterior.hpp"
#include "passglm/synth.hpp"

using namespace passglm;

namespace {

Dataset logistic_data(std::size_t n, Eigen::VectorXd theta, std::uint64_t seed) {
  SynthConfig cfg;
  cfg.model = Model::kLogit;
  cfg.dim = static_cast<std::size_t>(theta.size());
  cfg.count = n;
  cfg.seed = seed;
  cfg.theta_true = std::move(theta);
  return synthesize(cfg);
}

SuffStats stats_for(const MappingSpec& spec, const Dataset& data, int M, double R) {
  SuffStats s(spec, data.dim, M, R);
  for (const auto& r : data.records) s.accumulate(r);
  return s;
}

// log prior + sum_n f_2(y x.theta) with the golden R=4 coefficients.
double surrogate_logpost(const Dataset& data, const Eigen::VectorXd& th, double var) {
  const double* b = oracle::kLogitB_M2_R4;
  double acc = -0.5 * th.squaredNorm() / var;
  for (const auto& r : data.records) {
    double s = 0.0;
    for (std::size_t i = 0; i < r.x.index.size(); ++i) s += r.x.value[i] * th[r.x.index[i]];
    s *= r.y;
    acc += b[0] + b[1] * s + b[2] * s * s;
  }
  return acc;
}

double frob_rel(const Eigen::MatrixXd& a, const Eigen::MatrixXd& ref) {
  return (a - ref).norm() / ref.norm();
}

}  // namespace

TEST_CASE("no data returns the prior") {
  const SuffStats s(mapping_logit(), 3, 2, 4.0);
  const PolyApprox approx = fit_chebyshev(phi_logit, 2, 4.0);
  Eigen::VectorXd m(3);
  m << 0.5, -1.0, 2.0;
  const GaussianPosterior post = posterior_lr2(s, approx, PriorSpec::gaussian(m, Eigen::Vector3d(4, 4, 4)));
  CHECK((post.mean() - m).norm() <= 1e-14);
  CHECK((post.covariance() - 4.0 * Eigen::Matrix3d::Identity()).norm() <= 1e-14);
  CHECK(post.logdet() == doctest::Approx(3 * std::log(4.0)));
}

TEST_CASE("single record in one dimension") {
  Dataset data;
  data.dim = 1;
  data.records.push_back({1.0, {{0}, {1.0}}});
  const PolyApprox approx = fit_chebyshev(phi_logit, 2, 4.0);
  const GaussianPosterior post =
      posterior_lr2(stats_for(mapping_logit(), data, 2, 4.0), approx, PriorSpec::gaussian(1, 4.0));
  const double b1 = oracle::kLogitB_M2_R4[1], b2 = oracle::kLogitB_M2_R4[2];
  const double prec = 0.25 - 2.0 * b2;
  CHECK(post.covariance()(0, 0) == doctest::Approx(1.0 / prec).epsilon(1e-12));
  CHECK(post.mean()[0] == doctest::Approx(b1 / prec).epsilon(1e-12));
}

TEST_CASE("closed form matches grid quadrature of the surrogate posterior") {
  const Dataset data = logistic_data(500, Eigen::Vector2d(1.5, -1.0), 3);
  const PolyApprox approx = fit_chebyshev(phi_logit, 2, 4.0);
  const GaussianPosterior post =
      posterior_lr2(stats_for(mapping_logit(), data, 2, 4.0), approx, PriorSpec::gaussian(2, 4.0));
  const Eigen::Vector2d sd = post.marginal_variances().cwiseSqrt();
  const auto grid = oracle::grid_moments_2d(
      [&](const Eigen::Vector2d& t) { return surrogate_logpost(data, t, 4.0); }, post.mean(), 9.0 * sd);
  CHECK((post.mean() - grid.mean).norm() <= 1e-3 * grid.mean.norm());
  CHECK(frob_rel(post.covariance(), grid.cov) <= 1e-3);

  const Dataset one = logistic_data(200, Eigen::VectorXd::Constant(1, 0.8), 4);
  const GaussianPosterior p1 =
      posterior_lr2(stats_for(mapping_logit(), one, 2, 4.0), approx, PriorSpec::gaussian(1, 4.0));
  const auto g1 = oracle::grid_moments_1d(
      [&](double t) { return surrogate_logpost(one, Eigen::VectorXd::Constant(1, t), 4.0); },
      p1.mean()[0], 10.0 * std::sqrt(p1.covariance()(0, 0)));
  CHECK(p1.mean()[0] == doctest::Approx(g1.mean[0]).epsilon(1e-3));
  CHECK(p1.covariance()(0, 0) == doctest::Approx(g1.cov(0, 0)).epsilon(1e-3));
}

TEST_CASE("general path reproduces the closed form at M = 2") {
  const Dataset data = logistic_data(400, Eigen::Vector3d(1.0, -0.5, 0.3), 5);
  const PolyApprox approx = fit_chebyshev(phi_logit, 2, 4.0);
  const SuffStats s = stats_for(mapping_logit(), data, 2, 4.0);
  const PriorSpec prior = PriorSpec::gaussian(3, 4.0);
  const GaussianPosterior lr2 = posterior_lr2(s, approx, prior);
  const SurrogatePosterior gen = posterior_general(s, approx, prior);
  CHECK((gen.map - lr2.mean()).norm() <= 1e-8);
  CHECK(frob_rel(gen.laplace.covariance(), lr2.covariance()) <= 1e-8);
}

TEST_CASE("flat prior gives the surrogate MLE") {
  const Dataset data = logistic_data(300, Eigen::Vector2d(0.7, 0.4), 6);
  const PolyApprox approx = fit_chebyshev(phi_logit, 2, 4.0);
  const SuffStats s = stats_for(mapping_logit(), data, 2, 4.0);
  const SurrogatePosterior flat = posterior_general(s, approx, PriorSpec::flat(2));

  Eigen::Vector2d t1 = Eigen::Vector2d::Zero();
  Eigen::Matrix2d T2 = Eigen::Matrix2d::Zero();
  for (const auto& r : data.records) {
    Eigen::Vector2d x = Eigen::Vector2d::Zero();
    for (std::size_t i = 0; i < r.x.nnz(); ++i) x[r.x.index[i]] = r.x.value[i];
    t1 += r.y * x;
    T2 += x * x.transpose();
  }
  const Eigen::Vector2d mle = (-2.0 * approx.b[2] * T2).ldlt().solve(approx.b[1] * t1);
  CHECK((flat.map - mle).norm() <= 1e-8 * std::max(1.0, mle.norm()));

  const GaussianPosterior vague = posterior_lr2(s, approx, PriorSpec::gaussian(2, 1e8));
  CHECK((vague.mean() - flat.map).norm() <= 1e-4);
}

TEST_CASE("pathological approximations are rejected") {
  const Dataset data = logistic_data(100, Eigen::Vector2d(0.5, 0.5), 7);
  const PolyApprox flipped = fit_chebyshev([](double s) { return -phi_logit(s); }, 2, 4.0);
  REQUIRE(flipped.b[2] > 0.0);
  CHECK_THROWS_AS(posterior_lr2(stats_for(mapping_logit(), data, 2, 4.0), flipped, PriorSpec::gaussian(2, 4.0)),
                  InvalidArgument);

  const PolyApprox m4 = fit_chebyshev(phi_logit, 4, 4.0);
  CHECK_THROWS_AS(posterior_general(stats_for(mapping_logit(), data, 4, 4.0), m4, PriorSpec::gaussian(2, 4.0)),
                  InvalidArgument);
  CHECK_THROWS_AS(check_leading_coefficient(m4), InvalidArgument);
  CHECK_NOTHROW(check_leading_coefficient(fit_chebyshev(phi_logit, 6, 4.0)));
  CHECK_NOTHROW(check_leading_coefficient(fit_chebyshev(phi_logit, 3, 4.0)));
  CHECK_THROWS_AS(check_leading_coefficient(fit_chebyshev([](double s) { return -std::exp(s); }, 3, 2.0)),
                  InvalidArgument);

  const SuffStats m3 = stats_for(mapping_logit(), data, 3, 4.0);
  CHECK_THROWS_AS(posterior_lr2(m3, fit_chebyshev(phi_logit, 3, 4.0), PriorSpec::gaussian(2, 4.0)),
                  InvalidArgument);
}

TEST_CASE("more data never widens the posterior") {
  const Dataset data = logistic_data(400, Eigen::Vector3d(1.0, 0.0, -1.0), 8);
  const PolyApprox approx = fit_chebyshev(phi_logit, 2, 4.0);
  SuffStats s(mapping_logit(), 3, 2, 4.0);
  double last = INFINITY;
  for (std::size_t i = 0; i < data.size(); ++i) {
    s.accumulate(data.records[i]);
    if (i % 50 != 0) continue;
    const Eigen::MatrixXd cov = posterior_lr2(s, approx, PriorSpec::gaussian(3, 4.0)).covariance();
    const double norm2 = Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(cov).eigenvalues().maxCoeff();
    CHECK(norm2 <= last + 1e-12);
    last = norm2;
  }
}

TEST_CASE("surrogate gradient and Hessian agree with finite differences") {
  const Dataset data = logistic_data(200, Eigen::Vector3d(0.5, -0.5, 1.0), 9);
  const SurrogatePolynomial sur =
      SurrogatePolynomial::from_raw(stats_for(mapping_logit(), data, 6, 4.0), fit_chebyshev(phi_logit, 6, 4.0));
  std::mt19937_64 rng(1);
  std::normal_distribution<double> g;
  for (int rep = 0; rep < 50; ++rep) {
    Eigen::VectorXd th(3);
    for (int j = 0; j < 3; ++j) th[j] = g(rng);
    Eigen::VectorXd grad;
    Eigen::MatrixXd hess;
    const double v = sur.evaluate(th, &grad, &hess);
    CHECK(v == doctest::Approx(sur.value(th)).epsilon(1e-12));
    for (int j = 0; j < 3; ++j) {
      const double h = 1e-5 * std::max(1.0, std::abs(th[j]));
      Eigen::VectorXd up = th, dn = th;
      up[j] += h;
      dn[j] -= h;
      const double fd = (sur.value(up) - sur.value(dn)) / (2 * h);
      CHECK(std::abs(fd - grad[j]) <= 1e-5 * std::max(1.0, std::abs(grad[j])));
      Eigen::VectorXd gu, gd;
      sur.evaluate(up, &gu, nullptr);
      sur.evaluate(dn, &gd, nullptr);
      const Eigen::VectorXd col = (gu - gd) / (2 * h);
      CHECK((col - hess.col(j)).norm() <= 1e-5 * std::max(1.0, hess.col(j).norm()));
    }
  }
}

TEST_CASE("Poisson surrogate MAP is close to the exact MAP") {
  SynthConfig cfg;
  cfg.model = Model::kPoisson;
  cfg.dim = 2;
  cfg.count = 200;
  cfg.seed = 10;
  cfg.theta_true = Eigen::Vector2d(0.8, -0.5);
  const Dataset data = synthesize(cfg);
  const PriorSpec prior = PriorSpec::gaussian(2, 4.0);
  const SurrogatePosterior pass = posterior_general(stats_for(mapping_poisson(), data, 4, 2.0), prior, 2.0);
  const LaplaceResult exact = laplace(mapping_poisson(), prior, data);
  CHECK((pass.map - exact.posterior.mean()).norm() <= 0.05);
  Eigen::VectorXd g;
  const double lp = pass.surrogate.evaluate(pass.map, &g, nullptr) + prior.log_density(pass.map);
  CHECK((g + prior.grad(pass.map)).norm() <= 1e-8 * std::max(1.0, std::abs(lp)));
}

TEST_CASE("projected Newton respects the domain radius") {
  SynthConfig cfg;
  cfg.model = Model::kPoisson;
  cfg.dim = 2;
  cfg.count = 300;
  cfg.seed = 11;
  cfg.theta_true = Eigen::Vector2d(1.5, 1.0);
  const Dataset data = synthesize(cfg);
  const SurrogatePosterior p =
      posterior_general(stats_for(mapping_poisson(), data, 4, 2.0), PriorSpec::flat(2), 0.5);
  CHECK(p.map.norm() <= 0.5 + 1e-12);
  CHECK(p.map.norm() >= 0.5 - 1e-6);
}

TEST_CASE("MAP certificate") {
  const PriorSpec prior = PriorSpec::gaussian(5, 4.0);
  Eigen::VectorXd th(5);
  th << 0.8, -0.6, 0.4, 0.0, 1.0;
  const Dataset data = logistic_data(2000, th, 12);
  const PolyApprox approx = fit_chebyshev(phi_logit, 2, 4.0);
  const SuffStats s = stats_for(mapping_logit(), data, 2, 4.0);
  const LaplaceResult exact = laplace(mapping_logit(), prior, data);
  const MapCertificate cert = map_error_certificate(mapping_logit(), data, exact.posterior.mean(), approx, s, prior);
  CHECK(cert.premise_in_range);
  CHECK(cert.premise_strictly_concave);
  CHECK(cert.premise_prior_log_concave);
  CHECK(cert.measured <= cert.bound);
  CHECK(cert.holds);
  CHECK(cert.bound == doctest::Approx(4.0 * cert.eps_n / cert.rho_n));

  // Quadratic likelihood: the degree-2 fit is exact.
  const ScalarMap quad{[](double u) { return 0.4 * u - 0.5 * u * u; }, [](double u) { return 0.4 - u; },
                       [](double) { return -1.0; }};
  const MappingSpec qspec = mapping_custom("quadratic", quad, true);
  const PolyApprox qfit = fit_chebyshev(quad.f, 2, 4.0);
  const LaplaceResult qmap = laplace(qspec, prior, data);
  const MapCertificate qc = map_error_certificate(qspec, data, qmap.posterior.mean(), qfit,
                                                  stats_for(qspec, data, 2, 4.0), prior);
  CHECK(qc.eps_n <= 1e-9);
  CHECK(qc.bound <= 1e-10);
  CHECK(qc.measured <= 1e-20);

  const PolyApprox narrow = fit_chebyshev(phi_logit, 2, 0.05);
  const MapCertificate bad = map_error_certificate(mapping_logit(), data, exact.posterior.mean(), narrow,
                                                   stats_for(mapping_logit(), data, 2, 0.05), prior);
  CHECK_FALSE(bad.premise_in_range);
  CHECK(bad.in_range_fraction < 0.98);
}

TEST_CASE("sampling") {
  Eigen::Matrix2d L;
  L << 1.5, 0.0, 0.6, 0.4;
  const GaussianPosterior post(Eigen::Vector2d(1.0, -2.0), L);
  const std::size_t n = 100000;
  const Eigen::MatrixXd draws = sample(post, n, 42);
  REQUIRE(draws.rows() == static_cast<Eigen::Index>(n));
  const Eigen::VectorXd m = draws.colwise().mean();
  const Eigen::VectorXd sd = post.marginal_variances().cwiseSqrt();
  for (int j = 0; j < 2; ++j) CHECK(std::abs(m[j] - post.mean()[j]) <= 4.0 * sd[j] / std::sqrt(double(n)));
  const Eigen::MatrixXd c = draws.rowwise() - m.transpose();
  const Eigen::MatrixXd cov = c.transpose() * c / double(n - 1);
  CHECK(frob_rel(cov, post.covariance()) <= 0.05);
  CHECK(sample(post, 10, 42) == draws.topRows(10));
  CHECK(sample(post, 10, 43) != draws.topRows(10));
  CHECK(post.logdet() == doctest::Approx(2.0 * std::log(1.5 * 0.4)));
}

TEST_CASE("precision must be positive definite") {
  Eigen::Matrix2d bad;
  bad << 1.0, 2.0, 2.0, 1.0;
  CHECK_THROWS_AS(GaussianPosterior::from_precision(Eigen::Vector2d::Zero(), bad), NumericError);
  CHECK_THROWS_AS(PriorSpec::gaussian(2, 0.0), InvalidArgument);
}
