#include <doctest.h>

#include <cmath>
#include <random>

#include "oracles.hpp"
#include "passglm/errors.hpp"
#include "passglm/glm_mappings.hpp"
#include "passglm/poly_approx.hpp"

using namespace passglm;

namespace {

Dataset make_data(std::size_t n, std::size_t d, std::uint64_t seed, bool binary) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> g;
  std::uniform_int_distribution<int> coin(0, 1);
  std::poisson_distribution<int> pois(1.5);
  Dataset data;
  data.dim = d;
  for (std::size_t i = 0; i < n; ++i) {
    Eigen::VectorXd x(d);
    for (std::size_t j = 0; j < d; ++j) x[j] = 0.4 * g(rng);
    data.records.push_back({binary ? (coin(rng) ? 1.0 : -1.0) : double(pois(rng)), SparseVector::from_dense(x)});
  }
  return data;
}

Dataset positive_data(std::size_t n, std::size_t d, std::uint64_t seed) {
  Dataset data = make_data(n, d, seed, false);
  std::mt19937_64 rng(seed + 1);
  std::uniform_real_distribution<double> u(0.2, 3.0);
  for (auto& r : data.records) r.y = u(rng);
  return data;
}

Eigen::VectorXd fd_grad(const MappingSpec& spec, const Eigen::VectorXd& th, const Dataset& data) {
  Eigen::VectorXd g(th.size());
  for (Eigen::Index j = 0; j < th.size(); ++j) {
    Eigen::VectorXd a = th, b = th;
    const double h = 1e-5;
    a[j] += h;
    b[j] -= h;
    g[j] = (log_likelihood(spec, a, data) - log_likelihood(spec, b, data)) / (2 * h);
  }
  return g;
}

}  // namespace

TEST_CASE("logistic decomposition") {
  const MappingSpec s = mapping_logit();
  REQUIRE(s.terms().size() == 1);
  CHECK(s.terms()[0].alpha == 0);
  CHECK(s.terms()[0].beta == 1);
  CHECK(s.terms()[0].a == 0);
  CHECK(s.raw_statistics());
  CHECK(s.labels() == LabelMode::kPlusMinus);
  CHECK(s.log_concave());
}

TEST_CASE("Poisson decomposition") {
  const MappingSpec s = mapping_poisson();
  REQUIRE(s.terms().size() == 2);
  CHECK(s.terms()[0].alpha == 1);
  CHECK(s.terms()[0].phi.f(1.3) == doctest::Approx(1.3));
  CHECK(s.terms()[1].alpha == 0);
  CHECK(s.terms()[1].phi.f(0.7) == doctest::Approx(-std::exp(0.7)));
  CHECK_FALSE(s.raw_statistics());
  CHECK(s.data_constant(3.0) == doctest::Approx(-std::log(6.0)));
}

TEST_CASE("smoothed Huber near zero") {
  const MappingSpec s = mapping_shuber(1.0);
  CHECK(s.record_loglik(0.0, 0.0) == 0.0);
  for (double u : {1e-3, -2e-3, 5e-3}) {
    CHECK(s.record_loglik(0.0, u) == doctest::Approx(-u * u / 2).epsilon(1e-4));
  }
  // residual form: phi(x.theta - y)
  CHECK(s.record_loglik(1.0, 1.0) == 0.0);
}

TEST_CASE("other mappings evaluate their densities") {
  const double y = 1.7, s = 0.3, nu = 2.5;
  const MappingSpec gm = mapping_gamma(nu);
  const double mu = std::exp(s);
  const double log_pdf = nu * std::log(nu) - std::lgamma(nu) - nu * std::log(mu) +
                         (nu - 1) * std::log(y) - nu * y / mu;
  CHECK(gm.record_loglik(y, s) + gm.data_constant(y) == doctest::Approx(log_pdf).epsilon(1e-12));

  const MappingSpec pr = mapping_probit();
  CHECK(pr.labels() == LabelMode::kZeroOne);
  const double Phi = 0.5 * std::erfc(-s / std::sqrt(2.0));
  CHECK(pr.record_loglik(1.0, s) == doctest::Approx(std::log(Phi)).epsilon(1e-12));
  CHECK(pr.record_loglik(0.0, s) == doctest::Approx(std::log1p(-Phi)).epsilon(1e-12));
  CHECK(std::isfinite(pr.record_loglik(1.0, -30.0)));

  const MappingSpec pois = mapping_poisson();
  CHECK(pois.record_loglik(3.0, s) + pois.data_constant(3.0) ==
        doctest::Approx(3 * s - std::exp(s) - std::log(6.0)).epsilon(1e-12));

  const MappingSpec ca = mapping_cauchy(2.0);
  CHECK_FALSE(ca.log_concave());
  CHECK(ca.record_loglik(1.0, 3.0) == doctest::Approx(-std::log1p(4.0 / 4.0)));
}

TEST_CASE("scale parameters must be positive") {
  CHECK_THROWS_AS(mapping_shuber(0.0), InvalidArgument);
  CHECK_THROWS_AS(mapping_cauchy(-1.0), InvalidArgument);
  CHECK_THROWS_AS(mapping_gamma(0.0), InvalidArgument);
}

TEST_CASE("construction validates terms") {
  ScalarMap ok{[](double s) { return -s * s; }, [](double s) { return -2 * s; }, [](double) { return -2.0; }};
  CHECK_THROWS_AS(MappingSpec(Model::kCustom, "bad", {MappingTerm{ok, 2, 0, 0}}, 1.0, LabelMode::kReal, true),
                  InvalidArgument);
  ScalarMap bad{[](double s) { return std::log(s); }, [](double s) { return 1 / s; },
                [](double s) { return -1 / (s * s); }};
  CHECK_THROWS_AS(mapping_custom("log", bad, true), InvalidArgument);
  CHECK_NOTHROW(mapping_custom("quad", ok, true));
}

TEST_CASE("model names round-trip") {
  for (Model m : {Model::kLogit, Model::kPoisson, Model::kSmoothedHuber, Model::kCauchy, Model::kGamma,
                  Model::kProbit}) {
    CHECK(parse_model(model_name(m)) == m);
  }
  CHECK_THROWS_AS(parse_model("linear"), InvalidArgument);
}

TEST_CASE("exact log-likelihood values") {
  const Dataset data = make_data(37, 3, 1, true);
  const MappingSpec lg = mapping_logit();
  CHECK(log_likelihood(lg, Eigen::VectorXd::Zero(3), data) == doctest::Approx(37 * std::log(0.5)));

  Dataset one;
  one.dim = 2;
  one.records.push_back({2.0, SparseVector::from_dense(Eigen::Vector2d(0.3, -0.8))});
  CHECK(log_likelihood(mapping_poisson(), Eigen::VectorXd::Zero(2), one) ==
        doctest::Approx(-1.0 - std::log(2.0)));

  std::mt19937_64 rng(3);
  std::normal_distribution<double> g;
  for (int rep = 0; rep < 5; ++rep) {
    Eigen::VectorXd th(3);
    for (int j = 0; j < 3; ++j) th[j] = 2 * g(rng);
    const double a = log_likelihood(lg, th, data);
    CHECK(a == doctest::Approx(oracle::logistic_loglik(th, data)).epsilon(1e-12));
  }
  CHECK_THROWS_AS(log_likelihood(lg, Eigen::VectorXd::Zero(2), data), InvalidArgument);
}

TEST_CASE("non-finite contributions name the record") {
  Dataset data = positive_data(4, 2, 5);
  data.records[2].y = 0.0;  // log(0) in the gamma constant
  try {
    log_likelihood(mapping_gamma(2.0), Eigen::VectorXd::Zero(2), data);
    FAIL("expected NumericError");
  } catch (const NumericError& e) {
    CHECK(std::string(e.what()).find("record 2") != std::string::npos);
  }
}

TEST_CASE("logistic gradient special cases") {
  const Dataset data = make_data(50, 4, 2, true);
  Eigen::VectorXd expect = Eigen::VectorXd::Zero(4);
  for (const auto& r : data.records) {
    for (std::size_t i = 0; i < r.x.nnz(); ++i) expect[r.x.index[i]] += 0.5 * r.y * r.x.value[i];
  }
  CHECK((log_likelihood_grad(mapping_logit(), Eigen::VectorXd::Zero(4), data) - expect).norm() < 1e-12);

  Dataset one;
  one.dim = 1;
  one.records.push_back({1.0, SparseVector::from_dense(Eigen::VectorXd::Ones(1))});
  for (double t : {-3.0, 0.2, 4.0}) {
    CHECK(log_likelihood_grad(mapping_logit(), Eigen::VectorXd::Constant(1, t), one)[0] ==
          doctest::Approx(1.0 / (1.0 + std::exp(t))));
  }
}

TEST_CASE("gradients and Hessians match finite differences") {
  std::mt19937_64 rng(9);
  std::normal_distribution<double> g;
  struct Case {
    MappingSpec spec;
    Dataset data;
  };
  const std::vector<Case> cases = {
      {mapping_logit(), make_data(40, 3, 4, true)},
      {mapping_poisson(), make_data(40, 3, 5, false)},
      {mapping_shuber(1.3), positive_data(40, 3, 6)},
      {mapping_cauchy(0.8), positive_data(40, 3, 7)},
      {mapping_gamma(1.7), positive_data(40, 3, 8)},
  };
  for (const auto& c : cases) {
    for (int rep = 0; rep < 4; ++rep) {
      Eigen::VectorXd th(3);
      for (int j = 0; j < 3; ++j) th[j] = 0.8 * g(rng);
      const Eigen::VectorXd an = log_likelihood_grad(c.spec, th, c.data);
      CHECK((an - fd_grad(c.spec, th, c.data)).norm() <= 1e-5 * std::max(1.0, an.norm()));
      const Eigen::MatrixXd h = log_likelihood_hessian(c.spec, th, c.data);
      Eigen::MatrixXd fh(3, 3);
      for (int j = 0; j < 3; ++j) {
        Eigen::VectorXd a = th, b = th;
        a[j] += 1e-5;
        b[j] -= 1e-5;
        fh.col(j) = (log_likelihood_grad(c.spec, a, c.data) - log_likelihood_grad(c.spec, b, c.data)) / 2e-5;
      }
      CHECK((h - fh).norm() <= 1e-5 * std::max(1.0, h.norm()));
    }
  }
  // probit on 0/1 labels
  Dataset pd = make_data(40, 3, 10, true);
  for (auto& r : pd.records) r.y = r.y > 0 ? 1.0 : 0.0;
  const MappingSpec pr = mapping_probit();
  Eigen::VectorXd th(3);
  th << 0.5, -1.0, 0.2;
  const Eigen::VectorXd an = log_likelihood_grad(pr, th, pd);
  CHECK((an - fd_grad(pr, th, pd)).norm() <= 1e-5 * std::max(1.0, an.norm()));
}

TEST_CASE("logistic y-coefficients reduce to y^k b_k") {
  const MappingSpec lg = mapping_logit();
  const auto fits = fit_terms(lg, 6, 4.0);
  const YCoefficient yc(lg, fits);
  std::vector<double> w(7);
  for (double y : {1.0, -1.0}) {
    yc.weights(y, w);
    for (int k = 0; k <= 6; ++k) CHECK(w[k] == doctest::Approx(std::pow(y, k) * fits[0].b[k]).epsilon(1e-14));
    CHECK(yc(3.0, 2, y) == doctest::Approx(3.0 * fits[0].b[2]));
  }
}

TEST_CASE("general-form weights reassemble the per-record surrogate") {
  std::mt19937_64 rng(12);
  std::uniform_real_distribution<double> u(-1.5, 1.5);
  for (const MappingSpec& spec : {mapping_poisson(), mapping_shuber(1.0), mapping_gamma(2.0),
                                  mapping_probit(), mapping_logit()}) {
    const int M = 4;
    const auto fits = fit_terms(spec, M, 3.0);
    const YCoefficient yc(spec, fits);
    std::vector<double> w(M + 1);
    for (int rep = 0; rep < 20; ++rep) {
      const double y = spec.labels() == LabelMode::kPlusMinus ? (rep % 2 ? 1.0 : -1.0)
                       : spec.labels() == LabelMode::kZeroOne ? double(rep % 2)
                                                              : std::abs(u(rng)) + 0.1;
      const double s = u(rng);
      yc.weights(y, w);
      double lhs = 0.0;
      for (int i = 0; i <= M; ++i) lhs += w[i] * std::pow(s, i);
      double rhs = 0.0;
      for (std::size_t t = 0; t < fits.size(); ++t) {
        const MappingTerm& term = spec.terms()[t];
        const double arg = (term.beta ? y : 1.0) * s - term.a * y;
        rhs += (term.alpha ? y : 1.0) * eval_poly(fits[t], arg);
      }
      CHECK(lhs == doctest::Approx(rhs).epsilon(1e-10));
    }
  }
}

TEST_CASE("logistic curvature range") {
  double lo = 0.0, hi = -1.0;
  for (int i = 0; i <= 20000; ++i) {
    const double s = -40.0 + 80.0 * i / 20000.0;
    const double h = mapping_logit().record_d2loglik(1.0, s);
    lo = std::min(lo, h);
    hi = std::max(hi, h);
  }
  CHECK(lo >= -0.25);
  CHECK(hi < 0.0);
  auto third = [](double s) {
    const double p = sigmoid(s);
    return -p * (1 - p) * (1 - 2 * p);
  };
  const double at = golden_section_minimize([&](double s) { return -std::abs(third(s)); }, 0.0, 5.0, 1e-12);
  CHECK(std::abs(std::abs(third(at)) - 1.0 / (6.0 * std::sqrt(3.0))) <= 1e-9);
}
