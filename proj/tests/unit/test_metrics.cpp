#include <doctest.h>

#include <random>

#include "passglm/errors.hpp"
#include "passglm/metrics.hpp"

using namespace passglm;

namespace {

GaussianSummary gs(Eigen::VectorXd m, Eigen::MatrixXd c) { return {std::move(m), std::move(c)}; }

Eigen::MatrixXd random_spd(int d, std::mt19937_64& rng) {
  std::normal_distribution<double> g;
  Eigen::MatrixXd a(d, d);
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j) a(i, j) = g(rng);
  return a * a.transpose() + 0.5 * Eigen::MatrixXd::Identity(d, d);
}

}  // namespace

TEST_CASE("identical Gaussians are at distance zero") {
  std::mt19937_64 rng(1);
  const Eigen::MatrixXd c = random_spd(4, rng);
  const auto a = gs(Eigen::Vector4d(1, 2, 3, 4), c);
  CHECK(w2(a, a) <= 1e-7);
  const EvalReport r = compare_posteriors(a, a);
  CHECK(*r.mean_err == 0.0);
  CHECK(*r.var_err == 0.0);
}

TEST_CASE("translation only moves the mean term") {
  std::mt19937_64 rng(2);
  const Eigen::MatrixXd c = random_spd(3, rng);
  const auto a = gs(Eigen::Vector3d(0, 0, 0), c);
  const auto b = gs(Eigen::Vector3d(3, 0, 4), c);
  CHECK(w2(a, b) == doctest::Approx(5.0).epsilon(1e-8));
  const EvalReport r = compare_posteriors(a, b);
  CHECK(*r.mean_err == doctest::Approx(7.0 / 3.0));
  CHECK(*r.var_err == 0.0);
}

TEST_CASE("closed form matches a sampled optimal coupling") {
  // Commuting covariances: the monotone coupling x -> m_b + B^{1/2} A^{-1/2}(x - m_a) is optimal.
  std::mt19937_64 rng(3);
  std::normal_distribution<double> g;
  Eigen::Matrix3d q = random_spd(3, rng);
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> eig(q);
  const Eigen::Matrix3d U = eig.eigenvectors();
  const Eigen::Vector3d la(1.0, 2.5, 0.3), lb(2.0, 0.4, 1.1);
  const Eigen::Matrix3d A = U * la.asDiagonal() * U.transpose();
  const Eigen::Matrix3d B = U * lb.asDiagonal() * U.transpose();
  const Eigen::Vector3d ma(0.5, -1.0, 0.2), mb(1.0, 0.0, -0.3);
  const Eigen::Matrix3d T = U * (lb.cwiseSqrt().cwiseQuotient(la.cwiseSqrt())).asDiagonal() * U.transpose();
  const Eigen::Matrix3d Ahalf = U * la.cwiseSqrt().asDiagonal() * U.transpose();
  const int n = 100000;
  double acc = 0.0;
  for (int i = 0; i < n; ++i) {
    const Eigen::Vector3d z(g(rng), g(rng), g(rng));
    const Eigen::Vector3d x = ma + Ahalf * z;
    const Eigen::Vector3d y = mb + T * (x - ma);
    acc += (x - y).squaredNorm();
  }
  const double sampled = std::sqrt(acc / n);
  CHECK(w2(gs(ma, A), gs(mb, B)) == doctest::Approx(sampled).epsilon(0.02));
}

TEST_CASE("w2 is a metric on random instances") {
  std::mt19937_64 rng(4);
  std::normal_distribution<double> g;
  for (int rep = 0; rep < 20; ++rep) {
    GaussianSummary s[3];
    for (auto& x : s) x = gs(Eigen::Vector3d(g(rng), g(rng), g(rng)), random_spd(3, rng));
    CHECK(w2(s[0], s[1]) >= 0.0);
    CHECK(w2(s[0], s[1]) == doctest::Approx(w2(s[1], s[0])).epsilon(1e-8));
    CHECK(w2(s[0], s[2]) <= w2(s[0], s[1]) + w2(s[1], s[2]) + 1e-9);
  }
}

TEST_CASE("PSD square root") {
  std::mt19937_64 rng(5);
  const Eigen::MatrixXd a = random_spd(5, rng);
  const Eigen::MatrixXd r = psd_sqrt(a);
  CHECK((r * r - a).norm() <= 1e-10 * a.norm());
  Eigen::Matrix2d neg;
  neg << 1.0, 0.0, 0.0, -1e-18;
  CHECK(psd_sqrt(neg)(1, 1) == 0.0);
}

TEST_CASE("summaries from draws") {
  Eigen::MatrixXd d(4, 2);
  d << 1, 0, 3, 0, 1, 2, 3, 2;
  const GaussianSummary s = GaussianSummary::from_draws(d);
  CHECK(s.mean.isApprox(Eigen::Vector2d(2, 1)));
  CHECK(s.cov(0, 0) == doctest::Approx(4.0 / 3.0));
  CHECK(s.cov(0, 1) == doctest::Approx(0.0));
}

TEST_CASE("test NLL") {
  Dataset data;
  data.dim = 2;
  std::mt19937_64 rng(6);
  std::normal_distribution<double> g;
  for (int i = 0; i < 100; ++i) {
    const Eigen::Vector2d x(g(rng), g(rng));
    data.records.push_back({x[0] > 0 ? 1.0 : -1.0, SparseVector::from_dense(x)});
  }
  CHECK(test_nll(mapping_logit(), Eigen::Vector2d::Zero(), data) == doctest::Approx(std::log(2.0)));
  CHECK(test_nll(mapping_logit(), Eigen::Vector2d(1e4, 0), data) <= 1e-6);
  CHECK(test_nll(mapping_logit(), Eigen::Vector2d(-1e4, 0), data) > 10.0);

  const GaussianPosterior point(Eigen::Vector2d(1.0, 0.0), Eigen::Matrix2d::Identity() * 1e-9);
  CHECK(test_nll_predictive(mapping_logit(), point, data, 200, 1) ==
        doctest::Approx(test_nll(mapping_logit(), Eigen::Vector2d(1.0, 0.0), data)).epsilon(1e-6));
}

TEST_CASE("ROC AUC") {
  CHECK(roc_auc({0.1, 0.2, 0.8, 0.9}, {-1, -1, 1, 1}) == 1.0);
  CHECK(roc_auc({0.9, 0.8, 0.2, 0.1}, {-1, -1, 1, 1}) == 0.0);
  CHECK(roc_auc({0.5, 0.5}, {0, 1}) == 0.5);
  CHECK(roc_auc({0.1, 0.4, 0.35, 0.8}, {0, 0, 1, 1}) == 0.75);

  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> u;
  std::vector<double> s(20000), l(20000);
  for (std::size_t i = 0; i < s.size(); ++i) {
    s[i] = u(rng);
    l[i] = u(rng) < 0.5 ? 1.0 : -1.0;
  }
  const double base = roc_auc(s, l);
  CHECK(std::abs(base - 0.5) <= 0.02);
  std::vector<double> t(s.size());
  for (std::size_t i = 0; i < s.size(); ++i) t[i] = std::exp(3.0 * s[i]) - 7.0;
  CHECK(roc_auc(t, l) == base);
  CHECK_THROWS_AS(roc_auc({0.1, 0.2}, {1, 1}), InvalidArgument);
  CHECK_THROWS_AS(roc_auc({0.1}, {1, 0}), InvalidArgument);
}

TEST_CASE("inner product histogram") {
  Dataset data;
  data.dim = 1;
  for (double x : {-0.9, -0.5, 0.2, 0.6, 0.95}) data.records.push_back({1.0, {{0}, {x}}});
  const auto h = inner_product_histogram(data, Eigen::VectorXd::Constant(1, 10.0), 4.0, 4, -8.0, 8.0);
  REQUIRE(h.edges.size() == 5);
  CHECK(h.edges.front() == -8.0);
  CHECK(h.edges.back() == 8.0);
  CHECK(h.below == 1);
  CHECK(h.above == 1);
  CHECK(h.counts == std::vector<std::uint64_t>{1, 0, 1, 1});
  CHECK(h.in_range_fraction == doctest::Approx(0.2));
  const auto all = inner_product_histogram(data, Eigen::VectorXd::Constant(1, 1.0), 4.0);
  CHECK(all.in_range_fraction == 1.0);
  std::uint64_t total = all.below + all.above;
  for (auto c : all.counts) total += c;
  CHECK(total == 5);
}
