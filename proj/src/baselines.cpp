#include "passglm/baselines.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <string>
#include <thread>

#include <Eigen/Cholesky>
#include <boost/math/distributions/normal.hpp>

#include "passglm/errors.hpp"

namespace passglm {

namespace {

struct ChainResult {
  Eigen::MatrixXd draws;
  double acceptance = 0.0;
  double step = 0.0;
};

ChainResult run_chain(const LogDensity& target, Eigen::VectorXd theta, const MalaConfig& cfg,
                      std::uint64_t seed) {
  const Eigen::Index d = theta.size();
  const int burn = static_cast<int>(std::floor(cfg.burn_in_fraction * cfg.iterations));
  const int kept = cfg.iterations - burn;
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal;
  std::uniform_real_distribution<double> unif;

  Eigen::VectorXd grad(d);
  double logp = target(theta, &grad);
  if (!std::isfinite(logp)) throw NumericError("log-posterior is not finite at MALA start");

  Eigen::VectorXd precond = Eigen::VectorXd::Ones(d);
  double log_h = std::log(cfg.step_size);

  // Preconditioner windows end at 25%, 50%, 75% of burn-in; the last quarter
  // tunes h alone.
  const std::array<int, 3> window_end = {burn / 4, burn / 2, 3 * burn / 4};
  int window = 0;
  int window_start = 0;
  Eigen::VectorXd w_mean = Eigen::VectorXd::Zero(d);
  Eigen::VectorXd w_m2 = Eigen::VectorXd::Zero(d);
  int w_count = 0;

  ChainResult out;
  out.draws.resize(kept, d);
  std::size_t accepted_after_burn = 0;

  Eigen::VectorXd prop(d), prop_grad(d), z(d);
  for (int it = 0; it < cfg.iterations; ++it) {
    const double h = std::exp(log_h);
    const Eigen::VectorXd sqrt_pre = precond.cwiseSqrt();
    for (Eigen::Index j = 0; j < d; ++j) z[j] = normal(rng);
    const Eigen::VectorXd fwd_mean =
        theta + 0.5 * h * h * precond.cwiseProduct(grad);
    prop = fwd_mean + h * sqrt_pre.cwiseProduct(z);
    const double logp_prop = target(prop, &prop_grad);

    double accept_prob = 0.0;
    if (std::isfinite(logp_prop) && prop_grad.allFinite()) {
      const Eigen::VectorXd back_mean =
          prop + 0.5 * h * h * precond.cwiseProduct(prop_grad);
      const double inv = 1.0 / (2.0 * h * h);
      const double log_q_fwd = -((prop - fwd_mean).array().square() / precond.array()).sum() * inv;
      const double log_q_back = -((theta - back_mean).array().square() / precond.array()).sum() * inv;
      const double log_alpha = logp_prop - logp + log_q_back - log_q_fwd;
      accept_prob = log_alpha >= 0.0 ? 1.0 : std::exp(log_alpha);
    }
    if (unif(rng) < accept_prob) {
      theta = prop;
      grad = prop_grad;
      logp = logp_prop;
      if (it >= burn) ++accepted_after_burn;
    }

    if (it < burn) {
      const double gain = std::pow(it + 1.0, -0.6);
      log_h += gain * (accept_prob - cfg.target_accept);
      log_h = std::clamp(log_h, -30.0, 5.0);
      if (window < 3) {
        ++w_count;
        const Eigen::VectorXd delta = theta - w_mean;
        w_mean += delta / w_count;
        w_m2 += delta.cwiseProduct(theta - w_mean);
        if (it + 1 == window_end[window]) {
          if (w_count >= 10) {
            Eigen::VectorXd var = w_m2 / (w_count - 1);
            // Keep the scale if the window did not move a coordinate.
            for (Eigen::Index j = 0; j < d; ++j) {
              if (var[j] > 0.0 && std::isfinite(var[j])) precond[j] = var[j];
            }
            // h was tuned for the old scale; restart near the MALA optimum.
            log_h = std::log(1.65 * std::pow(static_cast<double>(d), -1.0 / 6.0));
          }
          ++window;
          window_start = it + 1;
          w_mean.setZero();
          w_m2.setZero();
          w_count = 0;
        }
      }
    } else {
      out.draws.row(it - burn) = theta.transpose();
    }
  }
  (void)window_start;
  out.acceptance = kept > 0 ? static_cast<double>(accepted_after_burn) / kept : 0.0;
  out.step = std::exp(log_h);
  return out;
}

// Average ranks (1-based) with ties sharing their mean rank.
std::vector<double> average_ranks(const std::vector<double>& v) {
  std::vector<std::size_t> order(v.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return v[a] < v[b]; });
  std::vector<double> rank(v.size());
  for (std::size_t i = 0; i < order.size();) {
    std::size_t j = i;
    while (j + 1 < order.size() && v[order[j + 1]] == v[order[i]]) ++j;
    const double r = 0.5 * (static_cast<double>(i) + static_cast<double>(j)) + 1.0;
    for (std::size_t k = i; k <= j; ++k) rank[order[k]] = r;
    i = j + 1;
  }
  return rank;
}

double basic_rhat(const std::vector<std::vector<double>>& chains) {
  const std::size_t m = chains.size();
  const std::size_t n = chains.front().size();
  std::vector<double> means(m), vars(m);
  for (std::size_t c = 0; c < m; ++c) {
    const auto& x = chains[c];
    means[c] = std::accumulate(x.begin(), x.end(), 0.0) / n;
    double ss = 0.0;
    for (double v : x) ss += (v - means[c]) * (v - means[c]);
    vars[c] = ss / (n - 1);
  }
  const double grand = std::accumulate(means.begin(), means.end(), 0.0) / m;
  double b = 0.0;
  for (double mu : means) b += (mu - grand) * (mu - grand);
  b *= static_cast<double>(n) / (m - 1);
  const double w = std::accumulate(vars.begin(), vars.end(), 0.0) / m;
  if (w <= 0.0) return std::numeric_limits<double>::quiet_NaN();
  const double var_plus = (n - 1.0) / n * w + b / n;
  return std::sqrt(var_plus / w);
}

double rank_normalized_rhat(const std::vector<std::vector<double>>& split) {
  std::vector<double> pooled;
  for (const auto& c : split) pooled.insert(pooled.end(), c.begin(), c.end());
  const std::vector<double> rank = average_ranks(pooled);
  const double s = static_cast<double>(pooled.size());
  const boost::math::normal_distribution<double> std_normal;
  std::vector<std::vector<double>> z(split.size());
  std::size_t k = 0;
  for (std::size_t c = 0; c < split.size(); ++c) {
    z[c].resize(split[c].size());
    for (double& v : z[c]) v = boost::math::quantile(std_normal, (rank[k++] - 0.375) / (s + 0.25));
  }
  return basic_rhat(z);
}

}  // namespace

LaplaceResult laplace(const MappingSpec& spec, const PriorSpec& prior, const Dataset& data,
                      const NewtonOptions& opts) {
  if (prior.dim() != data.dim) throw InvalidArgument("prior dimension does not match data");
  const Eigen::VectorXd pp = prior.precision_diag();
  auto objective = [&](const Eigen::VectorXd& th) {
    return log_likelihood(spec, th, data) + prior.log_density(th);
  };

  Eigen::VectorXd theta = prior.is_flat() ? Eigen::VectorXd::Zero(data.dim) : prior.mean;
  double f = objective(theta);
  LaplaceResult out;
  for (int it = 0;; ++it) {
    const Eigen::VectorXd g = log_likelihood_grad(spec, theta, data) + prior.grad(theta);
    Eigen::MatrixXd neg_h = -log_likelihood_hessian(spec, theta, data);
    neg_h.diagonal() += pp;
    out.iterations = it;
    out.grad_norm = g.norm();
    if (out.grad_norm <= opts.grad_tol) {
      out.posterior = GaussianPosterior::from_precision(theta, neg_h);
      out.log_posterior = f;
      return out;
    }
    if (it >= opts.max_iter) {
      throw ConvergenceError("Laplace Newton did not converge in " + std::to_string(opts.max_iter) +
                             " iterations (|grad| = " + std::to_string(out.grad_norm) + ")");
    }
    Eigen::LLT<Eigen::MatrixXd> llt(neg_h);
    Eigen::VectorXd step;
    if (llt.info() == Eigen::Success) {
      step = llt.solve(g);
    } else {
      // Outside the concave region: fall back to gradient ascent.
      step = g / std::max(1.0, neg_h.diagonal().cwiseAbs().maxCoeff());
    }
    if (llt.info() == Eigen::Success && g.dot(step) <= 1e-12 * std::max(1.0, std::abs(f))) {
      // Predicted gain is below the rounding level of f: take the full step.
      theta += step;
      f = objective(theta);
      continue;
    }
    double t = 1.0;
    bool moved = false;
    while (t > 1e-14) {
      const Eigen::VectorXd next = theta + t * step;
      double fn;
      try {
        fn = objective(next);
      } catch (const NumericError&) {
        fn = -std::numeric_limits<double>::infinity();
      }
      if (std::isfinite(fn) && fn >= f + opts.armijo * t * g.dot(step)) {
        theta = next;
        f = fn;
        moved = true;
        break;
      }
      t *= 0.5;
    }
    if (!moved) {
      // No representable ascent left: accept if the Hessian is usable.
      if (llt.info() != Eigen::Success) throw NumericError("singular Hessian at the exact MAP");
      if (out.grad_norm <= 1e3 * opts.grad_tol * std::max(1.0, std::abs(f))) {
        out.posterior = GaussianPosterior::from_precision(theta, neg_h);
        out.log_posterior = f;
        return out;
      }
      throw ConvergenceError("Laplace line search failed (|grad| = " +
                             std::to_string(out.grad_norm) + ")");
    }
  }
}

std::size_t ChainOutput::total_draws() const {
  std::size_t n = 0;
  for (const auto& c : draws) n += static_cast<std::size_t>(c.rows());
  return n;
}

Eigen::VectorXd ChainOutput::mean() const {
  Eigen::VectorXd acc = Eigen::VectorXd::Zero(draws.front().cols());
  for (const auto& c : draws) acc += c.colwise().sum().transpose();
  return acc / static_cast<double>(total_draws());
}

Eigen::MatrixXd ChainOutput::covariance() const {
  const Eigen::VectorXd mu = mean();
  const Eigen::Index d = mu.size();
  Eigen::MatrixXd acc = Eigen::MatrixXd::Zero(d, d);
  for (const auto& c : draws) {
    const Eigen::MatrixXd centered = c.rowwise() - mu.transpose();
    acc += centered.transpose() * centered;
  }
  return acc / static_cast<double>(total_draws() - 1);
}

ChainOutput mala_sample(const LogDensity& target, const Eigen::VectorXd& init,
                        const MalaConfig& config) {
  if (!(config.target_accept > 0.0 && config.target_accept < 1.0)) {
    throw InvalidArgument("target acceptance must lie in (0, 1)");
  }
  if (config.chains < 1 || config.iterations < 1) throw InvalidArgument("need at least one chain and iteration");
  if (!(config.burn_in_fraction >= 0.0 && config.burn_in_fraction < 1.0)) {
    throw InvalidArgument("burn-in fraction must lie in [0, 1)");
  }

  std::vector<ChainResult> results(config.chains);
  std::vector<Eigen::VectorXd> starts;
  std::mt19937_64 init_rng(config.seed);
  std::normal_distribution<double> normal;
  for (int c = 0; c < config.chains; ++c) {
    Eigen::VectorXd s = init;
    for (Eigen::Index j = 0; j < s.size(); ++j) s[j] += config.init_jitter * normal(init_rng);
    starts.push_back(std::move(s));
  }

  auto run = [&](int c) {
    results[c] = run_chain(target, starts[c], config, config.seed * 7919 + 104729 * (c + 1));
  };
  if (config.parallel && config.chains > 1) {
    std::vector<std::thread> workers;
    std::vector<std::exception_ptr> errors(config.chains);
    for (int c = 0; c < config.chains; ++c) {
      workers.emplace_back([&, c] {
        try {
          run(c);
        } catch (...) {
          errors[c] = std::current_exception();
        }
      });
    }
    for (auto& w : workers) w.join();
    for (auto& e : errors) {
      if (e) std::rethrow_exception(e);
    }
  } else {
    for (int c = 0; c < config.chains; ++c) run(c);
  }

  ChainOutput out;
  for (auto& r : results) {
    out.draws.push_back(std::move(r.draws));
    out.acceptance.push_back(r.acceptance);
    out.step_size.push_back(r.step);
  }
  if (config.chains >= 2 && out.draws.front().rows() >= 8) out.rhat = split_rhat(out.draws);
  return out;
}

ChainOutput mala(const MappingSpec& spec, const PriorSpec& prior, const Dataset& data,
                 const MalaConfig& config, const std::optional<Eigen::VectorXd>& init) {
  if (prior.dim() != data.dim) throw InvalidArgument("prior dimension does not match data");
  LogDensity target = [&](const Eigen::VectorXd& th, Eigen::VectorXd* g) {
    double acc = prior.log_density(th);
    if (g) *g = prior.grad(th);
    for (const Record& r : data.records) {
      const double s = r.x.dot(th);
      acc += spec.record_loglik(r.y, s);
      if (g) {
        const double w = spec.record_dloglik(r.y, s);
        for (std::size_t i = 0; i < r.x.nnz(); ++i) (*g)[r.x.index[i]] += w * r.x.value[i];
      }
    }
    return acc;
  };
  const Eigen::VectorXd start =
      init ? *init : (prior.is_flat() ? Eigen::VectorXd::Zero(data.dim) : prior.mean);
  return mala_sample(target, start, config);
}

Eigen::VectorXd split_rhat(const std::vector<Eigen::MatrixXd>& chains) {
  if (chains.empty()) throw InvalidArgument("R-hat needs chains");
  const Eigen::Index n = chains.front().rows();
  const Eigen::Index half = n / 2;
  if (half < 4) throw InvalidArgument("R-hat needs at least 8 draws per chain");
  const Eigen::Index d = chains.front().cols();
  Eigen::VectorXd out(d);
  for (Eigen::Index j = 0; j < d; ++j) {
    std::vector<std::vector<double>> split;
    for (const auto& c : chains) {
      if (c.rows() != n) throw InvalidArgument("chains must have equal length");
      // drop the middle draw for odd n
      split.emplace_back(c.col(j).data(), c.col(j).data() + half);
      split.emplace_back(c.col(j).data() + (n - half), c.col(j).data() + n);
    }
    const double bulk = rank_normalized_rhat(split);
    std::vector<double> pooled;
    for (const auto& s : split) pooled.insert(pooled.end(), s.begin(), s.end());
    std::nth_element(pooled.begin(), pooled.begin() + pooled.size() / 2, pooled.end());
    const double median = pooled[pooled.size() / 2];
    for (auto& s : split) {
      for (double& v : s) v = std::abs(v - median);
    }
    const double folded = rank_normalized_rhat(split);
    out[j] = std::max(bulk, folded);
  }
  return out;
}

Eigen::VectorXd sgd(const MappingSpec& spec, const PriorSpec& prior, const Dataset& data,
                    const SgdConfig& config) {
  if (config.epochs < 1) throw InvalidArgument("SGD needs at least one epoch");
  if (!(config.eta0 > 0.0)) throw InvalidArgument("eta0 must be positive");
  if (data.size() == 0) throw InvalidArgument("SGD needs data");
  const std::size_t n = data.size();
  const Eigen::VectorXd pp = prior.precision_diag();
  const double lambda = prior.is_flat() ? 0.0 : pp.mean();

  Eigen::VectorXd theta = prior.is_flat() ? Eigen::VectorXd::Zero(data.dim) : prior.mean;
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::mt19937_64 rng(config.seed);
  std::uint64_t t = 0;
  for (int e = 0; e < config.epochs; ++e) {
    std::shuffle(order.begin(), order.end(), rng);
    for (std::size_t idx : order) {
      const Record& r = data.records[idx];
      const double eta = config.eta0 / (1.0 + config.eta0 * lambda * static_cast<double>(t));
      const double w = spec.record_dloglik(r.y, r.x.dot(theta));
      if (!prior.is_flat()) {
        theta -= eta * ((theta - prior.mean).cwiseProduct(pp) / static_cast<double>(n));
      }
      for (std::size_t i = 0; i < r.x.nnz(); ++i) theta[r.x.index[i]] += eta * w * r.x.value[i];
      ++t;
      if (!(theta.norm() <= 1e6)) {
        throw ConvergenceError("SGD diverged (|theta| > 1e6) at step " + std::to_string(t) +
                               "; use a smaller eta0");
      }
    }
  }
  return theta;
}

}  // namespace passglm
