#pragma once

// Reference inference methods: exact-likelihood MAP + Laplace, adaptive
// MALA with split-R-hat, and SGD point estimation.

#include <cstdint>
#include <functional>
#include <optional>
#include <vector>

#include <Eigen/Dense>

#include "passglm/glm_mappings.hpp"
#include "passglm/posterior.hpp"
#include "passglm/records.hpp"

namespace passglm {

struct LaplaceResult {
  GaussianPosterior posterior;  // mean is the exact MAP
  double log_posterior = 0.0;
  double grad_norm = 0.0;
  int iterations = 0;
};

/// Newton to the exact MAP (gradient tolerance 1e-8) and a Gaussian with the
/// inverse Hessian of the negative log-posterior as covariance.
LaplaceResult laplace(const MappingSpec& spec, const PriorSpec& prior, const Dataset& data,
                      const NewtonOptions& opts = {});

/// Unnormalized log density with optional gradient output.
using LogDensity = std::function<double(const Eigen::VectorXd&, Eigen::VectorXd*)>;

struct MalaConfig {
  double step_size = 1.0;        // initial h (preconditioned units)
  double target_accept = 0.574;
  int chains = 3;
  int iterations = 20000;
  double burn_in_fraction = 0.5;
  std::uint64_t seed = 1;
  double init_jitter = 0.1;      // sd of per-chain starting perturbation
  bool parallel = true;
};

struct ChainOutput {
  std::vector<Eigen::MatrixXd> draws;  // one (kept iterations x d) matrix per chain
  std::vector<double> acceptance;      // post burn-in acceptance rate per chain
  std::vector<double> step_size;       // frozen h per chain
  Eigen::VectorXd rhat;                // per coordinate

  std::size_t total_draws() const;
  Eigen::VectorXd mean() const;
  Eigen::MatrixXd covariance() const;
};

/// Adaptive MALA on an arbitrary target. During burn-in h follows a
/// Robbins-Monro recursion toward the target acceptance and a diagonal
/// preconditioner is estimated in windows; both are frozen afterwards.
ChainOutput mala_sample(const LogDensity& target, const Eigen::VectorXd& init,
                        const MalaConfig& config);

/// MALA on the exact GLM posterior, chains started at the prior mean.
ChainOutput mala(const MappingSpec& spec, const PriorSpec& prior, const Dataset& data,
                 const MalaConfig& config,
                 const std::optional<Eigen::VectorXd>& init = std::nullopt);

/// Split, rank-normalized R-hat (max of bulk and folded) per coordinate.
/// Needs at least two chains' worth of split halves with >= 4 draws each.
Eigen::VectorXd split_rhat(const std::vector<Eigen::MatrixXd>& chains);

struct SgdConfig {
  int epochs = 5;
  double eta0 = 1.0;
  std::uint64_t seed = 1;
};

/// Single-sample SGD on the log posterior scaled by 1/N, step size
/// eta0 / (1 + eta0 lambda t) with lambda the mean inverse prior variance
/// (0 for a flat prior). Records are visited in a seeded shuffle each epoch.
/// Throws ConvergenceError when the iterate norm exceeds 1e6.
Eigen::VectorXd sgd(const MappingSpec& spec, const PriorSpec& prior, const Dataset& data,
                    const SgdConfig& config);

}  // namespace passglm
