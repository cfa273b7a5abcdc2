#pragma once

// Synthetic GLM data: covariates uniform in the unit ball, outcomes drawn
// from the model at a known parameter.

#include <cstdint>
#include <filesystem>
#include <random>

#include <Eigen/Dense>

#include "passglm/glm_mappings.hpp"
#include "passglm/records.hpp"

namespace passglm {

struct SynthConfig {
  Model model = Model::kLogit;
  std::size_t dim = 2;
  std::size_t count = 1000;
  std::uint64_t seed = 1;
  Eigen::VectorXd theta_true;  // empty means zero
  double scale = 1.0;          // noise scale (shuber, cauchy) or gamma shape
};

/// Generates records lazily so arbitrarily long streams use O(d) memory.
class SyntheticStream final : public RecordStream {
 public:
  explicit SyntheticStream(SynthConfig config);

  bool next(Record& out) override;
  void reset() override;
  std::size_t dim() const override { return config_.dim; }
  const SynthConfig& config() const { return config_; }

 private:
  double draw_outcome(double s);

  SynthConfig config_;
  std::mt19937_64 rng_;
  std::size_t emitted_ = 0;
  Eigen::VectorXd buf_;
};

/// Outcome conventions: logit +-1, probit 0/1, poisson counts,
/// gamma positive with mean exp(s), shuber/cauchy y = s + noise.
Dataset synthesize(const SynthConfig& config);

/// Writes `<stem>.libsvm` and `<stem>.json` (manifest with theta_true).
void write_synthetic(const SynthConfig& config, const std::filesystem::path& libsvm_path,
                     const std::filesystem::path& manifest_path);

}  // namespace passglm
