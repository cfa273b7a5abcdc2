#include "passglm/synth.hpp"

#include <cmath>
#include <fstream>

#include <nlohmann/json.hpp>

#include "passglm/errors.hpp"

namespace passglm {

SyntheticStream::SyntheticStream(SynthConfig config)
    : config_(std::move(config)), rng_(config_.seed), buf_(config_.dim) {
  if (config_.dim == 0) throw InvalidArgument("dimension must be positive");
  if (config_.theta_true.size() == 0) config_.theta_true = Eigen::VectorXd::Zero(config_.dim);
  if (static_cast<std::size_t>(config_.theta_true.size()) != config_.dim) {
    throw InvalidArgument("theta_true has the wrong dimension");
  }
  if (config_.model == Model::kCustom) throw InvalidArgument("cannot synthesize a custom model");
  if (!(config_.scale > 0.0)) throw InvalidArgument("scale must be positive");
}

void SyntheticStream::reset() {
  rng_.seed(config_.seed);
  emitted_ = 0;
  note_reset();
}

double SyntheticStream::draw_outcome(double s) {
  std::uniform_real_distribution<double> unif;
  switch (config_.model) {
    case Model::kLogit:
      return unif(rng_) < sigmoid(s) ? 1.0 : -1.0;
    case Model::kProbit:
      return unif(rng_) < 0.5 * std::erfc(-s / std::sqrt(2.0)) ? 1.0 : 0.0;
    case Model::kPoisson:
      return static_cast<double>(std::poisson_distribution<long>(std::exp(s))(rng_));
    case Model::kGamma: {
      const double nu = config_.scale;
      double y = 0.0;
      while (!(y > 0.0)) y = std::gamma_distribution<double>(nu, std::exp(s) / nu)(rng_);
      return y;
    }
    case Model::kSmoothedHuber:
      return s + std::normal_distribution<double>(0.0, config_.scale)(rng_);
    case Model::kCauchy:
      return s + std::cauchy_distribution<double>(0.0, config_.scale)(rng_);
    case Model::kCustom:
      break;
  }
  throw InvalidArgument("unsupported model");
}

bool SyntheticStream::next(Record& out) {
  if (emitted_ >= config_.count) return false;
  std::normal_distribution<double> normal;
  std::uniform_real_distribution<double> unif;
  double sq = 0.0;
  do {
    for (Eigen::Index j = 0; j < buf_.size(); ++j) buf_[j] = normal(rng_);
    sq = buf_.squaredNorm();
  } while (sq == 0.0);
  const double radius = std::pow(unif(rng_), 1.0 / static_cast<double>(config_.dim));
  buf_ *= radius / std::sqrt(sq);
  out.x = SparseVector::from_dense(buf_);
  out.y = draw_outcome(buf_.dot(config_.theta_true));
  ++emitted_;
  note_read();
  return true;
}

Dataset synthesize(const SynthConfig& config) {
  SyntheticStream stream(config);
  return collect(stream);
}

void write_synthetic(const SynthConfig& config, const std::filesystem::path& libsvm_path,
                     const std::filesystem::path& manifest_path) {
  SyntheticStream stream(config);
  const Dataset data = collect(stream);
  write_libsvm(data, libsvm_path);
  const Eigen::VectorXd& theta = stream.config().theta_true;
  nlohmann::json manifest = {
      {"schema_version", 1},
      {"model", std::string(model_name(config.model))},
      {"d", config.dim},
      {"n", config.count},
      {"seed", config.seed},
      {"scale", config.scale},
      {"theta_true", std::vector<double>(theta.data(), theta.data() + theta.size())},
      {"data", libsvm_path.filename().string()},
  };
  std::ofstream out(manifest_path);
  if (!out) throw InvalidArgument("cannot write " + manifest_path.string());
  out << manifest.dump(2) << '\n';
}

}  // namespace passglm
