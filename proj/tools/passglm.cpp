// passglm command line: approx | stats build | stats merge | fit | baseline |
// eval | project | synth | bench

#include <chrono>
#include <cmath>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <thread>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>
#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include "passglm/baselines.hpp"
#include "passglm/errors.hpp"
#include "passglm/glm_mappings.hpp"
#include "passglm/metrics.hpp"
#include "passglm/poly_approx.hpp"
#include "passglm/posterior.hpp"
#include "passglm/projection.hpp"
#include "passglm/sharding.hpp"
#include "passglm/suff_stats.hpp"
#include "passglm/synth.hpp"

using json = nlohmann::json;
using namespace passglm;

namespace {

constexpr int kSchemaVersion = 1;

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::vector<double> to_vec(const Eigen::VectorXd& v) { return {v.data(), v.data() + v.size()}; }

std::vector<double> row_major(const Eigen::MatrixXd& m) {
  std::vector<double> out;
  out.reserve(m.size());
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    for (Eigen::Index j = 0; j < m.cols(); ++j) out.push_back(m(i, j));
  }
  return out;
}

Eigen::VectorXd from_vec(const json& j) {
  const auto v = j.get<std::vector<double>>();
  return Eigen::Map<const Eigen::VectorXd>(v.data(), static_cast<Eigen::Index>(v.size()));
}

Eigen::MatrixXd from_row_major(const json& j, Eigen::Index d) {
  const auto v = j.get<std::vector<double>>();
  if (static_cast<Eigen::Index>(v.size()) != d * d) throw FormatError("matrix has the wrong size");
  Eigen::MatrixXd m(d, d);
  for (Eigen::Index i = 0; i < d; ++i) {
    for (Eigen::Index k = 0; k < d; ++k) m(i, k) = v[i * d + k];
  }
  return m;
}

Eigen::VectorXd parse_list(const std::string& text) {
  std::vector<double> vals;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      std::size_t used = 0;
      vals.push_back(std::stod(item, &used));
      if (used != item.size()) throw std::invalid_argument(item);
    } catch (const std::exception&) {
      throw InvalidArgument("cannot parse number '" + item + "'");
    }
  }
  return Eigen::Map<Eigen::VectorXd>(vals.data(), static_cast<Eigen::Index>(vals.size()));
}

PriorSpec parse_prior(const std::string& text, std::size_t d) {
  if (text == "flat") return PriorSpec::flat(d);
  const std::string tag = "gaussian:";
  if (text.rfind(tag, 0) == 0) {
    const double var = std::stod(text.substr(tag.size()));
    return PriorSpec::gaussian(d, var);
  }
  throw InvalidArgument("prior must be 'flat' or 'gaussian:<variance>'");
}

void emit(const json& j, const std::string& path) {
  if (path.empty() || path == "-") {
    std::cout << j.dump(2) << '\n';
    return;
  }
  std::ofstream out(path);
  if (!out) throw InvalidArgument("cannot write " + path);
  out << j.dump(2) << '\n';
}

json read_json(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InvalidArgument("cannot read " + path);
  try {
    return json::parse(in);
  } catch (const json::exception& e) {
    throw FormatError(path + ": " + e.what());
  }
}

json gaussian_json(const GaussianPosterior& post) {
  return {{"schema_version", kSchemaVersion},
          {"kind", "gaussian"},
          {"d", post.dim()},
          {"mean", to_vec(post.mean())},
          {"chol_lower", row_major(post.chol())},
          {"logdet", post.logdet()}};
}

// Mean plus optional covariance from any posterior-like JSON document.
struct LoadedEstimate {
  Eigen::VectorXd mean;
  std::optional<Eigen::MatrixXd> cov;
};

LoadedEstimate load_estimate(const json& j) {
  const std::string kind = j.at("kind").get<std::string>();
  if (kind == "gaussian") {
    LoadedEstimate e{from_vec(j.at("mean")), std::nullopt};
    const Eigen::MatrixXd l = from_row_major(j.at("chol_lower"), e.mean.size());
    e.cov = l * l.transpose();
    return e;
  }
  if (kind == "surrogate") return load_estimate(j.at("laplace"));
  if (kind == "samples") {
    LoadedEstimate e{from_vec(j.at("mean")), std::nullopt};
    e.cov = from_row_major(j.at("covariance"), e.mean.size());
    return e;
  }
  if (kind == "point") return {from_vec(j.at("theta")), std::nullopt};
  throw FormatError("unknown posterior kind '" + kind + "'");
}

MappingSpec make_mapping(const std::string& model, double bscale) {
  return mapping_for(parse_model(model), bscale);
}

bool is_affine(const MappingTerm& t) {
  for (double s : {-2.0, -0.5, 0.7, 1.9}) {
    if (t.phi.d2f(s) != 0.0) return false;
  }
  return true;
}

json approx_json(const PolyApprox& p) {
  return {{"M", p.degree}, {"R", p.radius}, {"b", p.b}, {"c", p.c}, {"sup_err_est", p.sup_err_est}};
}

json bound_json(const BoundReport& b) {
  return {{"r", b.r}, {"C", b.C}, {"sup_bound", b.sup_bound}, {"deriv_bound", b.deriv_bound}};
}

ParseOptions parse_options_for(const MappingSpec& spec, std::size_t dim, bool lenient) {
  ParseOptions opts;
  opts.labels = spec.labels();
  opts.strict = !lenient;
  opts.dim = dim;
  return opts;
}

// ---- subcommands ----

struct Globals {
  std::optional<std::size_t> threads;
  std::uint64_t seed = 1;
  std::string log_level = "info";

  std::size_t thread_count() const { return threads ? *threads : default_thread_count(); }
};

struct ApproxArgs {
  std::string model = "logit";
  int degree = 2;
  double radius = 4.0;
  double bscale = 1.0;
  std::string out;
};

void run_approx(const ApproxArgs& a) {
  const MappingSpec spec = make_mapping(a.model, a.bscale);
  const auto fits = fit_terms(spec, a.degree, a.radius);
  std::size_t primary = 0;
  for (std::size_t i = 0; i < spec.terms().size(); ++i) {
    if (!is_affine(spec.terms()[i])) {
      primary = i;
      break;
    }
  }
  json j = approx_json(fits[primary]);
  j["schema_version"] = kSchemaVersion;
  j["model"] = spec.name();
  switch (spec.model()) {
    case Model::kLogit: j["bound"] = bound_json(sup_bound_logit(a.radius, a.degree)); break;
    case Model::kPoisson: j["bound"] = bound_json(sup_bound_exp(a.radius, a.degree)); break;
    case Model::kSmoothedHuber:
      j["bound"] = bound_json(sup_bound_shuber(a.radius, a.degree, a.bscale));
      break;
    default: j["bound"] = nullptr; break;
  }
  if (fits.size() > 1) {
    j["terms"] = json::array();
    for (const auto& f : fits) j["terms"].push_back(approx_json(f));
  }
  emit(j, a.out);
}

struct StatsBuildArgs {
  std::vector<std::string> data;
  std::string model = "logit";
  int degree = 2;
  double radius = 4.0;
  double bscale = 1.0;
  std::size_t dim = 0;
  bool lenient = false;
  double rescale = 1.0;
  std::string out;
};

void run_stats_build(const StatsBuildArgs& a, const Globals& g) {
  const MappingSpec spec = make_mapping(a.model, a.bscale);
  const auto t0 = Clock::now();
  std::size_t dim = a.dim;
  if (dim == 0) {
    for (const auto& f : a.data) {
      LibsvmStream probe(f, parse_options_for(spec, 0, a.lenient));
      dim = std::max(dim, probe.dim());
    }
  }
  const SuffStats prototype(spec, dim, a.degree, a.radius, kDefaultIndexCap);
  std::size_t passes = 0;
  std::optional<SuffStats> stats;
  if (a.data.size() == 1) {
    auto file = std::make_unique<LibsvmStream>(a.data[0], parse_options_for(spec, dim, a.lenient));
    LibsvmStream* raw_file = file.get();
    ScaledStream stream(std::move(file), a.rescale);
    stats = run_sharded(stream, std::min<std::size_t>(g.thread_count(), 64), prototype);
    passes = raw_file->passes();
    if (raw_file->skipped_lines() > 0) spdlog::warn("skipped {} malformed lines", raw_file->skipped_lines());
  } else {
    if (a.rescale != 1.0) throw InvalidArgument("--rescale applies to a single input file");
    std::vector<std::filesystem::path> files(a.data.begin(), a.data.end());
    stats = run_sharded(files, std::min(g.thread_count(), files.size()), prototype,
                        parse_options_for(spec, dim, a.lenient));
    passes = 1;
  }
  write_stats_file(*stats, a.out);
  const double secs = seconds_since(t0);
  emit({{"schema_version", kSchemaVersion},
        {"out", a.out},
        {"model", spec.name()},
        {"d", dim},
        {"M", a.degree},
        {"R", a.radius},
        {"n", stats->count()},
        {"entries", stats->size()},
        {"passes", passes},
        {"max_covariate_norm", stats->max_covariate_norm()},
        {"seconds", secs},
        {"records_per_second", secs > 0 ? stats->count() / secs : 0.0}},
       "");
}

struct StatsMergeArgs {
  std::vector<std::string> inputs;
  std::string out;
  double bscale = 1.0;
};

void run_stats_merge(const StatsMergeArgs& a) {
  SuffStats acc = read_stats_file(a.inputs.at(0), a.bscale);
  for (std::size_t i = 1; i < a.inputs.size(); ++i) {
    try {
      acc.merge(read_stats_file(a.inputs[i], a.bscale));
    } catch (const MismatchError& e) {
      throw MismatchError(a.inputs[i] + ": " + e.what());
    }
  }
  write_stats_file(acc, a.out);
  emit({{"schema_version", kSchemaVersion},
        {"out", a.out},
        {"inputs", a.inputs.size()},
        {"n", acc.count()},
        {"entries", acc.size()}},
       "");
}

struct FitArgs {
  std::vector<std::string> stats;
  std::optional<std::string> model;
  std::optional<int> degree;
  std::optional<double> radius;
  double bscale = 1.0;
  std::string prior = "gaussian:4";
  double domain_radius = std::numeric_limits<double>::infinity();
  std::string out;
};

void run_fit(const FitArgs& a) {
  SuffStats stats = read_stats_file(a.stats.at(0), a.bscale);
  for (std::size_t i = 1; i < a.stats.size(); ++i) stats.merge(read_stats_file(a.stats[i], a.bscale));
  const StatsConfig& c = stats.config();
  if (a.model && parse_model(*a.model) != c.model) {
    throw MismatchError("statistics were built for model '" + std::string(model_name(c.model)) + "'");
  }
  if (a.radius && *a.radius != c.radius) throw MismatchError("statistics were built with a different radius");
  const int degree = a.degree.value_or(c.degree);
  const PriorSpec prior = parse_prior(a.prior, c.dim);

  const auto t0 = Clock::now();
  json j;
  if (stats.raw()) {
    const PolyApprox approx = fit_chebyshev(phi_logit, degree, c.radius);
    if (degree == 2) {
      j = gaussian_json(posterior_lr2(stats, approx, prior));
    } else {
      const SurrogatePosterior sp = posterior_general(stats, approx, prior, a.domain_radius);
      j = {{"schema_version", kSchemaVersion}, {"kind", "surrogate"}, {"d", c.dim},
           {"degree", degree}, {"coefficients", sp.surrogate.coefficients()},
           {"map", to_vec(sp.map)}, {"laplace", gaussian_json(sp.laplace)},
           {"log_posterior_at_map", sp.log_posterior_at_map}, {"iterations", sp.iterations}};
    }
  } else {
    if (degree != c.degree) throw MismatchError("general-form statistics fix the degree");
    const SurrogatePosterior sp = posterior_general(stats, prior, a.domain_radius);
    j = {{"schema_version", kSchemaVersion}, {"kind", "surrogate"}, {"d", c.dim},
         {"degree", degree}, {"coefficients", sp.surrogate.coefficients()},
         {"map", to_vec(sp.map)}, {"laplace", gaussian_json(sp.laplace)},
         {"log_posterior_at_map", sp.log_posterior_at_map}, {"iterations", sp.iterations}};
  }
  j["model"] = std::string(model_name(c.model));
  j["n"] = stats.count();
  j["seconds"] = seconds_since(t0);
  emit(j, a.out);
}

struct BaselineArgs {
  std::string method = "laplace";
  std::string data;
  std::string model = "logit";
  double bscale = 1.0;
  std::string prior = "gaussian:4";
  int iters = 20000;
  int chains = 3;
  int epochs = 5;
  double eta0 = 1.0;
  std::string draws;
  std::string out;
};

void run_baseline(const BaselineArgs& a, const Globals& g) {
  const MappingSpec spec = make_mapping(a.model, a.bscale);
  const Dataset data = read_libsvm(a.data, parse_options_for(spec, 0, false));
  const PriorSpec prior = parse_prior(a.prior, data.dim);
  const auto t0 = Clock::now();
  json j;
  if (a.method == "laplace") {
    const LaplaceResult r = laplace(spec, prior, data);
    j = gaussian_json(r.posterior);
    j["iterations"] = r.iterations;
    j["grad_norm"] = r.grad_norm;
  } else if (a.method == "mala") {
    MalaConfig cfg;
    cfg.chains = a.chains;
    cfg.iterations = a.iters;
    cfg.seed = g.seed;
    const ChainOutput out = mala(spec, prior, data, cfg);
    j = {{"schema_version", kSchemaVersion}, {"kind", "samples"}, {"d", data.dim},
         {"mean", to_vec(out.mean())}, {"covariance", row_major(out.covariance())},
         {"rhat", to_vec(out.rhat)}, {"acceptance", out.acceptance},
         {"step_size", out.step_size}, {"draws", out.total_draws()}};
    if (out.rhat.size() > 0 && out.rhat.maxCoeff() >= 1.1) {
      spdlog::warn("max R-hat {:.3f} >= 1.1; chains have not mixed", out.rhat.maxCoeff());
    }
    if (!a.draws.empty()) {
      std::ofstream f(a.draws);
      if (!f) throw InvalidArgument("cannot write " + a.draws);
      f.precision(17);
      f << "chain,iter";
      for (std::size_t k = 0; k < data.dim; ++k) f << ",theta" << k;
      f << '\n';
      for (std::size_t c = 0; c < out.draws.size(); ++c) {
        for (Eigen::Index i = 0; i < out.draws[c].rows(); ++i) {
          f << c << ',' << i;
          for (Eigen::Index k = 0; k < out.draws[c].cols(); ++k) f << ',' << out.draws[c](i, k);
          f << '\n';
        }
      }
      j["draws_file"] = a.draws;
    }
  } else if (a.method == "sgd") {
    SgdConfig cfg{a.epochs, a.eta0, g.seed};
    j = {{"schema_version", kSchemaVersion}, {"kind", "point"}, {"d", data.dim},
         {"theta", to_vec(sgd(spec, prior, data, cfg))}, {"epochs", a.epochs}, {"eta0", a.eta0}};
  } else {
    throw InvalidArgument("unknown baseline method '" + a.method + "'");
  }
  j["method"] = a.method;
  j["model"] = spec.name();
  j["seconds"] = seconds_since(t0);
  emit(j, a.out);
}

struct EvalArgs {
  std::string posterior;
  std::string reference;
  std::string test;
  std::string model = "logit";
  double bscale = 1.0;
  double radius = 4.0;
  int bins = 40;
  std::string out;
};

void run_eval(const EvalArgs& a) {
  const LoadedEstimate est = load_estimate(read_json(a.posterior));
  json j = {{"schema_version", kSchemaVersion}, {"posterior", a.posterior}};
  if (!a.reference.empty()) {
    const LoadedEstimate ref = load_estimate(read_json(a.reference));
    if (ref.mean.size() != est.mean.size()) throw MismatchError("posterior dimensions differ");
    j["reference"] = a.reference;
    if (est.cov && ref.cov) {
      const EvalReport r = compare_posteriors({est.mean, *est.cov}, {ref.mean, *ref.cov});
      j["mean_err"] = *r.mean_err;
      j["var_err"] = *r.var_err;
      j["w2"] = *r.w2;
    } else {
      j["mean_err"] = (est.mean - ref.mean).cwiseAbs().mean();
    }
  }
  if (!a.test.empty()) {
    const MappingSpec spec = make_mapping(a.model, a.bscale);
    const Dataset test = read_libsvm(a.test, parse_options_for(spec, est.mean.size(), false));
    j["test"] = a.test;
    j["test_nll"] = test_nll(spec, est.mean, test);
    if (spec.labels() != LabelMode::kReal) {
      const auto [scores, labels] = score_dataset(test, est.mean);
      try {
        j["auc"] = roc_auc(scores, labels);
      } catch (const InvalidArgument& e) {
        spdlog::warn("{}", e.what());
        j["auc"] = nullptr;
      }
    }
    const InnerProductHistogram h = inner_product_histogram(test, est.mean, a.radius, a.bins);
    j["histogram"] = {{"edges", h.edges}, {"counts", h.counts}, {"below", h.below},
                      {"above", h.above}, {"radius", h.radius},
                      {"in_range_fraction", h.in_range_fraction}};
  }
  emit(j, a.out);
}

struct ProjectArgs {
  std::string input;
  std::string out;
  std::size_t input_dim = 0;
  std::size_t k = 0;
};

void run_project(const ProjectArgs& a, const Globals& g) {
  ParseOptions opts;
  opts.dim = a.input_dim;
  auto inner = std::make_unique<LibsvmStream>(a.input, opts);
  const ProjectionSpec spec(g.seed, inner->dim(), a.k);
  ProjectedStream stream(std::move(inner), spec);
  std::ofstream out(a.out);
  if (!out) throw InvalidArgument("cannot write " + a.out);
  Record r;
  std::size_t n = 0;
  while (stream.next(r)) {
    write_libsvm_record(out, r);
    ++n;
  }
  emit({{"schema_version", kSchemaVersion}, {"out", a.out}, {"seed", g.seed},
        {"input_dim", spec.input_dim}, {"output_dim", spec.output_dim},
        {"sparsity", spec.sparsity()}, {"n", n}},
       "");
}

struct SynthArgs {
  std::string model = "logit";
  std::size_t d = 2;
  std::size_t n = 1000;
  std::string theta;
  double scale = 1.0;
  std::string out = "synth";
};

void run_synth(const SynthArgs& a, const Globals& g) {
  SynthConfig cfg;
  cfg.model = parse_model(a.model);
  cfg.dim = a.d;
  cfg.count = a.n;
  cfg.seed = g.seed;
  cfg.scale = a.scale;
  if (!a.theta.empty()) cfg.theta_true = parse_list(a.theta);
  const std::string data = a.out + ".libsvm";
  const std::string manifest = a.out + ".json";
  write_synthetic(cfg, data, manifest);
  emit({{"schema_version", kSchemaVersion}, {"data", data}, {"manifest", manifest}, {"n", a.n}}, "");
}

struct BenchArgs {
  std::size_t n = 1000000;
  std::size_t d = 20;
  int degree = 2;
  double radius = 4.0;
  std::string out;
};

void run_bench(const BenchArgs& a, const Globals& g) {
  const MappingSpec spec = mapping_logit();
  const SuffStats prototype(spec, a.d, a.degree, a.radius, kDefaultIndexCap);
  Eigen::VectorXd theta = Eigen::VectorXd::Constant(a.d, 2.0 / std::sqrt(static_cast<double>(a.d)));
  std::vector<std::size_t> counts = {1};
  if (g.thread_count() > 1) counts.push_back(g.thread_count());
  json runs = json::array();
  double base = 0.0;
  for (std::size_t t : counts) {
    std::vector<std::unique_ptr<RecordStream>> streams;
    for (std::size_t s = 0; s < t; ++s) {
      SynthConfig cfg;
      cfg.dim = a.d;
      cfg.count = a.n / t + (s < a.n % t ? 1 : 0);
      cfg.seed = g.seed + 1000003 * s;
      cfg.theta_true = theta;
      streams.push_back(std::make_unique<SyntheticStream>(cfg));
    }
    const auto t0 = Clock::now();
    const SuffStats stats = run_sharded(streams, prototype);
    const double secs = seconds_since(t0);
    if (t == 1) base = secs;
    runs.push_back({{"threads", t}, {"seconds", secs}, {"records_per_second", stats.count() / secs},
                    {"speedup", base / secs}, {"memory_bytes", stats.memory_bytes()}});
  }
  emit({{"schema_version", kSchemaVersion}, {"n", a.n}, {"d", a.d}, {"M", a.degree},
        {"hardware_threads", std::thread::hardware_concurrency()}, {"runs", runs}},
       a.out);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"PASS-GLM: polynomial approximate sufficient statistics for GLMs"};
  app.require_subcommand(1);
  app.fallthrough();

  Globals g;
  app.add_option("--threads", g.threads, "worker threads")->envname("PASSGLM_THREADS")->check(CLI::PositiveNumber);
  app.add_option("--seed", g.seed, "random seed");
  app.add_option("--log-level", g.log_level, "trace|debug|info|warn|error|off")
      ->check(CLI::IsMember({"trace", "debug", "info", "warn", "error", "critical", "off"}));

  const std::vector<std::string> models = {"logit", "poisson-exp", "poisson", "shuber", "cauchy", "probit", "gamma"};

  ApproxArgs approx;
  auto* c_approx = app.add_subcommand("approx", "fit a Chebyshev approximation and report error bounds");
  c_approx->add_option("--model", approx.model)->check(CLI::IsMember(models));
  c_approx->add_option("--degree,-M", approx.degree)->check(CLI::Range(0, kMaxDegree));
  c_approx->add_option("--radius,-R", approx.radius)->check(CLI::PositiveNumber);
  c_approx->add_option("--bscale", approx.bscale)->check(CLI::PositiveNumber);
  c_approx->add_option("--out", approx.out);

  auto* c_stats = app.add_subcommand("stats", "build or merge sufficient statistics");
  c_stats->require_subcommand(1);
  StatsBuildArgs build;
  auto* c_build = c_stats->add_subcommand("build", "accumulate statistics in one pass");
  c_build->add_option("--data", build.data, "libsvm file(s)")->required()->check(CLI::ExistingFile);
  c_build->add_option("--model", build.model)->check(CLI::IsMember(models));
  c_build->add_option("--degree,-M", build.degree)->check(CLI::Range(0, kMaxDegree));
  c_build->add_option("--radius,-R", build.radius)->check(CLI::PositiveNumber);
  c_build->add_option("--bscale", build.bscale)->check(CLI::PositiveNumber);
  c_build->add_option("--dim", build.dim, "declared dimension (0 infers)");
  c_build->add_flag("--lenient", build.lenient, "skip malformed lines");
  c_build->add_option("--rescale", build.rescale, "divide covariates by this factor")->check(CLI::PositiveNumber);
  c_build->add_option("--out", build.out)->required();
  StatsMergeArgs merge_args;
  auto* c_merge = c_stats->add_subcommand("merge", "merge statistics files");
  c_merge->add_option("inputs", merge_args.inputs)->required()->check(CLI::ExistingFile);
  c_merge->add_option("--out", merge_args.out)->required();
  c_merge->add_option("--bscale", merge_args.bscale)->check(CLI::PositiveNumber);

  FitArgs fit;
  auto* c_fit = app.add_subcommand("fit", "approximate posterior from statistics");
  c_fit->add_option("--stats", fit.stats)->required()->check(CLI::ExistingFile);
  c_fit->add_option("--model", fit.model)->check(CLI::IsMember(models));
  c_fit->add_option("--degree,-M", fit.degree)->check(CLI::Range(0, kMaxDegree));
  c_fit->add_option("--radius,-R", fit.radius)->check(CLI::PositiveNumber);
  c_fit->add_option("--bscale", fit.bscale)->check(CLI::PositiveNumber);
  c_fit->add_option("--prior", fit.prior, "gaussian:<variance> or flat");
  c_fit->add_option("--domain-radius", fit.domain_radius)->check(CLI::PositiveNumber);
  c_fit->add_option("--out", fit.out);

  BaselineArgs base;
  auto* c_base = app.add_subcommand("baseline", "exact-likelihood reference methods");
  c_base->add_option("--method", base.method)->check(CLI::IsMember({"laplace", "mala", "sgd"}));
  c_base->add_option("--data", base.data)->required()->check(CLI::ExistingFile);
  c_base->add_option("--model", base.model)->check(CLI::IsMember(models));
  c_base->add_option("--bscale", base.bscale)->check(CLI::PositiveNumber);
  c_base->add_option("--prior", base.prior);
  c_base->add_option("--iters", base.iters)->check(CLI::PositiveNumber);
  c_base->add_option("--chains", base.chains)->check(CLI::PositiveNumber);
  c_base->add_option("--epochs", base.epochs)->check(CLI::PositiveNumber);
  c_base->add_option("--eta0", base.eta0)->check(CLI::PositiveNumber);
  c_base->add_option("--draws", base.draws, "CSV file for MALA draws");
  c_base->add_option("--out", base.out);

  EvalArgs ev;
  auto* c_eval = app.add_subcommand("eval", "compare posteriors and score test data");
  c_eval->add_option("--posterior", ev.posterior)->required()->check(CLI::ExistingFile);
  c_eval->add_option("--reference", ev.reference)->check(CLI::ExistingFile);
  c_eval->add_option("--test", ev.test)->check(CLI::ExistingFile);
  c_eval->add_option("--model", ev.model)->check(CLI::IsMember(models));
  c_eval->add_option("--bscale", ev.bscale)->check(CLI::PositiveNumber);
  c_eval->add_option("--radius,-R", ev.radius)->check(CLI::PositiveNumber);
  c_eval->add_option("--bins", ev.bins)->check(CLI::PositiveNumber);
  c_eval->add_option("--out", ev.out);

  ProjectArgs proj;
  auto* c_proj = app.add_subcommand("project", "sparse random projection of a libsvm file");
  c_proj->add_option("--input", proj.input)->required()->check(CLI::ExistingFile);
  c_proj->add_option("--out", proj.out)->required();
  c_proj->add_option("--input-dim", proj.input_dim, "D (0 infers)");
  c_proj->add_option("--k", proj.k, "output dimension")->required()->check(CLI::PositiveNumber);

  SynthArgs syn;
  auto* c_syn = app.add_subcommand("synth", "generate synthetic GLM data");
  c_syn->add_option("--model", syn.model)->check(CLI::IsMember(models));
  c_syn->add_option("--d", syn.d)->check(CLI::PositiveNumber);
  c_syn->add_option("--n", syn.n);
  c_syn->add_option("--theta", syn.theta, "comma separated theta_true");
  c_syn->add_option("--scale", syn.scale)->check(CLI::PositiveNumber);
  c_syn->add_option("--out", syn.out, "output stem");

  BenchArgs bench;
  auto* c_bench = app.add_subcommand("bench", "statistics throughput at 1 and --threads threads");
  c_bench->add_option("--n", bench.n)->check(CLI::PositiveNumber);
  c_bench->add_option("--d", bench.d)->check(CLI::PositiveNumber);
  c_bench->add_option("--degree,-M", bench.degree)->check(CLI::Range(0, kMaxDegree));
  c_bench->add_option("--radius,-R", bench.radius)->check(CLI::PositiveNumber);
  c_bench->add_option("--out", bench.out);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  }

  auto logger = spdlog::stderr_color_mt("passglm");
  spdlog::set_default_logger(logger);
  spdlog::set_level(spdlog::level::from_str(g.log_level));

  try {
    if (*c_approx) run_approx(approx);
    else if (*c_build) run_stats_build(build, g);
    else if (*c_merge) run_stats_merge(merge_args);
    else if (*c_fit) run_fit(fit);
    else if (*c_base) run_baseline(base, g);
    else if (*c_eval) run_eval(ev);
    else if (*c_proj) run_project(proj, g);
    else if (*c_syn) run_synth(syn, g);
    else if (*c_bench) run_bench(bench, g);
  } catch (const std::exception& e) {
    spdlog::error("{}", e.what());
    return 1;
  }
  return 0;
}
