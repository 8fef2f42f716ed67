#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "avlr/baselines.hpp"
#include "avlr/datagen.hpp"
#include "avlr/metrics.hpp"
#include "avlr/predictor.hpp"
#include "avlr/trainer.hpp"

namespace avlr::harness {

enum class Method { Avlr, AvlrMnar, Saem, Mean };

std::string to_string(Method m);
Method parse_method(const std::string& name);

struct ExperimentConfig {
  // Ingestion source. When empty, data are generated.
  std::string data_path;
  std::string label = "y";
  double test_fraction = 0.2;

  int n_train = 2000;
  int n_test = 500;
  std::vector<double> mu;          // empty: benchmark constants
  std::vector<std::vector<double>> sigma;
  std::vector<double> beta;

  gen::Mechanism mechanism = gen::Mechanism::MCAR;
  double rate = 0.5;
  bool calibrate = true;

  std::vector<Method> methods{Method::Avlr, Method::Mean};
  train::TrainConfig train;
  pred::PredictConfig predict;
  base::SaemConfig saem;
  int impute_draws = 100;
  int eval_every = 0;  // test AUC every n epochs for AV-LR methods; 0 = off

  int reps = 5;
  std::uint64_t base_seed = 0;
  std::string out;

  void validate() const;
  gen::GenSpec gen_spec(int n, std::uint64_t seed) const;
};

/// Parses a JSON object; unknown keys are rejected. Throws ConfigError.
ExperimentConfig config_from_json(const std::string& text);
/// Canonical JSON (sorted keys, no output path).
std::string config_to_json(const ExperimentConfig& cfg);
/// FNV-1a over the canonical JSON.
std::uint64_t config_hash(const ExperimentConfig& cfg);

/// Repetition r (0-based) uses base_seed + r.
inline std::uint64_t rep_seed(std::uint64_t base, int r) { return base + static_cast<std::uint64_t>(r); }
/// Independent substream of a repetition seed (splitmix64 finalizer).
std::uint64_t substream(std::uint64_t seed, std::uint64_t stream);

/// Fixed key set of every method row.
const std::vector<std::string>& metric_keys();

struct RepResult {
  int rep = 0;
  std::uint64_t seed = 0;
  bool failed = false;
  std::string error;
  std::map<std::string, double> values;  // NaN when the metric has no ground truth
  std::vector<double> epoch_auc;
  int forced_rows = 0;
};

struct MethodResult {
  Method method = Method::Mean;
  std::vector<RepResult> reps;
};

struct Provenance {
  std::uint64_t config_hash = 0;
  std::string config_json;
  std::vector<std::uint64_t> seeds;
  std::string version;
  std::string started;
  std::string finished;
};

struct ResultsTable {
  std::vector<MethodResult> methods;
  Provenance provenance;

  /// Summary over non-failed repetitions with a finite value.
  metrics::Summary summary(std::size_t method_index, const std::string& key) const;
};

using Logger = std::function<void(const std::string&)>;

ResultsTable run_benchmark(const ExperimentConfig& cfg, const Logger& log = {});

std::string report_json(const ResultsTable& table);
std::string report_text(const ResultsTable& table);

std::string model_to_json(const train::FittedModel& model);
train::FittedModel model_from_json(const std::string& text);

}  // namespace avlr::harness
