#pragma once

#include <cstdint>
#include <iosfwd>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "vqrf/baseline.hpp"
#include "vqrf/model.hpp"
#include "vqrf/optim.hpp"
#include "vqrf/raytracer.hpp"
#include "vqrf/scene.hpp"

namespace vqrf {

class HarnessError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class ModelKind { kHybrid, kLstm };
ModelKind parse_model_kind(std::string_view name);
std::string_view to_string(ModelKind kind);

struct ExperimentConfig {
  std::string scene_path = "data/canonical_scene.json";
  std::string target = "A";
  std::size_t samples = 2000;
  double train_fraction = 0.8;
  std::size_t batch_size = 64;
  std::size_t epochs = 50;
  SamplingMode sampling = SamplingMode::kBalanced;
  double inside_fraction = 0.5;
  std::uint64_t data_seed = 2024;
  std::vector<std::uint64_t> seeds{11, 22, 33};  // one per trial
  std::vector<ModelKind> models{ModelKind::kHybrid, ModelKind::kLstm};
  RadioConfig radio;

  // hybrid model
  double hybrid_learning_rate = 0.003;
  OptimizerKind hybrid_optimizer = OptimizerKind::kSgd;
  double target_angle = 1.5707963267948966;  // pi/2
  double detuning = 0.0;
  LossKind loss = LossKind::kCrossEntropy;
  GradientMethod gradient = GradientMethod::kAdjoint;
  AnsatzShape ansatz;
  HeadShape head;

  // baseline
  double lstm_learning_rate = 1e-4;
  OptimizerKind lstm_optimizer = OptimizerKind::kAdam;
  LstmShape lstm;

  std::size_t trials() const { return seeds.size(); }
  std::size_t test_size() const;
  void validate() const;
};

nlohmann::json to_json(const ExperimentConfig& config);
ExperimentConfig config_from_json(const nlohmann::json& j);
/// Reads a config file; a relative scene path is resolved against the
/// config file's directory.
ExperimentConfig load_config(const std::string& path);

/// Stable 64-bit FNV-1a, rendered as 16 hex digits.
std::string fnv1a_hex(std::string_view bytes);
std::string config_hash(const ExperimentConfig& config);

enum class Split { kTrain, kTest };

struct Record {
  std::size_t m = 0;
  Vec2 position;
  int label = 1;
  Split split = Split::kTrain;
  PathSet paths;
};

struct Dataset {
  std::vector<Record> records;

  std::size_t count(Split split) const;
};

/// Samples locations, traces every receiver and assigns the train/test split
/// from a seeded permutation.
Dataset generate_dataset(const Scene& scene, const ExperimentConfig& config);

/// One JSON object per line:
/// {"m","x","y","label","split","paths":[{"k","n","d_m","tau_s","a_re","a_im"}]}
std::string serialize_dataset(const Dataset& dataset);
Dataset parse_dataset(std::string_view text);
void write_text_file(const std::string& path, const std::string& text);
std::string read_text_file(const std::string& path);

struct EpochMetrics {
  std::size_t epoch = 0;  // 1-based
  double train_loss_mean = 0.0;
  double train_loss_accrued = 0.0;
  double test_loss = 0.0;
  double test_accuracy = 0.0;
};

struct TrainResult {
  nlohmann::json checkpoint;
  std::vector<EpochMetrics> metrics;
  std::size_t parameter_updates = 0;
  std::size_t evaluations = 0;
  std::size_t parameter_count = 0;
};

struct TrainContext {
  double carrier_frequency_hz = 2.14e9;
  std::string dataset_hash;
  std::uint64_t seed = 0;
};

TrainResult train_hybrid(const ExperimentConfig& config, const Dataset& dataset,
                         const TrainContext& ctx);
TrainResult train_baseline(const ExperimentConfig& config, const Dataset& dataset,
                           const TrainContext& ctx);
TrainResult train_model(ModelKind kind, const ExperimentConfig& config, const Dataset& dataset,
                        const TrainContext& ctx);

struct EvalResult {
  std::size_t total = 0;
  std::size_t correct = 0;
  double loss = 0.0;
  double accuracy = 0.0;
};

/// Scores a checkpoint on the dataset's test split. The checkpoint must
/// carry the dataset's hash.
EvalResult evaluate(const nlohmann::json& checkpoint, const Dataset& dataset,
                    const std::string& dataset_hash);

double accuracy(const std::vector<int>& predictions, const std::vector<int>& labels);
/// Fraction of the more frequent label.
double majority_rate(const std::vector<int>& labels);

struct TrialSummary {
  ModelKind model = ModelKind::kHybrid;
  std::vector<std::vector<EpochMetrics>> per_trial;
};

/// Trains `model` once per seed on the same dataset.
TrialSummary run_trials(ModelKind model, const ExperimentConfig& config, const Scene& scene,
                        const Dataset& dataset, const std::string& dataset_hash);

/// Columns epoch,trial,train_loss_mean,train_loss_accrued,test_loss,test_accuracy.
/// Per epoch: one row per trial, then a "mean" row and a "var" row
/// (population variance across trials).
std::string metrics_csv(const std::vector<std::vector<EpochMetrics>>& per_trial);

/// Whitespace-separated epoch, then mean and variance of every metric.
std::string gnuplot_columns(const std::vector<std::vector<EpochMetrics>>& per_trial);

/// generate/train/trials/eval/plot command line. Returns the exit status.
int run_cli(int argc, char** argv);

}  // namespace vqrf
