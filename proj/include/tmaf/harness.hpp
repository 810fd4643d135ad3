#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "tmaf/data.hpp"
#include "tmaf/gradcheck.hpp"
#include "tmaf/network.hpp"
#include "tmaf/optim.hpp"

namespace tmaf {

enum class ExperimentKind { kSine, kOscillatory, kMnist, kCustomCsv };

const char* to_string(ExperimentKind kind);

struct TrainingConfig {
  std::size_t epochs = 200;
  std::size_t batch_size = 500;
  double lr_first = 1e-4;
  double lr_second = 1e-5;
  std::uint64_t seed = 0;
  /// When off, metrics.csv carries 0 in wall_seconds so runs are byte-identical.
  bool log_wall_time = false;
};

struct DataConfig {
  std::size_t dim = 1;           // sine
  std::size_t samples = 20000;   // sine, oscillatory
  double frequency = 100.0;      // oscillatory: sin(a pi x) + cos(a/2 pi x) + sin(pi x)
  double heldout_fraction = 0.1;
  std::string csv;               // custom-csv
  std::string train_images, train_labels, test_images, test_labels;  // mnist
};

/// One training run, fully resolved. Parse with parse_experiment_config so
/// per-experiment defaults are filled in.
struct ExperimentConfig {
  ExperimentKind kind = ExperimentKind::kSine;
  std::vector<std::size_t> hidden{20};
  ActivationSpec activation;
  bool batch_norm = true;
  TrainingConfig training;
  DataConfig data;
  std::string output_dir = "runs/out";
};

/// Defaults for an experiment kind (before any user overrides).
ExperimentConfig default_config(ExperimentKind kind);

/// Parses JSON text. Unknown keys and every validation failure are collected
/// into one ConfigError.
ExperimentConfig parse_experiment_config(const std::string& json_text);
ExperimentConfig load_experiment_config(const std::string& path);
std::string to_json_string(const ExperimentConfig& config);
/// Throws ConfigError listing all violations, including missing files.
void validate(const ExperimentConfig& config);

struct ExperimentData {
  Dataset train;
  Dataset eval;  // held-out split, or the MNIST test files
  LossKind loss = LossKind::kMeanSquaredError;
};

/// Deterministic in the config's seed.
ExperimentData build_data(const ExperimentConfig& config);
/// Input and output widths follow from the data.
NetworkSpec network_spec(const ExperimentConfig& config, const ExperimentData& data);

struct MetricsRow {
  std::size_t epoch = 0;
  double train_loss = 0.0;
  double eval_metric = 0.0;  // held-out E for regression, accuracy for classification
  double learning_rate = 0.0;
  double wall_seconds = 0.0;
};

inline constexpr const char* kMetricsHeader = "epoch,train_loss,eval_metric,learning_rate,wall_seconds";

std::string format_metrics_row(const MetricsRow& row);

struct TrainResult {
  std::vector<MetricsRow> rows;
  const MetricsRow& final_row() const { return rows.back(); }
};

/// Loss on a whole dataset, eval mode.
double dataset_loss(Network& net, const Dataset& ds, LossKind loss);
/// E for regression, top-1 accuracy for classification; eval mode.
double dataset_metric(Network& net, const Dataset& ds, LossKind loss);

/// Trains for NE epochs and writes metrics.csv, model.bin and
/// config.resolved.json to config.output_dir. Throws NumericError on a
/// non-finite loss.
TrainResult run_train(const ExperimentConfig& config);

enum class EvalSplit { kHeldout, kTrain };

/// Loads a model written by run_train and scores it on the config's data.
double run_eval(const std::string& model_path, const ExperimentConfig& config,
                EvalSplit split = EvalSplit::kHeldout);

struct GradcheckRunOptions {
  double tolerance = 1e-6;
  double step = 1e-5;
  std::size_t batch_rows = 16;
  double margin = 1e-3;
  /// Redraw the network when a batch-norm input has a smaller batch std.
  double min_batch_norm_std = 1.0;
  double max_skipped_fraction = 0.25;
  /// Randomize TMAF values and PReLU slopes first so every path carries signal.
  bool randomize_activation_params = true;
  std::function<void(Network&)> after_backward;  // see GradcheckOptions
};

GradcheckReport run_gradcheck(const ExperimentConfig& config,
                              const GradcheckRunOptions& options = {});

enum class SuiteScale { kDesk, kFull };

struct SuiteOptions {
  SuiteScale scale = SuiteScale::kDesk;
  std::string output_dir = "runs/suite";
  std::optional<std::size_t> epochs;  // overrides the preset
  std::uint64_t seed = 1;
  std::string mnist_dir;  // holds the four IDX files
};

struct SuiteCell {
  std::string row;     // activation label
  std::string column;  // e.g. "n=1"
  double value = 0.0;
};

struct SuiteResult {
  std::string name;
  std::vector<SuiteCell> cells;
  std::vector<std::string> notes;  // soft checks
  std::string table;               // rendered comparison table
};

/// Experiment configs making up a suite ("table1", "table2", "mnist").
std::vector<std::pair<SuiteCell, ExperimentConfig>> suite_plan(const std::string& name,
                                                               const SuiteOptions& options);
SuiteResult run_suite(const std::string& name, const SuiteOptions& options);

}  // namespace tmaf
