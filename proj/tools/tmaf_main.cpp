// tmaf: train, evaluate and gradient-check networks with trainable matrix
// activations, and run the canned comparison suites.
//
// Exit codes: 0 success, 1 validation error, 2 runtime failure, 3 gradcheck
// failure.

#include <cstdio>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "tmaf/error.hpp"
#include "tmaf/harness.hpp"
#include "tmaf/mnist.hpp"

namespace {

constexpr int kExitValidation = 1;
constexpr int kExitRuntime = 2;
constexpr int kExitGradcheck = 3;

int cmd_train(const std::string& config_path) {
  const auto config = tmaf::load_experiment_config(config_path);
  const auto result = tmaf::run_train(config);
  const auto& last = result.final_row();
  std::printf("epochs %zu  train_loss %.6g  eval_metric %.6g\n", last.epoch, last.train_loss,
              last.eval_metric);
  std::printf("wrote %s/{metrics.csv,model.bin,config.resolved.json}\n", config.output_dir.c_str());
  return 0;
}

int cmd_eval(const std::string& model, const std::string& config_path, const std::string& split) {
  const auto config = tmaf::load_experiment_config(config_path);
  const auto which = split == "train" ? tmaf::EvalSplit::kTrain : tmaf::EvalSplit::kHeldout;
  const double metric = tmaf::run_eval(model, config, which);
  const bool classification = config.kind == tmaf::ExperimentKind::kMnist;
  std::printf("%s %.17g\n", classification ? "accuracy" : "loss", metric);
  return 0;
}

int cmd_gradcheck(const std::string& config_path, double tolerance, double step) {
  const auto config = tmaf::load_experiment_config(config_path);
  tmaf::GradcheckRunOptions options;
  options.tolerance = tolerance;
  options.step = step;
  const auto report = tmaf::run_gradcheck(config, options);
  std::fputs(report.to_text().c_str(), stdout);
  return report.passed ? 0 : kExitGradcheck;
}

int cmd_suite(const std::string& name, const std::string& scale, const std::string& out,
              std::optional<std::size_t> epochs, std::uint64_t seed, const std::string& mnist_dir) {
  tmaf::SuiteOptions options;
  options.scale = scale == "paper" ? tmaf::SuiteScale::kFull : tmaf::SuiteScale::kDesk;
  options.output_dir = out;
  options.epochs = epochs;
  options.seed = seed;
  options.mnist_dir = mnist_dir;
  const auto result = tmaf::run_suite(name, options);
  std::fputs(result.table.c_str(), stdout);
  for (const auto& note : result.notes) std::printf("note: %s\n", note.c_str());
  return 0;
}

int cmd_gen_data(const std::string& experiment, const std::string& out,
                 const std::string& config_path, std::optional<std::size_t> dim,
                 std::optional<std::size_t> samples, std::optional<std::uint64_t> seed,
                 std::optional<double> frequency) {
  tmaf::ExperimentConfig config;
  if (!config_path.empty()) {
    config = tmaf::load_experiment_config(config_path);
  } else if (experiment == "sine") {
    config = tmaf::default_config(tmaf::ExperimentKind::kSine);
  } else if (experiment == "oscillatory") {
    config = tmaf::default_config(tmaf::ExperimentKind::kOscillatory);
  } else {
    throw tmaf::ConfigError({"gen-data: experiment must be sine or oscillatory, got '" +
                             experiment + "'"});
  }
  if (dim) config.data.dim = *dim;
  if (samples) config.data.samples = *samples;
  if (seed) config.training.seed = *seed;
  if (frequency) config.data.frequency = *frequency;
  if (config.kind != tmaf::ExperimentKind::kSine && config.kind != tmaf::ExperimentKind::kOscillatory) {
    throw tmaf::ConfigError({"gen-data: only synthetic experiments can be exported"});
  }
  // The whole generated set, before any held-out split.
  config.data.heldout_fraction = 0.0;
  const auto data = tmaf::build_data(config);
  tmaf::write_csv(data.train, out);
  std::printf("wrote %zu samples to %s\n", data.train.size(), out.c_str());
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Trainable matrix activation networks"};
  app.require_subcommand(1);

  std::string config_path, model_path, split = "heldout";
  double tolerance = 1e-6;
  double step = 1e-5;
  auto* train = app.add_subcommand("train", "Train a network from a JSON experiment config");
  train->add_option("--config", config_path, "Experiment config")->required()->check(CLI::ExistingFile);

  auto* eval = app.add_subcommand("eval", "Score a saved model on the config's data");
  eval->add_option("--model", model_path, "model.bin written by train")->required()->check(CLI::ExistingFile);
  eval->add_option("--config", config_path, "Experiment config")->required()->check(CLI::ExistingFile);
  eval->add_option("--split", split, "heldout or train")->check(CLI::IsMember({"heldout", "train"}));

  auto* gradcheck = app.add_subcommand("gradcheck", "Compare backward against finite differences");
  gradcheck->add_option("--config", config_path, "Experiment config")->required()->check(CLI::ExistingFile);
  gradcheck->add_option("--tolerance", tolerance, "Max relative error");
  gradcheck->add_option("--step", step, "Central-difference step")->check(CLI::PositiveNumber);

  std::string suite_name, scale = "desk", suite_out = "runs/suite", mnist_dir;
  std::optional<std::size_t> suite_epochs;
  std::uint64_t suite_seed = 1;
  auto* suite = app.add_subcommand("suite", "Run a canned comparison grid");
  suite->add_option("--name", suite_name, "table1, table2 or mnist")
      ->required()
      ->check(CLI::IsMember({"table1", "table2", "mnist"}));
  suite->add_option("--scale", scale, "desk or paper")->check(CLI::IsMember({"desk", "paper"}));
  suite->add_option("--out", suite_out, "Output directory");
  suite->add_option("--epochs", suite_epochs, "Override the preset epoch count");
  suite->add_option("--seed", suite_seed, "Seed for every run");
  suite->add_option("--mnist-dir", mnist_dir, "Directory with the MNIST IDX files");

  std::string experiment, out_path, gen_config;
  std::optional<std::size_t> dim, samples;
  std::optional<std::uint64_t> seed;
  std::optional<double> frequency;
  auto* gen = app.add_subcommand("gen-data", "Write a synthetic dataset as CSV");
  gen->add_option("--experiment", experiment, "sine or oscillatory");
  gen->add_option("--out", out_path, "CSV path")->required();
  gen->add_option("--config", gen_config, "Take data settings from a config")->check(CLI::ExistingFile);
  gen->add_option("--dim", dim, "Input dimension (sine)");
  gen->add_option("--samples", samples, "Sample count");
  gen->add_option("--seed", seed, "Seed");
  gen->add_option("--frequency", frequency, "High frequency a (oscillatory)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitValidation;
  }

  try {
    if (*train) return cmd_train(config_path);
    if (*eval) return cmd_eval(model_path, config_path, split);
    if (*gradcheck) return cmd_gradcheck(config_path, tolerance, step);
    if (*suite) return cmd_suite(suite_name, scale, suite_out, suite_epochs, suite_seed, mnist_dir);
    if (*gen) {
      if (experiment.empty() && gen_config.empty()) {
        throw tmaf::ConfigError({"gen-data: pass --experiment or --config"});
      }
      return cmd_gen_data(experiment, out_path, gen_config, dim, samples, seed, frequency);
    }
  } catch (const tmaf::ConfigError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitValidation;
  } catch (const tmaf::ModelFormatError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitValidation;
  } catch (const tmaf::IdxError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitValidation;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitRuntime;
  }
  return kExitValidation;
}
