#include "tmaf/harness.hpp"

#include <sys/wait.h>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <gtest/gtest.h>

#include "tmaf/error.hpp"
#include "tmaf/gradcheck.hpp"
#include "tmaf/mnist.hpp"

namespace tmaf {
namespace {

namespace fs = std::filesystem;

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / "tmaf_harness_test" / name;
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

ExperimentConfig small_sine(const fs::path& out, ActivationKind kind = ActivationKind::kDiagTMAF) {
  ExperimentConfig c = default_config(ExperimentKind::kSine);
  c.activation.kind = kind;
  c.hidden = {8};
  c.data.samples = 600;
  c.training.epochs = 4;
  c.training.batch_size = 128;
  c.training.lr_first = 1e-3;
  c.training.lr_second = 1e-4;
  c.training.seed = 3;
  c.output_dir = out.string();
  return c;
}

std::string config_error(const std::string& json) {
  try {
    parse_experiment_config(json);
  } catch (const ConfigError& e) {
    return e.what();
  }
  return "";
}

TEST(Config, DefaultsPerExperiment) {
  const auto sine = parse_experiment_config(R"({"experiment": "sine"})");
  EXPECT_EQ(sine.hidden, std::vector<std::size_t>{20});
  EXPECT_TRUE(sine.batch_norm);
  EXPECT_EQ(sine.activation.kind, ActivationKind::kDiagTMAF);
  EXPECT_EQ(sine.training.batch_size, 500u);
  EXPECT_EQ(sine.training.lr_first, 1e-4);
  EXPECT_EQ(sine.training.lr_second, 1e-5);

  const auto osc = parse_experiment_config(R"({"experiment": "oscillatory"})");
  EXPECT_EQ(osc.hidden, (std::vector<std::size_t>{100, 100, 100}));
  EXPECT_EQ(osc.activation.alpha, IntervalSpec::grid(-1, 1, 100));
  EXPECT_EQ(osc.training.epochs, 500u);
}

TEST(Config, OverridesAndRoundTrip) {
  const auto c = parse_experiment_config(R"({
    "experiment": "sine",
    "architecture": {"hidden": [4, 5], "activation": {"kind": "tridiag_tmaf",
                     "alpha": {"lo": -2, "hi": 2, "k": 8}}, "batch_norm": false},
    "training": {"epochs": 7, "batch_size": 32, "lr": [0.01, 0.001], "seed": 9},
    "data": {"dim": 3, "samples": 100},
    "output_dir": "somewhere"
  })");
  EXPECT_EQ(c.hidden, (std::vector<std::size_t>{4, 5}));
  EXPECT_EQ(c.activation.kind, ActivationKind::kTriDiagTMAF);
  EXPECT_EQ(c.activation.alpha, IntervalSpec::grid(-2, 2, 8));
  EXPECT_FALSE(c.batch_norm);
  EXPECT_EQ(c.training.lr_second, 0.001);
  EXPECT_EQ(c.data.dim, 3u);
  const auto again = parse_experiment_config(to_json_string(c));
  EXPECT_EQ(to_json_string(again), to_json_string(c));
}

TEST(Config, UnknownKeysAreNamed) {
  EXPECT_NE(config_error(R"({"experiment": "sine", "trainig": {}})").find("trainig"), std::string::npos);
  EXPECT_NE(config_error(R"({"experiment": "sine", "training": {"epoch": 3}})").find("training.epoch"),
            std::string::npos);
  EXPECT_NE(config_error(R"({"experiment": "sine", "architecture": {"activation": {"kind": "relu", "slope": 1}}})")
                .find("slope"),
            std::string::npos);
}

TEST(Config, AllViolationsReportedTogether) {
  const std::string msg = config_error(
      R"({"experiment": "sine", "architecture": {"activation": {"kind": "swish"}},
          "training": {"epochs": "many", "lr": [1]}})");
  EXPECT_NE(msg.find("swish"), std::string::npos) << msg;
  EXPECT_NE(msg.find("training.epochs"), std::string::npos) << msg;
  EXPECT_NE(msg.find("training.lr"), std::string::npos) << msg;
  EXPECT_NE(config_error("{not json").find("JSON"), std::string::npos);
  EXPECT_NE(config_error(R"({"experiment": "cifar"})").find("cifar"), std::string::npos);
}

TEST(Config, ValidateChecksRangesAndFiles) {
  ExperimentConfig c = default_config(ExperimentKind::kMnist);
  c.data.train_images = "/nonexistent/images";
  c.data.train_labels = "/nonexistent/labels";
  c.training.epochs = 0;
  try {
    validate(c);
    FAIL();
  } catch (const ConfigError& e) {
    const std::string msg = e.what();
    EXPECT_NE(msg.find("train_images"), std::string::npos);
    EXPECT_NE(msg.find("train_labels"), std::string::npos);
    EXPECT_NE(msg.find("epochs"), std::string::npos);
  }
  ExperimentConfig s = default_config(ExperimentKind::kSine);
  s.activation.alpha = IntervalSpec::grid(1, 0, 4);
  EXPECT_THROW(validate(s), ConfigError);
  s = default_config(ExperimentKind::kSine);
  s.training.batch_size = 1;
  EXPECT_THROW(validate(s), ConfigError);
}

TEST(Train, WritesArtifactsWithExpectedShape) {
  const auto dir = scratch("artifacts");
  const auto config = small_sine(dir);
  const TrainResult r = run_train(config);
  ASSERT_EQ(r.rows.size(), 4u);
  EXPECT_TRUE(fs::exists(dir / "model.bin"));
  EXPECT_TRUE(fs::exists(dir / "config.resolved.json"));
  std::ifstream metrics(dir / "metrics.csv");
  std::string line;
  std::getline(metrics, line);
  EXPECT_EQ(line, kMetricsHeader);
  int rows = 0;
  while (std::getline(metrics, line)) ++rows;
  EXPECT_EQ(rows, 4);
  EXPECT_EQ(r.rows[0].learning_rate, 1e-3);
  EXPECT_EQ(r.rows[1].learning_rate, 1e-3);
  EXPECT_EQ(r.rows[2].learning_rate, 1e-4);
  for (const auto& row : r.rows) EXPECT_EQ(row.wall_seconds, 0.0);
  // The resolved config reproduces the run.
  const auto resolved = load_experiment_config((dir / "config.resolved.json").string());
  EXPECT_EQ(to_json_string(resolved), to_json_string(config));
}

TEST(Train, SingleEpochUsesSecondRate) {
  auto config = small_sine(scratch("one_epoch"));
  config.training.epochs = 1;
  EXPECT_EQ(run_train(config).rows.at(0).learning_rate, 1e-4);
}

TEST(Train, SameSeedIsByteIdentical) {
  const auto a = scratch("det_a"), b = scratch("det_b");
  run_train(small_sine(a));
  run_train(small_sine(b));
  EXPECT_EQ(slurp(a / "metrics.csv"), slurp(b / "metrics.csv"));
  EXPECT_EQ(slurp(a / "model.bin"), slurp(b / "model.bin"));
  auto other = small_sine(scratch("det_c"));
  other.training.seed = 4;
  run_train(other);
  EXPECT_NE(slurp(a / "model.bin"), slurp(fs::path(other.output_dir) / "model.bin"));
}

TEST(Train, LossDecreasesOnSine) {
  auto config = small_sine(scratch("decrease"), ActivationKind::kReLU);
  config.training.epochs = 30;
  const auto r = run_train(config);
  EXPECT_LT(r.final_row().train_loss, r.rows.front().train_loss);
}

TEST(Train, NonFiniteLossStopsWithEpochAndBatch) {
  const auto dir = scratch("nonfinite");
  Dataset ds{Matrix::from_rows({{0.0}, {1.0}, {2.0}, {3.0}}), Matrix::from_rows({{1e200}, {1e200}, {1e200}, {1e200}}), {}};
  write_csv(ds, (dir / "big.csv").string());
  ExperimentConfig c = default_config(ExperimentKind::kCustomCsv);
  c.data.csv = (dir / "big.csv").string();
  c.data.heldout_fraction = 0.0;
  c.batch_norm = false;
  c.training.epochs = 2;
  c.output_dir = (dir / "out").string();
  try {
    run_train(c);
    FAIL();
  } catch (const NumericError& e) {
    const std::string msg = e.what();
    EXPECT_NE(msg.find("epoch 1"), std::string::npos) << msg;
    EXPECT_NE(msg.find("batch 1"), std::string::npos) << msg;
  }
}

TEST(Eval, ReproducesFinalTrainingLoss) {
  for (bool bn : {false, true}) {
    const auto dir = scratch(bn ? "eval_bn" : "eval_plain");
    auto config = small_sine(dir);
    config.batch_norm = bn;
    const auto r = run_train(config);
    const double train = run_eval((dir / "model.bin").string(), config, EvalSplit::kTrain);
    EXPECT_NEAR(train, r.final_row().train_loss, 1e-9);
    const double held = run_eval((dir / "model.bin").string(), config, EvalSplit::kHeldout);
    EXPECT_NEAR(held, r.final_row().eval_metric, 1e-9);
  }
}

TEST(Eval, ArchitectureMismatchIsRejected) {
  const auto dir = scratch("mismatch");
  auto config = small_sine(dir);
  run_train(config);
  config.hidden = {9};
  EXPECT_THROW(run_eval((dir / "model.bin").string(), config), ModelFormatError);
}

TEST(Eval, PerfectClassifierScoresOne) {
  // Two separable classes; a hand-built linear model classifies them all.
  NetworkSpec spec;
  spec.widths = {2, 2};
  Rng rng(1);
  Network net(spec, rng);
  net.layers()[0].affine.w = Matrix::identity(2);
  const Dataset ds{Matrix::from_rows({{1, 0}, {0, 1}, {3, -1}, {-2, 5}}), Batch(), {1, 2, 1, 2}};
  EXPECT_EQ(dataset_metric(net, ds, LossKind::kCrossEntropy), 1.0);
}

TEST(Mnist, TinyIdxTrainingRun) {
  const auto dir = scratch("mnist_tiny");
  MnistSet set;
  set.image_rows = 2;
  set.image_cols = 2;
  set.images = Matrix(40, 4);
  Rng rng(2);
  for (std::size_t r = 0; r < 40; ++r) {
    set.labels.push_back(static_cast<int>(r % 10) + 1);
    for (double& v : set.images.row(r)) v = static_cast<double>(rng.below(256)) / 255.0;
  }
  auto write = [&](const fs::path& p, const std::vector<std::uint8_t>& bytes) {
    std::ofstream(p, std::ios::binary).write(reinterpret_cast<const char*>(bytes.data()),
                                             static_cast<std::streamsize>(bytes.size()));
  };
  write(dir / "img", encode_idx_images(set));
  write(dir / "lbl", encode_idx_labels(set));
  ExperimentConfig c = default_config(ExperimentKind::kMnist);
  c.data.train_images = (dir / "img").string();
  c.data.train_labels = (dir / "lbl").string();
  c.training.epochs = 2;
  c.training.batch_size = 8;
  c.output_dir = (dir / "out").string();
  const auto r = run_train(c);
  EXPECT_GE(r.final_row().eval_metric, 0.0);
  EXPECT_LE(r.final_row().eval_metric, 1.0);
  const auto data = build_data(c);
  EXPECT_EQ(network_spec(c, data).widths, (std::vector<std::size_t>{4, 10, 10, 10}));
}

TEST(Gradcheck, PassesForEveryActivation) {
  for (auto kind : {ActivationKind::kReLU, ActivationKind::kLeakyReLU, ActivationKind::kPReLU,
                    ActivationKind::kDiagTMAF, ActivationKind::kTriDiagTMAF}) {
    for (bool bn : {false, true}) {
      auto config = small_sine(scratch("gc"), kind);
      config.hidden = {6, 5};
      config.batch_norm = bn;
      const auto report = run_gradcheck(config);
      EXPECT_TRUE(report.passed) << to_string(kind) << " bn=" << bn << "\n" << report.to_text();
    }
  }
}

TEST(Gradcheck, WideBatchNormLayersWithDefaultSettings) {
  // Twenty or more first-layer neurons fed by one input almost always include
  // a few with tiny weights, so their batch-norm inputs start degenerate.
  for (std::size_t width : {20u, 100u}) {
    ExperimentConfig config = default_config(ExperimentKind::kSine);
    config.hidden = {width};
    config.data.samples = 1000;
    config.training.seed = 2;
    const auto report = run_gradcheck(config);
    EXPECT_TRUE(report.passed) << "width " << width << "\n" << report.to_text();
  }
}

TEST(Gradcheck, ConditioningLiftsOnlyTheSmallBatchNormStds) {
  NetworkSpec spec;
  spec.widths = {1, 4, 1};
  spec.activation.kind = ActivationKind::kPReLU;
  spec.batch_norm = true;
  Rng rng(9);
  Network net(spec, rng);
  auto& w = net.layers()[0].affine.w;
  w(0, 0) = 1e-3;
  w(1, 0) = 0.5;
  w(2, 0) = -0.8;
  w(3, 0) = 0.02;
  const Batch x = Matrix::from_rows({{-1.0}, {0.3}, {1.2}, {2.0}});
  EXPECT_LT(min_batch_norm_std(net, x), 0.01);
  EXPECT_GE(condition_batch_norm_inputs(net, x, 0.1), 2u);
  EXPECT_GE(min_batch_norm_std(net, x), 0.1 * (1 - 1e-9));
  EXPECT_EQ(w(1, 0), 0.5);
  EXPECT_EQ(w(2, 0), -0.8);
  EXPECT_GT(w(3, 0), 0.02);
  EXPECT_EQ(condition_batch_norm_inputs(net, x, 0.1), 0u);
}

TEST(Gradcheck, ProbesThatCrossAKinkAreSkipped) {
  NetworkSpec spec;
  spec.widths = {1, 1, 1};
  spec.activation.kind = ActivationKind::kReLU;
  Rng rng(1);
  Network net(spec, rng);
  net.layers()[0].affine.w(0, 0) = 1.0;
  net.layers()[0].affine.b[0] = 0.0;
  net.layers()[1].affine.w(0, 0) = 2.0;
  // Row 0 sits exactly on the ReLU kink, row 1 is well inside the linear part.
  const Batch x = Matrix::from_rows({{0.0}, {0.5}});
  const Batch target = Matrix::from_rows({{1.0}, {-1.0}});
  const LossFn loss = [&](const Batch& p) { return mse_loss(p, target); };

  const auto report = check_gradients(net, x, loss);
  EXPECT_GT(report.skipped, 0u);
  EXPECT_LT(report.max_rel_error, 1e-6) << report.to_text();

  GradcheckOptions strict;
  strict.max_skipped_fraction = 0.0;
  EXPECT_FALSE(check_gradients(net, x, loss, strict).passed);
}

TEST(Gradcheck, ReportsEveryParameterClass) {
  auto config = small_sine(scratch("gc_classes"), ActivationKind::kTriDiagTMAF);
  const auto report = run_gradcheck(config);
  std::vector<std::string> names;
  for (const auto& c : report.classes) names.push_back(c.name);
  for (const char* want : {"weight", "bias", "bn_scale", "bn_shift", "tmaf_alpha", "tmaf_beta",
                           "tmaf_gamma", "input"}) {
    EXPECT_NE(std::find(names.begin(), names.end(), want), names.end()) << want << "\n" << report.to_text();
  }
}

TEST(Gradcheck, CatchesACorruptedBackward) {
  auto config = small_sine(scratch("gc_bad"), ActivationKind::kDiagTMAF);
  GradcheckRunOptions options;
  options.after_backward = [](Network& net) {
    for (auto& block : net.collect_params()) {
      if (block.cls == ParamClass::kTmafAlpha) {
        for (double& g : block.grads) g *= 1.01;
      }
    }
  };
  const auto report = run_gradcheck(config, options);
  EXPECT_FALSE(report.passed) << report.to_text();
  EXPECT_GT(report.max_rel_error, 1e-3);
}

TEST(Suite, PlansMatchTheComparisonGrids) {
  SuiteOptions desk;
  const auto t1 = suite_plan("table1", desk);
  ASSERT_EQ(t1.size(), 12u);
  for (const auto& [cell, c] : t1) {
    EXPECT_TRUE(c.batch_norm);
    EXPECT_EQ(c.training.epochs, 200u);
    EXPECT_EQ(c.hidden.size(), c.data.dim >= 5 ? 2u : 1u);
  }
  const auto t2 = suite_plan("table2", desk);
  ASSERT_EQ(t2.size(), 4u);
  for (const auto& [cell, c] : t2) {
    EXPECT_EQ(c.hidden, (std::vector<std::size_t>{100, 100, 100}));
    EXPECT_EQ(c.data.frequency, 20.0);
  }
  SuiteOptions full;
  full.scale = SuiteScale::kFull;
  const auto t2p = suite_plan("table2", full);
  EXPECT_EQ(t2p[0].second.hidden, (std::vector<std::size_t>{400, 400, 400}));
  EXPECT_EQ(t2p[3].second.hidden, (std::vector<std::size_t>{300, 300, 300}));
  EXPECT_EQ(t2p[3].second.activation.kind, ActivationKind::kTriDiagTMAF);
  EXPECT_EQ(t2p[0].second.data.frequency, 100.0);
  EXPECT_EQ(suite_plan("mnist", desk).size(), 2u);
  EXPECT_THROW(suite_plan("table3", desk), ConfigError);
}

#ifdef TMAF_CLI_PATH
int run_cli(const std::string& args) {
  const std::string cmd = std::string(TMAF_CLI_PATH) + " " + args + " >/dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

TEST(Cli, ExitCodes) {
  const auto dir = scratch("cli");
  const auto good = dir / "good.json";
  auto config = small_sine(dir / "run");
  config.training.epochs = 2;
  std::ofstream(good) << to_json_string(config);
  std::ofstream(dir / "unknown.json") << R"({"experiment": "sine", "bogus": 1})";
  std::ofstream(dir / "badjson.json") << "{";

  EXPECT_EQ(run_cli("train --config " + good.string()), 0);
  EXPECT_EQ(run_cli("eval --model " + (dir / "run" / "model.bin").string() + " --config " + good.string()), 0);
  EXPECT_EQ(run_cli("gradcheck --config " + good.string()), 0);
  EXPECT_EQ(run_cli("gradcheck --config " + good.string() + " --tolerance 0"), 3);
  EXPECT_EQ(run_cli("train --config " + (dir / "unknown.json").string()), 1);
  EXPECT_EQ(run_cli("train --config " + (dir / "badjson.json").string()), 1);
  EXPECT_EQ(run_cli("train --config " + (dir / "missing.json").string()), 1);
  EXPECT_EQ(run_cli("frobnicate"), 1);
  EXPECT_EQ(run_cli("gen-data --experiment sine --samples 10 --out " + (dir / "s.csv").string()), 0);
  EXPECT_EQ(read_csv((dir / "s.csv").string()).size(), 10u);
  EXPECT_EQ(run_cli("gen-data --experiment mnist --out " + (dir / "m.csv").string()), 1);

  std::ofstream(dir / "garbage.bin") << "not a model";
  EXPECT_EQ(run_cli("eval --model " + (dir / "garbage.bin").string() + " --config " + good.string()), 1);

  // A run that diverges is a runtime failure.
  Dataset ds{Matrix::from_rows({{0.0}, {1.0}}), Matrix::from_rows({{1e200}, {1e200}}), {}};
  write_csv(ds, (dir / "big.csv").string());
  ExperimentConfig bad = default_config(ExperimentKind::kCustomCsv);
  bad.data.csv = (dir / "big.csv").string();
  bad.data.heldout_fraction = 0.0;
  bad.batch_norm = false;
  bad.output_dir = (dir / "bad").string();
  std::ofstream(dir / "diverge.json") << to_json_string(bad);
  EXPECT_EQ(run_cli("train --config " + (dir / "diverge.json").string()), 2);
}
#endif

}  // namespace
}  // namespace tmaf
