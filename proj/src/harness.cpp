#include "tmaf/harness.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>

#include "tmaf/error.hpp"
#include "tmaf/mnist.hpp"

namespace tmaf {
namespace {

constexpr std::size_t kEvalChunkRows = 4096;

Dataset load_mnist_dataset(const std::string& images, const std::string& labels) {
  MnistSet set = load_mnist(images, labels);
  return Dataset{std::move(set.images), Batch(), std::move(set.labels)};
}

Batch predict_all(Network& net, const Batch& inputs) {
  Batch out(inputs.rows(), net.output_dim());
  for (std::size_t start = 0; start < inputs.rows(); start += kEvalChunkRows) {
    const std::size_t stop = std::min(inputs.rows(), start + kEvalChunkRows);
    Batch chunk(stop - start, inputs.cols());
    std::copy(inputs.row(start).begin(), inputs.row(stop - 1).end(), chunk.data().begin());
    const Batch pred = net.predict(chunk);
    std::copy(pred.data().begin(), pred.data().end(), out.row(start).begin());
  }
  return out;
}

LossResult batch_loss(const Batch& pred, const Dataset& ds, std::span<const std::size_t> rows,
                      LossKind kind) {
  if (kind == LossKind::kCrossEntropy) {
    return cross_entropy_loss(pred, gather(ds.labels, rows));
  }
  return mse_loss(pred, gather_rows(ds.targets, rows));
}

std::string canonical_architecture(const NetworkSpec& spec) { return to_json_string(spec); }

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot open " + path.string() + " for writing");
  out << text;
  if (!out) throw Error("failed writing " + path.string());
}

}  // namespace

ExperimentData build_data(const ExperimentConfig& config) {
  const auto seed = config.training.seed;
  ExperimentData out;
  Dataset all;
  switch (config.kind) {
    case ExperimentKind::kSine: {
      Rng rng = Rng::derive(seed, streams::kData);
      all = sample_sine_dataset(config.data.dim, config.data.samples, rng);
      break;
    }
    case ExperimentKind::kOscillatory: {
      Rng rng = Rng::derive(seed, streams::kData);
      const OscillatoryFreqs freqs{config.data.frequency, config.data.frequency / 2.0};
      all = sample_oscillatory_dataset(config.data.samples, rng, freqs);
      break;
    }
    case ExperimentKind::kMnist:
      out.loss = LossKind::kCrossEntropy;
      out.train = load_mnist_dataset(config.data.train_images, config.data.train_labels);
      if (!config.data.test_images.empty()) {
        out.eval = load_mnist_dataset(config.data.test_images, config.data.test_labels);
        return out;
      }
      all = std::move(out.train);
      break;
    case ExperimentKind::kCustomCsv:
      all = read_csv(config.data.csv);
      if (all.is_classification()) out.loss = LossKind::kCrossEntropy;
      break;
  }
  Rng split_rng = Rng::derive(seed, streams::kSplit);
  auto split = split_dataset(all, config.data.heldout_fraction, split_rng);
  out.train = std::move(split.train);
  out.eval = std::move(split.heldout);
  return out;
}

NetworkSpec network_spec(const ExperimentConfig& config, const ExperimentData& data) {
  NetworkSpec spec;
  spec.widths.push_back(data.train.inputs.cols());
  spec.widths.insert(spec.widths.end(), config.hidden.begin(), config.hidden.end());
  std::size_t out_dim;
  if (data.loss == LossKind::kCrossEntropy) {
    int classes = 0;
    for (int c : data.train.labels) classes = std::max(classes, c);
    for (int c : data.eval.labels) classes = std::max(classes, c);
    // MNIST always has ten classes even if a subset misses a digit.
    if (config.kind == ExperimentKind::kMnist) classes = std::max(classes, 10);
    out_dim = static_cast<std::size_t>(classes);
  } else {
    out_dim = data.train.targets.cols();
  }
  spec.widths.push_back(out_dim);
  spec.activation = config.activation;
  spec.batch_norm = config.batch_norm;
  return spec;
}

std::string format_metrics_row(const MetricsRow& row) {
  char buf[256];
  std::snprintf(buf, sizeof(buf), "%zu,%.17g,%.17g,%.17g,%.6f", row.epoch, row.train_loss,
                row.eval_metric, row.learning_rate, row.wall_seconds);
  return buf;
}

double dataset_loss(Network& net, const Dataset& ds, LossKind loss) {
  const Batch pred = predict_all(net, ds.inputs);
  if (loss == LossKind::kCrossEntropy) return cross_entropy_loss(pred, ds.labels).loss;
  return mse_loss(pred, ds.targets).loss;
}

double dataset_metric(Network& net, const Dataset& ds, LossKind loss) {
  if (ds.size() == 0) return std::nan("");
  if (loss == LossKind::kCrossEntropy) return top1_accuracy(predict_all(net, ds.inputs), ds.labels);
  return dataset_loss(net, ds, loss);
}

TrainResult run_train(const ExperimentConfig& config) {
  validate(config);
  const auto start = std::chrono::steady_clock::now();
  const ExperimentData data = build_data(config);
  const NetworkSpec spec = network_spec(config, data);

  Rng init_rng = Rng::derive(config.training.seed, streams::kInit);
  Rng shuffle_rng = Rng::derive(config.training.seed, streams::kShuffle);
  Network net(spec, init_rng);
  Adam adam(AdamOptions{config.training.lr_first});
  const LrSchedule schedule{config.training.epochs, config.training.lr_first,
                            config.training.lr_second};
  const ParamList params = net.collect_params();

  const std::filesystem::path out_dir(config.output_dir);
  std::filesystem::create_directories(out_dir);
  write_text(out_dir / "config.resolved.json", to_json_string(config));
  std::ofstream metrics(out_dir / "metrics.csv", std::ios::binary | std::ios::trunc);
  if (!metrics) throw Error("cannot open " + (out_dir / "metrics.csv").string());
  metrics << kMetricsHeader << "\n";

  TrainResult result;
  for (std::size_t epoch = 1; epoch <= config.training.epochs; ++epoch) {
    const double lr = schedule.lr_at(epoch);
    adam.set_lr(lr);
    const auto batches =
        epoch_batches(data.train.size(), config.training.batch_size, shuffle_rng, true);
    for (std::size_t b = 0; b < batches.size(); ++b) {
      const auto& rows = batches[b];
      // Batch norm has no batch statistics for a lone trailing sample.
      if (spec.batch_norm && rows.size() < 2) continue;
      const Batch x = gather_rows(data.train.inputs, rows);
      net.zero_grads();
      auto [pred, tape] = net.forward(x, Mode::kTrain);
      const LossResult loss = batch_loss(pred, data.train, rows, data.loss);
      if (!std::isfinite(loss.loss)) {
        throw NumericError("non-finite loss at epoch " + std::to_string(epoch) + ", batch " +
                           std::to_string(b + 1));
      }
      net.backward(std::move(tape), loss.grad);
      adam.step(params);
    }

    MetricsRow row;
    row.epoch = epoch;
    row.train_loss = dataset_loss(net, data.train, data.loss);
    if (!std::isfinite(row.train_loss)) {
      throw NumericError("non-finite training loss after epoch " + std::to_string(epoch));
    }
    row.eval_metric = dataset_metric(net, data.eval, data.loss);
    row.learning_rate = lr;
    if (config.training.log_wall_time) {
      row.wall_seconds =
          std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    }
    metrics << format_metrics_row(row) << "\n";
    metrics.flush();
    result.rows.push_back(row);
  }
  save_model(net, (out_dir / "model.bin").string());
  return result;
}

double run_eval(const std::string& model_path, const ExperimentConfig& config, EvalSplit split) {
  validate(config);
  const ExperimentData data = build_data(config);
  const NetworkSpec expected = network_spec(config, data);
  Network net = load_model(model_path);
  if (canonical_architecture(net.spec()) != canonical_architecture(expected)) {
    throw ModelFormatError("architecture mismatch: model has " + canonical_architecture(net.spec()) +
                           ", config describes " + canonical_architecture(expected));
  }
  const Dataset& ds = split == EvalSplit::kTrain ? data.train : data.eval;
  return dataset_metric(net, ds, data.loss);
}

GradcheckReport run_gradcheck(const ExperimentConfig& config, const GradcheckRunOptions& options) {
  validate(config);
  const ExperimentData data = build_data(config);
  const NetworkSpec spec = network_spec(config, data);
  Rng rng = Rng::derive(config.training.seed, streams::kGradcheck);
  const std::size_t want = std::max<std::size_t>(options.batch_rows, spec.batch_norm ? 2 : 1);

  // Rows away from every breakpoint are preferred. Dense grids behind batch
  // norm rarely leave enough of them, so the selection is topped up with other
  // rows and check_gradients skips the entries whose probes cross a
  // breakpoint. The first draw uses the training initialisation; later draws
  // replace one whose batch-norm inputs stay degenerate after conditioning.
  constexpr int kMaxDraws = 16;
  std::optional<Network> chosen;
  std::vector<std::size_t> rows;
  for (int draw = 0; draw < kMaxDraws && !chosen; ++draw) {
    Rng init_rng = draw == 0 ? Rng::derive(config.training.seed, streams::kInit)
                             : Rng(rng.next_u64());
    Network net(spec, init_rng);
    if (options.randomize_activation_params) {
      for (const auto& block : net.collect_params()) {
        switch (block.cls) {
          case ParamClass::kPReLUSlope:
          case ParamClass::kTmafAlpha:
          case ParamClass::kTmafBeta:
          case ParamClass::kTmafGamma:
            for (double& v : block.values) v = rng.uniform(-1.0, 1.0);
            break;
          default:
            break;
        }
      }
    }

    std::vector<std::size_t> order(data.train.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    rng.shuffle(std::span<std::size_t>(order));
    std::vector<std::size_t> picked;
    for (std::size_t k : rows_off_kinks(net, gather_rows(data.train.inputs, order), options.margin, want)) {
      picked.push_back(order[k]);
    }
    for (std::size_t i = 0; i < order.size() && picked.size() < want; ++i) {
      if (std::find(picked.begin(), picked.end(), order[i]) == picked.end()) picked.push_back(order[i]);
    }
    if (picked.size() < (spec.batch_norm ? 2u : 1u)) {
      throw Error("gradcheck: the training set has too few samples");
    }
    const Batch x = gather_rows(data.train.inputs, picked);
    condition_batch_norm_inputs(net, x, options.min_batch_norm_std);
    if (min_batch_norm_std(net, x) < options.min_batch_norm_std * (1 - 1e-9)) continue;
    rows = std::move(picked);
    chosen.emplace(std::move(net));
  }
  if (!chosen) {
    throw Error("gradcheck: no well-conditioned check point found (batch-norm input std stays below " +
                std::to_string(options.min_batch_norm_std) + ")");
  }
  Network& net = *chosen;

  const Dataset batch = data.train.subset(rows);
  const LossKind kind = data.loss;
  LossFn loss = [&batch, kind](const Batch& pred) {
    if (kind == LossKind::kCrossEntropy) return cross_entropy_loss(pred, batch.labels);
    return mse_loss(pred, batch.targets);
  };
  GradcheckOptions opts;
  opts.tolerance = options.tolerance;
  opts.step = options.step;
  opts.max_skipped_fraction = options.max_skipped_fraction;
  opts.after_backward = options.after_backward;
  return check_gradients(net, batch.inputs, loss, opts);
}

}  // namespace tmaf
