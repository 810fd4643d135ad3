#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "json_util.hpp"
#include "spec_json.hpp"
#include "tmaf/error.hpp"
#include "tmaf/harness.hpp"

namespace tmaf {

using detail::Json;
using detail::ObjectReader;

const char* to_string(ExperimentKind kind) {
  switch (kind) {
    case ExperimentKind::kSine: return "sine";
    case ExperimentKind::kOscillatory: return "oscillatory";
    case ExperimentKind::kMnist: return "mnist";
    case ExperimentKind::kCustomCsv: return "custom-csv";
  }
  return "unknown";
}

namespace {

std::optional<ExperimentKind> parse_experiment_kind(const std::string& name) {
  for (auto k : {ExperimentKind::kSine, ExperimentKind::kOscillatory, ExperimentKind::kMnist,
                 ExperimentKind::kCustomCsv}) {
    if (name == to_string(k)) return k;
  }
  return std::nullopt;
}

}  // namespace

ExperimentConfig default_config(ExperimentKind kind) {
  ExperimentConfig c;
  c.kind = kind;
  c.output_dir = std::string("runs/") + to_string(kind);
  switch (kind) {
    case ExperimentKind::kSine:
      c.hidden = {20};
      c.activation.kind = ActivationKind::kDiagTMAF;
      c.batch_norm = true;
      c.training.epochs = 200;
      break;
    case ExperimentKind::kOscillatory:
      c.hidden = {100, 100, 100};
      c.activation.kind = ActivationKind::kDiagTMAF;
      c.activation.alpha = IntervalSpec::grid(-1.0, 1.0, 100);
      c.batch_norm = false;
      c.training.epochs = 500;
      c.data.frequency = 20.0;
      break;
    case ExperimentKind::kMnist:
      c.hidden = {10, 10};
      c.activation.kind = ActivationKind::kDiagTMAF;
      c.batch_norm = false;
      c.training.epochs = 50;
      break;
    case ExperimentKind::kCustomCsv:
      c.hidden = {20};
      c.activation.kind = ActivationKind::kReLU;
      c.batch_norm = false;
      c.training.epochs = 200;
      break;
  }
  return c;
}

ExperimentConfig parse_experiment_config(const std::string& json_text) {
  Json root;
  try {
    root = Json::parse(json_text);
  } catch (const Json::parse_error& e) {
    throw ConfigError({std::string("config is not valid JSON: ") + e.what()});
  }
  std::vector<std::string> violations;
  ObjectReader top(root, "", violations);
  if (!top.valid()) throw ConfigError(std::move(violations));

  ExperimentConfig c;
  const auto kind_name = top.require<std::string>("experiment");
  if (!kind_name) {
    top.finish();
    throw ConfigError(std::move(violations));
  }
  if (auto kind = parse_experiment_kind(*kind_name)) {
    c = default_config(*kind);
  } else {
    violations.push_back("experiment: unknown kind '" + *kind_name +
                         "' (expected sine, oscillatory, mnist or custom-csv)");
  }

  if (const Json* arch = top.find("architecture")) {
    ObjectReader r(*arch, "architecture", violations);
    if (auto hidden = r.get<std::vector<std::size_t>>("hidden")) c.hidden = *hidden;
    if (const Json* act = r.find("activation")) {
      c.activation =
          detail::parse_activation_spec(*act, "architecture.activation", violations, c.activation);
    }
    c.batch_norm = r.get_or<bool>("batch_norm", c.batch_norm);
    r.finish();
  }
  if (const Json* train = top.find("training")) {
    ObjectReader r(*train, "training", violations);
    auto& t = c.training;
    t.epochs = r.get_or<std::size_t>("epochs", t.epochs);
    t.batch_size = r.get_or<std::size_t>("batch_size", t.batch_size);
    if (auto lr = r.get<std::vector<double>>("lr")) {
      if (lr->size() == 2) {
        t.lr_first = (*lr)[0];
        t.lr_second = (*lr)[1];
      } else {
        violations.push_back("training.lr: expected [first_half, second_half]");
      }
    }
    t.seed = r.get_or<std::uint64_t>("seed", t.seed);
    t.log_wall_time = r.get_or<bool>("log_wall_time", t.log_wall_time);
    r.finish();
  }
  if (const Json* data = top.find("data")) {
    ObjectReader r(*data, "data", violations);
    auto& d = c.data;
    d.dim = r.get_or<std::size_t>("dim", d.dim);
    d.samples = r.get_or<std::size_t>("samples", d.samples);
    d.frequency = r.get_or<double>("frequency", d.frequency);
    d.heldout_fraction = r.get_or<double>("heldout_fraction", d.heldout_fraction);
    d.csv = r.get_or<std::string>("csv", d.csv);
    d.train_images = r.get_or<std::string>("train_images", d.train_images);
    d.train_labels = r.get_or<std::string>("train_labels", d.train_labels);
    d.test_images = r.get_or<std::string>("test_images", d.test_images);
    d.test_labels = r.get_or<std::string>("test_labels", d.test_labels);
    r.finish();
  }
  c.output_dir = top.get_or<std::string>("output_dir", c.output_dir);
  top.finish();

  if (!violations.empty()) throw ConfigError(std::move(violations));
  validate(c);
  return c;
}

ExperimentConfig load_experiment_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError({"cannot read config file " + path});
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_experiment_config(ss.str());
}

std::string to_json_string(const ExperimentConfig& c) {
  Json data{{"heldout_fraction", c.data.heldout_fraction}};
  switch (c.kind) {
    case ExperimentKind::kSine:
      data["dim"] = c.data.dim;
      data["samples"] = c.data.samples;
      break;
    case ExperimentKind::kOscillatory:
      data["samples"] = c.data.samples;
      data["frequency"] = c.data.frequency;
      break;
    case ExperimentKind::kMnist:
      data["train_images"] = c.data.train_images;
      data["train_labels"] = c.data.train_labels;
      data["test_images"] = c.data.test_images;
      data["test_labels"] = c.data.test_labels;
      break;
    case ExperimentKind::kCustomCsv:
      data["csv"] = c.data.csv;
      break;
  }
  Json j{
      {"experiment", to_string(c.kind)},
      {"architecture",
       {{"hidden", c.hidden},
        {"activation", detail::to_json(c.activation)},
        {"batch_norm", c.batch_norm}}},
      {"training",
       {{"epochs", c.training.epochs},
        {"batch_size", c.training.batch_size},
        {"lr", {c.training.lr_first, c.training.lr_second}},
        {"seed", c.training.seed},
        {"log_wall_time", c.training.log_wall_time}}},
      {"data", data},
      {"output_dir", c.output_dir},
  };
  return j.dump(2) + "\n";
}

void validate(const ExperimentConfig& c) {
  std::vector<std::string> v;
  for (std::size_t i = 0; i < c.hidden.size(); ++i) {
    if (c.hidden[i] == 0) v.push_back("architecture.hidden[" + std::to_string(i) + "] is zero");
  }
  NetworkSpec probe{{1, 1}, c.activation, false};
  try {
    validate(probe);
  } catch (const ConfigError& e) {
    for (const auto& s : e.violations()) v.push_back("architecture.activation: " + s);
  }
  const auto& t = c.training;
  if (t.epochs < 1) v.push_back("training.epochs must be >= 1");
  if (t.batch_size < 1) v.push_back("training.batch_size must be >= 1");
  if (c.batch_norm && t.batch_size < 2) {
    v.push_back("training.batch_size must be >= 2 with batch_norm");
  }
  if (!(t.lr_first > 0.0 && std::isfinite(t.lr_first)) ||
      !(t.lr_second > 0.0 && std::isfinite(t.lr_second))) {
    v.push_back("training.lr entries must be positive and finite");
  }
  const auto& d = c.data;
  if (!(d.heldout_fraction >= 0.0 && d.heldout_fraction < 1.0)) {
    v.push_back("data.heldout_fraction must be in [0, 1)");
  }
  auto require_file = [&](const std::string& path, const char* key) {
    if (path.empty()) {
      v.push_back(std::string("data.") + key + " is required for experiment " + to_string(c.kind));
    } else if (!std::filesystem::is_regular_file(path)) {
      v.push_back(std::string("data.") + key + ": file not found: " + path);
    }
  };
  switch (c.kind) {
    case ExperimentKind::kSine:
    case ExperimentKind::kOscillatory: {
      if (c.kind == ExperimentKind::kSine && d.dim < 1) v.push_back("data.dim must be >= 1");
      if (!std::isfinite(d.frequency)) v.push_back("data.frequency must be finite");
      const double train_rows = std::floor(static_cast<double>(d.samples) * (1.0 - d.heldout_fraction));
      if (d.samples < 1) {
        v.push_back("data.samples must be >= 1");
      } else if (train_rows < (c.batch_norm ? 2.0 : 1.0)) {
        v.push_back("data.samples leaves too few training rows after the held-out split");
      }
      break;
    }
    case ExperimentKind::kMnist:
      require_file(d.train_images, "train_images");
      require_file(d.train_labels, "train_labels");
      if (d.test_images.empty() != d.test_labels.empty()) {
        v.push_back("data.test_images and data.test_labels must be given together");
      } else if (!d.test_images.empty()) {
        require_file(d.test_images, "test_images");
        require_file(d.test_labels, "test_labels");
      }
      break;
    case ExperimentKind::kCustomCsv:
      require_file(d.csv, "csv");
      break;
  }
  if (c.output_dir.empty()) v.push_back("output_dir must not be empty");
  if (!v.empty()) throw ConfigError(std::move(v));
}

}  // namespace tmaf
