#include <algorithm>
#include <cctype>
#include <cstdio>
#include <filesystem>
#include <map>

#include "tmaf/error.hpp"
#include "tmaf/harness.hpp"

namespace tmaf {
namespace {

struct ActivationRow {
  const char* label;
  ActivationKind kind;
};

std::string slug(std::string s) {
  for (char& ch : s) {
    if (!std::isalnum(static_cast<unsigned char>(ch))) ch = '_';
  }
  return s;
}

std::string fmt(double v, const char* pattern = "%.3g") {
  char buf[64];
  std::snprintf(buf, sizeof(buf), pattern, v);
  return buf;
}

std::string render(const std::vector<std::string>& columns, const std::vector<std::string>& rows,
                   const std::map<std::pair<std::string, std::string>, std::string>& values,
                   const std::string& corner) {
  std::string out = "| " + corner + " |";
  for (const auto& c : columns) out += " " + c + " |";
  out += "\n|---|";
  for (std::size_t i = 0; i < columns.size(); ++i) out += "---|";
  out += "\n";
  for (const auto& r : rows) {
    out += "| " + r + " |";
    for (const auto& c : columns) {
      auto it = values.find({r, c});
      out += " " + (it == values.end() ? std::string("-") : it->second) + " |";
    }
    out += "\n";
  }
  return out;
}

}  // namespace

std::vector<std::pair<SuiteCell, ExperimentConfig>> suite_plan(const std::string& name,
                                                               const SuiteOptions& options) {
  const bool full = options.scale == SuiteScale::kFull;
  std::vector<std::pair<SuiteCell, ExperimentConfig>> plan;
  auto add = [&](const std::string& row, const std::string& column, ExperimentConfig c) {
    c.training.seed = options.seed;
    if (options.epochs) c.training.epochs = *options.epochs;
    c.output_dir = (std::filesystem::path(options.output_dir) / name /
                    (slug(row) + "__" + slug(column)))
                       .string();
    plan.push_back({SuiteCell{row, column, 0.0}, std::move(c)});
  };

  if (name == "table1") {
    const ActivationRow rows[] = {{"ReLU", ActivationKind::kReLU},
                                  {"Para ReLU", ActivationKind::kPReLU},
                                  {"TMAF", ActivationKind::kDiagTMAF}};
    const std::pair<std::size_t, std::size_t> columns[] = {{1, 1}, {2, 1}, {5, 2}, {6, 2}};
    for (const auto& r : rows) {
      for (const auto& [dim, depth] : columns) {
        ExperimentConfig c = default_config(ExperimentKind::kSine);
        c.activation.kind = r.kind;
        c.hidden.assign(depth, 20);
        c.data.dim = dim;
        c.training.epochs = full ? 1000 : 200;
        add(r.label, "n=" + std::to_string(dim), std::move(c));
      }
    }
  } else if (name == "table2") {
    const ActivationRow rows[] = {{"ReLU", ActivationKind::kReLU},
                                  {"Para ReLU", ActivationKind::kPReLU},
                                  {"Diag TMAF", ActivationKind::kDiagTMAF},
                                  {"Tri-diag TMAF", ActivationKind::kTriDiagTMAF}};
    for (const auto& r : rows) {
      ExperimentConfig c = default_config(ExperimentKind::kOscillatory);
      c.activation.kind = r.kind;
      std::size_t width = 100;
      if (full) width = r.kind == ActivationKind::kTriDiagTMAF ? 300 : 400;
      c.hidden.assign(3, width);
      c.data.frequency = full ? 100.0 : 20.0;
      c.training.epochs = full ? 1000 : 500;
      add(r.label, "final loss", std::move(c));
    }
  } else if (name == "mnist") {
    const ActivationRow rows[] = {{"ReLU", ActivationKind::kReLU},
                                  {"TMAF", ActivationKind::kDiagTMAF}};
    const std::filesystem::path dir(options.mnist_dir);
    for (const auto& r : rows) {
      ExperimentConfig c = default_config(ExperimentKind::kMnist);
      c.activation.kind = r.kind;
      c.data.train_images = (dir / "train-images-idx3-ubyte").string();
      c.data.train_labels = (dir / "train-labels-idx1-ubyte").string();
      c.data.test_images = (dir / "t10k-images-idx3-ubyte").string();
      c.data.test_labels = (dir / "t10k-labels-idx1-ubyte").string();
      add(r.label, "MNIST (2 hidden layers)", std::move(c));
    }
  } else {
    throw ConfigError({"suite: unknown name '" + name + "' (expected table1, table2 or mnist)"});
  }
  return plan;
}

SuiteResult run_suite(const std::string& name, const SuiteOptions& options) {
  auto plan = suite_plan(name, options);
  SuiteResult result;
  result.name = name;
  std::vector<std::string> rows, columns;
  std::map<std::pair<std::string, std::string>, std::string> rendered;
  std::map<std::pair<std::string, std::string>, double> value;
  for (auto& [cell, config] : plan) {
    const TrainResult trained = run_train(config);
    const MetricsRow& last = trained.final_row();
    cell.value = name == "mnist" ? last.eval_metric : last.train_loss;
    if (std::find(rows.begin(), rows.end(), cell.row) == rows.end()) rows.push_back(cell.row);
    if (std::find(columns.begin(), columns.end(), cell.column) == columns.end()) {
      columns.push_back(cell.column);
    }
    rendered[{cell.row, cell.column}] =
        name == "mnist" ? fmt(100.0 * cell.value, "%.1f%%") : fmt(cell.value);
    value[{cell.row, cell.column}] = cell.value;
    result.cells.push_back(cell);
  }

  auto at = [&](const std::string& r, const std::string& c) { return value.at({r, c}); };
  if (name == "table1") {
    result.table = render(columns, rows, rendered, "final E");
    for (const auto& c : columns) {
      const bool ordered = at("TMAF", c) < at("Para ReLU", c) && at("Para ReLU", c) < at("ReLU", c);
      result.notes.push_back(c + ": TMAF < Para ReLU < ReLU " + (ordered ? "holds" : "does not hold"));
    }
  } else if (name == "table2") {
    result.table = render(columns, rows, rendered, "");
    const double ratio = at("Diag TMAF", "final loss") / at("ReLU", "final loss");
    result.notes.push_back("Diag TMAF / ReLU final loss ratio " + fmt(ratio) +
                           (ratio < 0.5 ? " (< 0.5)" : " (not < 0.5)"));
  } else {
    result.table = render(rows, {columns.front()}, [&] {
      std::map<std::pair<std::string, std::string>, std::string> t;
      for (const auto& [k, v] : rendered) t[{k.second, k.first}] = v;
      return t;
    }(), "Dataset");
    for (const auto& r : rows) {
      const double acc = at(r, columns.front());
      result.notes.push_back(r + " accuracy " + fmt(100.0 * acc, "%.1f%%") +
                             (acc >= 0.88 && acc <= 0.95 ? " within" : " outside") +
                             " [88%, 95%]");
    }
  }
  return result;
}

}  // namespace tmaf
