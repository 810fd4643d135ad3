#include "tmaf/data.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <numbers>
#include <numeric>
#include <sstream>

#include "tmaf/error.hpp"

namespace tmaf {

Dataset Dataset::subset(std::span<const std::size_t> indices) const {
  Dataset out;
  out.inputs = gather_rows(inputs, indices);
  if (!targets.empty()) out.targets = gather_rows(targets, indices);
  if (!labels.empty()) out.labels = gather(labels, indices);
  return out;
}

DatasetSplit split_dataset(const Dataset& ds, double heldout_fraction, Rng& rng) {
  if (!(heldout_fraction >= 0.0 && heldout_fraction < 1.0)) {
    throw ConfigError({"heldout_fraction must be in [0, 1)"});
  }
  std::vector<std::size_t> order(ds.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  rng.shuffle(std::span<std::size_t>(order));
  const auto held = static_cast<std::size_t>(
      std::llround(heldout_fraction * static_cast<double>(ds.size())));
  std::span<const std::size_t> all(order);
  return {ds.subset(all.subspan(held)), ds.subset(all.first(held))};
}

double sine_target(std::span<const double> x) {
  double sum = 0.0;
  for (double v : x) sum += v;
  return std::sin(std::numbers::pi * sum);
}

Dataset sample_sine_dataset(std::size_t dims, std::size_t count, Rng& rng) {
  if (dims < 1 || count < 1) throw ConfigError({"sine dataset needs dims >= 1 and count >= 1"});
  Dataset ds{Batch(count, dims), Batch(count, 1), {}};
  for (std::size_t i = 0; i < count; ++i) {
    auto x = ds.inputs.row(i);
    for (double& v : x) v = rng.uniform(-2.0, 2.0);
    ds.targets(i, 0) = sine_target(x);
  }
  return ds;
}

double oscillatory_target(double x, OscillatoryFreqs freqs) {
  constexpr double pi = std::numbers::pi;
  return std::sin(freqs.high * pi * x) + std::cos(freqs.medium * pi * x) + std::sin(pi * x);
}

Dataset sample_oscillatory_dataset(std::size_t count, Rng& rng, OscillatoryFreqs freqs) {
  if (count < 1) throw ConfigError({"oscillatory dataset needs count >= 1"});
  Dataset ds{Batch(count, 1), Batch(count, 1), {}};
  for (std::size_t i = 0; i < count; ++i) {
    const double x = rng.uniform(-1.0, 1.0);
    ds.inputs(i, 0) = x;
    ds.targets(i, 0) = oscillatory_target(x, freqs);
  }
  return ds;
}

std::vector<std::vector<std::size_t>> epoch_batches(std::size_t n, std::size_t batch_size,
                                                     Rng& rng, bool shuffle) {
  if (batch_size < 1) throw ConfigError({"batch_size must be >= 1"});
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  if (shuffle) rng.shuffle(std::span<std::size_t>(order));
  std::vector<std::vector<std::size_t>> out;
  for (std::size_t start = 0; start < n; start += batch_size) {
    const std::size_t stop = std::min(n, start + batch_size);
    out.emplace_back(order.begin() + static_cast<std::ptrdiff_t>(start),
                     order.begin() + static_cast<std::ptrdiff_t>(stop));
  }
  return out;
}

Batch gather_rows(const Batch& src, std::span<const std::size_t> indices) {
  Batch out(indices.size(), src.cols());
  for (std::size_t i = 0; i < indices.size(); ++i) {
    if (indices[i] >= src.rows()) throw DimensionError("gather_rows: index out of range");
    const auto from = src.row(indices[i]);
    std::copy(from.begin(), from.end(), out.row(i).begin());
  }
  return out;
}

std::vector<int> gather(std::span<const int> src, std::span<const std::size_t> indices) {
  std::vector<int> out;
  out.reserve(indices.size());
  for (std::size_t i : indices) {
    if (i >= src.size()) throw DimensionError("gather: index out of range");
    out.push_back(src[i]);
  }
  return out;
}

// ---------------------------------------------------------------------------
// CSV

void write_csv(const Dataset& ds, const std::string& path) {
  std::FILE* f = std::fopen(path.c_str(), "w");
  if (f == nullptr) throw Error("cannot open " + path + " for writing");
  const std::size_t d = ds.inputs.cols();
  for (std::size_t j = 0; j < d; ++j) std::fprintf(f, "%sx%zu", j ? "," : "", j + 1);
  if (ds.is_classification()) {
    std::fprintf(f, ",label");
  } else {
    for (std::size_t j = 0; j < ds.targets.cols(); ++j) std::fprintf(f, ",y%zu", j + 1);
  }
  std::fprintf(f, "\n");
  for (std::size_t i = 0; i < ds.size(); ++i) {
    for (std::size_t j = 0; j < d; ++j) std::fprintf(f, "%s%.17g", j ? "," : "", ds.inputs(i, j));
    if (ds.is_classification()) {
      std::fprintf(f, ",%d", ds.labels[i]);
    } else {
      for (std::size_t j = 0; j < ds.targets.cols(); ++j) std::fprintf(f, ",%.17g", ds.targets(i, j));
    }
    std::fprintf(f, "\n");
  }
  const bool ok = std::ferror(f) == 0;
  std::fclose(f);
  if (!ok) throw Error("failed writing " + path);
}

namespace {

std::vector<std::string> split_fields(const std::string& line) {
  std::vector<std::string> out;
  std::stringstream ss(line);
  std::string field;
  while (std::getline(ss, field, ',')) {
    while (!field.empty() && (field.back() == '\r' || field.back() == ' ')) field.pop_back();
    while (!field.empty() && field.front() == ' ') field.erase(field.begin());
    out.push_back(field);
  }
  return out;
}

}  // namespace

Dataset read_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open CSV " + path);
  std::string line;
  if (!std::getline(in, line)) throw Error(path + ": empty CSV");
  const auto header = split_fields(line);
  std::size_t n_inputs = 0, n_targets = 0;
  bool has_label = false;
  std::vector<std::string> violations;
  for (std::size_t j = 0; j < header.size(); ++j) {
    const auto& h = header[j];
    if (!h.empty() && h[0] == 'x') {
      if (n_targets || has_label) violations.push_back(path + ": input column '" + h + "' after targets");
      ++n_inputs;
    } else if (!h.empty() && h[0] == 'y') {
      ++n_targets;
    } else if (h == "label") {
      has_label = true;
    } else {
      violations.push_back(path + ": unrecognized column '" + h + "'");
    }
  }
  if (n_inputs == 0) violations.push_back(path + ": no input (x*) columns");
  if (has_label == (n_targets > 0)) {
    violations.push_back(path + ": need either y* target columns or one label column");
  }
  if (!violations.empty()) throw ConfigError(std::move(violations));

  std::vector<double> xs, ys;
  std::vector<int> labels;
  std::size_t rows = 0;
  while (std::getline(in, line)) {
    if (line.empty() || line == "\r") continue;
    const auto fields = split_fields(line);
    if (fields.size() != header.size()) {
      throw Error(path + ": row " + std::to_string(rows + 2) + " has " +
                  std::to_string(fields.size()) + " fields, header has " +
                  std::to_string(header.size()));
    }
    for (std::size_t j = 0; j < fields.size(); ++j) {
      char* end = nullptr;
      const double v = std::strtod(fields[j].c_str(), &end);
      if (end == fields[j].c_str() || *end != '\0' || !std::isfinite(v)) {
        throw Error(path + ": bad number '" + fields[j] + "' at row " + std::to_string(rows + 2));
      }
      if (j < n_inputs) {
        xs.push_back(v);
      } else if (has_label) {
        labels.push_back(static_cast<int>(v));
      } else {
        ys.push_back(v);
      }
    }
    ++rows;
  }
  if (rows == 0) throw Error(path + ": no data rows");
  Dataset ds;
  ds.inputs = Batch(rows, n_inputs, std::move(xs));
  if (has_label) {
    ds.labels = std::move(labels);
  } else {
    ds.targets = Batch(rows, n_targets, std::move(ys));
  }
  return ds;
}

}  // namespace tmaf
