#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "tmaf/la.hpp"
#include "tmaf/rng.hpp"

namespace tmaf {

/// Aligned inputs and either regression targets or 1-based class labels.
struct Dataset {
  Batch inputs;
  Batch targets;            // regression; empty for classification
  std::vector<int> labels;  // classification; empty for regression

  bool is_classification() const { return !labels.empty(); }
  std::size_t size() const { return inputs.rows(); }
  /// Rows in the given order.
  Dataset subset(std::span<const std::size_t> indices) const;
};

struct DatasetSplit {
  Dataset train;
  Dataset heldout;
};

/// Holds out round(fraction * N) samples chosen by a seeded permutation.
DatasetSplit split_dataset(const Dataset& ds, double heldout_fraction, Rng& rng);

/// sin(pi * (x_1 + ... + x_d)).
double sine_target(std::span<const double> x);
/// Inputs uniform on [-2, 2]^d.
Dataset sample_sine_dataset(std::size_t dims, std::size_t count, Rng& rng);

/// Frequencies of the oscillatory target sin(high pi x) + cos(medium pi x) + sin(pi x).
struct OscillatoryFreqs {
  double high = 100.0;
  double medium = 50.0;

  /// The reduced desk-scale target, a = 20.
  static OscillatoryFreqs reduced() { return {20.0, 10.0}; }
};

double oscillatory_target(double x, OscillatoryFreqs freqs);
/// One-dimensional inputs uniform on [-1, 1].
Dataset sample_oscillatory_dataset(std::size_t count, Rng& rng, OscillatoryFreqs freqs = {});

/// Partition of [0, n) into consecutive mini-batches (the last may be short),
/// in a seeded random order when `shuffle` is set.
std::vector<std::vector<std::size_t>> epoch_batches(std::size_t n, std::size_t batch_size,
                                                     Rng& rng, bool shuffle);

Batch gather_rows(const Batch& src, std::span<const std::size_t> indices);
std::vector<int> gather(std::span<const int> src, std::span<const std::size_t> indices);

/// CSV with a header row: inputs x1..xd, then targets y1..yJ or a single
/// `label` column.
void write_csv(const Dataset& ds, const std::string& path);
Dataset read_csv(const std::string& path);

}  // namespace tmaf
