#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "tmaf/la.hpp"
#include "tmaf/params.hpp"

namespace tmaf {

enum class LossKind { kMeanSquaredError, kCrossEntropy };

struct LossResult {
  double loss = 0.0;
  Batch grad;  // d loss / d prediction
};

/// Mean over samples of the squared Euclidean residual norm. The gradient is
/// 2 (pred - target) / N.
LossResult mse_loss(const Batch& pred, const Batch& target);

/// Softmax cross-entropy averaged over samples. Labels are 1-based classes
/// in [1, logits.cols()].
LossResult cross_entropy_loss(const Batch& logits, std::span<const int> labels);

/// Fraction of rows whose argmax (first on ties) equals the 1-based label.
double top1_accuracy(const Batch& logits, std::span<const int> labels);

struct AdamOptions {
  double lr = 1e-4;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

/// ADAM with bias-corrected moments. Moment buffers are allocated on the
/// first step and bound to the block layout seen then.
class Adam {
 public:
  explicit Adam(AdamOptions options = {}) : options_(options) {}

  void set_lr(double lr) { options_.lr = lr; }
  const AdamOptions& options() const { return options_; }
  std::size_t step_count() const { return step_count_; }

  void step(const ParamList& params);

 private:
  AdamOptions options_;
  std::size_t step_count_ = 0;
  std::vector<std::vector<double>> m_;
  std::vector<std::vector<double>> v_;
};

/// Two-stage schedule: lr_first for epochs 1..floor(NE/2), lr_second after.
struct LrSchedule {
  std::size_t total_epochs = 1;
  double lr_first = 1e-4;
  double lr_second = 1e-5;

  /// epoch is 1-based; throws outside [1, total_epochs].
  double lr_at(std::size_t epoch) const;
};

}  // namespace tmaf
