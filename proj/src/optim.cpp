#include "tmaf/optim.hpp"

#include <algorithm>
#include <cmath>

#include "tmaf/error.hpp"

namespace tmaf {

LossResult mse_loss(const Batch& pred, const Batch& target) {
  if (pred.rows() != target.rows() || pred.cols() != target.cols()) {
    throw DimensionError("mse_loss: prediction " + pred.shape() + " vs target " + target.shape());
  }
  const double n = static_cast<double>(pred.rows());
  LossResult out{0.0, Batch(pred.rows(), pred.cols())};
  const auto p = pred.data();
  const auto t = target.data();
  auto g = out.grad.data();
  for (std::size_t i = 0; i < p.size(); ++i) {
    const double r = p[i] - t[i];
    out.loss += r * r;
    g[i] = 2.0 * r / n;
  }
  out.loss /= n;
  return out;
}

LossResult cross_entropy_loss(const Batch& logits, std::span<const int> labels) {
  const std::size_t n = logits.rows();
  const std::size_t m = logits.cols();
  if (labels.size() != n) {
    throw DimensionError("cross_entropy_loss: " + std::to_string(labels.size()) +
                         " labels for logits " + logits.shape());
  }
  LossResult out{0.0, Batch(n, m)};
  const double inv_n = 1.0 / static_cast<double>(n);
  for (std::size_t i = 0; i < n; ++i) {
    const int label = labels[i];
    if (label < 1 || static_cast<std::size_t>(label) > m) {
      throw Error("cross_entropy_loss: label " + std::to_string(label) + " at row " +
                  std::to_string(i) + " outside [1, " + std::to_string(m) + "]");
    }
    const auto row = logits.row(i);
    const double peak = *std::max_element(row.begin(), row.end());
    double denom = 0.0;
    for (double x : row) denom += std::exp(x - peak);
    const double log_denom = std::log(denom);
    const auto c = static_cast<std::size_t>(label - 1);
    out.loss -= (row[c] - peak) - log_denom;
    auto g = out.grad.row(i);
    for (std::size_t j = 0; j < m; ++j) {
      g[j] = std::exp(row[j] - peak - log_denom) * inv_n;
    }
    g[c] -= inv_n;
  }
  out.loss *= inv_n;
  return out;
}

double top1_accuracy(const Batch& logits, std::span<const int> labels) {
  if (labels.size() != logits.rows()) {
    throw DimensionError("top1_accuracy: " + std::to_string(labels.size()) +
                         " labels for logits " + logits.shape());
  }
  if (labels.empty()) return 0.0;
  std::size_t correct = 0;
  for (std::size_t i = 0; i < logits.rows(); ++i) {
    const auto row = logits.row(i);
    const auto best = std::max_element(row.begin(), row.end()) - row.begin();
    if (best + 1 == labels[i]) ++correct;
  }
  return static_cast<double>(correct) / static_cast<double>(labels.size());
}

void Adam::step(const ParamList& params) {
  if (m_.empty()) {
    for (const auto& p : params) {
      m_.emplace_back(p.values.size(), 0.0);
      v_.emplace_back(p.values.size(), 0.0);
    }
  }
  if (m_.size() != params.size()) {
    throw DimensionError("Adam::step: parameter layout changed between steps");
  }
  ++step_count_;
  const auto t = static_cast<double>(step_count_);
  const double correction1 = 1.0 - std::pow(options_.beta1, t);
  const double correction2 = 1.0 - std::pow(options_.beta2, t);
  for (std::size_t b = 0; b < params.size(); ++b) {
    const auto& p = params[b];
    auto& m = m_[b];
    auto& v = v_[b];
    if (m.size() != p.values.size()) {
      throw DimensionError("Adam::step: block '" + p.name + "' changed size");
    }
    for (std::size_t i = 0; i < m.size(); ++i) {
      const double g = p.grads[i];
      m[i] = options_.beta1 * m[i] + (1.0 - options_.beta1) * g;
      v[i] = options_.beta2 * v[i] + (1.0 - options_.beta2) * g * g;
      const double m_hat = m[i] / correction1;
      const double v_hat = v[i] / correction2;
      p.values[i] -= options_.lr * m_hat / (std::sqrt(v_hat) + options_.eps);
    }
  }
}

double LrSchedule::lr_at(std::size_t epoch) const {
  if (epoch < 1 || epoch > total_epochs) {
    throw Error("lr_at: epoch " + std::to_string(epoch) + " outside [1, " +
                std::to_string(total_epochs) + "]");
  }
  return epoch <= total_epochs / 2 ? lr_first : lr_second;
}

}  // namespace tmaf
