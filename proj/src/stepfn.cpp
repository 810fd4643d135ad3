#include "tmaf/stepfn.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "tmaf/error.hpp"
#include "tmaf/la.hpp"

namespace tmaf {

StepFunction::StepFunction(std::vector<double> breakpoints, std::vector<double> values)
    : breakpoints_(std::move(breakpoints)),
      values_(std::move(values)),
      value_grads_(values_.size(), 0.0) {
  if (values_.size() != breakpoints_.size() + 1) {
    throw DimensionError("StepFunction: " + std::to_string(breakpoints_.size()) +
                         " breakpoints need " + std::to_string(breakpoints_.size() + 1) +
                         " values, got " + std::to_string(values_.size()));
  }
  ensure_finite(breakpoints_, "StepFunction breakpoints");
  ensure_finite(values_, "StepFunction values");
  for (std::size_t i = 1; i < breakpoints_.size(); ++i) {
    if (!(breakpoints_[i - 1] < breakpoints_[i])) {
      throw Error("StepFunction: breakpoints must be strictly increasing (index " +
                  std::to_string(i) + ")");
    }
  }
  const std::size_t m = breakpoints_.size();
  if (m >= 16) {
    const double spacing = (breakpoints_.back() - breakpoints_.front()) / static_cast<double>(m - 1);
    double worst = 0.0;
    for (std::size_t i = 0; i < m; ++i) {
      const double ideal = breakpoints_.front() + spacing * static_cast<double>(i);
      worst = std::max(worst, std::abs(breakpoints_[i] - ideal));
    }
    uniform_ = worst < 0.25 * spacing;
    inv_spacing_ = 1.0 / spacing;
  }
}

StepFunction StepFunction::relu_like(std::vector<double> breakpoints) {
  std::vector<double> values(breakpoints.size() + 1, 1.0);
  for (std::size_t j = 0; j < breakpoints.size(); ++j) {
    // Interval j has right end breakpoints[j]; the last interval is unbounded.
    values[j] = breakpoints[j] > 0.0 ? 1.0 : 0.0;
  }
  return StepFunction(std::move(breakpoints), std::move(values));
}

StepFunction StepFunction::constant(std::vector<double> breakpoints, double value) {
  std::vector<double> values(breakpoints.size() + 1, value);
  return StepFunction(std::move(breakpoints), std::move(values));
}

IntervalIndex StepFunction::locate(double s) const {
  // The answer is the index of the first breakpoint >= s: s lies in the
  // interval that this breakpoint closes.
  const std::size_t m = breakpoints_.size();
  if (uniform_) {
    const double guess = std::ceil((s - breakpoints_.front()) * inv_spacing_);
    std::size_t j = guess <= 0.0 ? 0 : guess >= static_cast<double>(m) ? m : static_cast<std::size_t>(guess);
    // The guess is within one slot; walk to the exact answer.
    while (j > 0 && breakpoints_[j - 1] >= s) --j;
    while (j < m && breakpoints_[j] < s) ++j;
    return {j};
  }
  const auto it = std::lower_bound(breakpoints_.begin(), breakpoints_.end(), s);
  return {static_cast<std::size_t>(it - breakpoints_.begin())};
}

void StepFunction::accumulate_value_grad(double s, double upstream) {
  value_grads_[locate(s).j] += upstream * s;
}

void StepFunction::zero_grads() { std::fill(value_grads_.begin(), value_grads_.end(), 0.0); }

double StepFunction::distance_to_breakpoint(double s) const {
  double best = std::numeric_limits<double>::infinity();
  const auto it = std::lower_bound(breakpoints_.begin(), breakpoints_.end(), s);
  if (it != breakpoints_.end()) best = std::min(best, std::abs(*it - s));
  if (it != breakpoints_.begin()) best = std::min(best, std::abs(*(it - 1) - s));
  return best;
}

std::vector<double> gaussian_decile_breakpoints() {
  return {-1.4, -0.92, -0.56, -0.26, 0.0, 0.26, 0.56, 0.92, 1.4};
}

std::vector<double> uniform_grid_breakpoints(double lo, double hi, std::size_t k) {
  std::vector<std::string> violations;
  if (!(lo < hi)) violations.push_back("uniform_grid_breakpoints: lo must be < hi");
  if (k < 1) violations.push_back("uniform_grid_breakpoints: k must be >= 1");
  if (!violations.empty()) throw ConfigError(std::move(violations));
  std::vector<double> out(k + 1);
  const double span = hi - lo;
  for (std::size_t i = 0; i <= k; ++i) {
    // Multiply before dividing so grid points at rational fractions (0 in
    // [-1, 1]) land exactly.
    out[i] = lo + span * static_cast<double>(i) / static_cast<double>(k);
  }
  out.back() = hi;
  return out;
}

}  // namespace tmaf
