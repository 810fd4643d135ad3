#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace tmaf {

/// Index of the interval a point falls in: 0 for (-inf, s_1], m for (s_m, inf).
struct IntervalIndex {
  std::size_t j = 0;
  bool operator==(const IntervalIndex&) const = default;
};

/// Piecewise-constant function over fixed breakpoints s_1 < ... < s_m with
/// trainable values t_0 ... t_m. Intervals are right-closed: (s_j, s_{j+1}].
class StepFunction {
 public:
  StepFunction(std::vector<double> breakpoints, std::vector<double> values);

  /// Values initialized so that eval(s) * s == max(s, 0): 1 on intervals whose
  /// right end is positive, 0 elsewhere.
  static StepFunction relu_like(std::vector<double> breakpoints);
  /// All values equal to `value`.
  static StepFunction constant(std::vector<double> breakpoints, double value);

  IntervalIndex locate(double s) const;
  double eval(double s) const { return values_[locate(s).j]; }
  double value_at(IntervalIndex idx) const { return values_[idx.j]; }

  /// value_grads[locate(s)] += upstream * s, the derivative of eval(s) * s
  /// with respect to the active value.
  void accumulate_value_grad(double s, double upstream);
  /// Same, with the interval already located.
  void accumulate_value_grad(IntervalIndex idx, double s, double upstream) {
    value_grads_[idx.j] += upstream * s;
  }
  void zero_grads();

  std::size_t interval_count() const { return values_.size(); }
  std::span<const double> breakpoints() const { return breakpoints_; }
  std::span<double> values() { return values_; }
  std::span<const double> values() const { return values_; }
  std::span<double> value_grads() { return value_grads_; }
  std::span<const double> value_grads() const { return value_grads_; }

  /// Distance from s to the nearest breakpoint (infinity when there are none).
  double distance_to_breakpoint(double s) const;

 private:
  std::vector<double> breakpoints_;
  std::vector<double> values_;
  std::vector<double> value_grads_;
  // Evenly spaced breakpoints get an arithmetic first guess for locate().
  bool uniform_ = false;
  double inv_spacing_ = 0.0;
};

/// Nine breakpoints splitting the standard normal into ten intervals of
/// probability 0.1 each, rounded to two digits.
std::vector<double> gaussian_decile_breakpoints();

/// k + 1 evenly spaced breakpoints from lo to hi inclusive.
std::vector<double> uniform_grid_breakpoints(double lo, double hi, std::size_t k);

}  // namespace tmaf
