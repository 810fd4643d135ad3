#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "tmaf/la.hpp"
#include "tmaf/params.hpp"
#include "tmaf/stepfn.hpp"

namespace tmaf {

enum class ActivationKind { kReLU, kLeakyReLU, kPReLU, kDiagTMAF, kTriDiagTMAF };

const char* to_string(ActivationKind kind);
/// Accepts the names produced by to_string ("relu", "leaky_relu", "prelu",
/// "diag_tmaf", "tridiag_tmaf").
std::optional<ActivationKind> parse_activation_kind(const std::string& name);

/// Pre-activation values recorded by forward() for the matching backward().
struct ActivationCache {
  Batch input;
};

/// Activation operator applied to one layer of width n.
///
/// The component-wise kinds scale each coordinate by a factor chosen from its
/// sign. DiagTMAF computes out_i = alpha(y_i) * y_i. TriDiagTMAF multiplies by
/// the tridiagonal matrix whose column j holds (beta(y_j), alpha(y_j),
/// gamma(y_j)) at rows (j-1, j, j+1):
///
///   out_i = gamma(y_{i-1}) y_{i-1} + alpha(y_i) y_i + beta(y_{i+1}) y_{i+1}
///
/// Step functions are shared across the layer unless built per-neuron.
class ActivationOp {
 public:
  static ActivationOp relu(std::size_t width);
  static ActivationOp leaky_relu(std::size_t width, double slope = 0.01);
  static ActivationOp prelu(std::size_t width, double initial_slope = 0.25);
  static ActivationOp diag_tmaf(std::size_t width, StepFunction alpha, bool per_neuron = false);
  static ActivationOp tridiag_tmaf(std::size_t width, StepFunction alpha, StepFunction beta,
                                   StepFunction gamma, bool per_neuron = false);

  ActivationKind kind() const { return kind_; }
  std::size_t width() const { return width_; }
  bool per_neuron() const { return per_neuron_; }
  double leaky_slope() const { return leaky_slope_; }

  std::pair<Batch, ActivationCache> forward(Batch y) const;
  /// Returns the gradient with respect to the pre-activation and accumulates
  /// gradients of the op's own parameters.
  Batch backward(const ActivationCache& cache, const Batch& upstream);

  void zero_grads();
  ParamList collect_params();

  /// Step function governing the diagonal entry of column j.
  StepFunction& alpha(std::size_t j) { return alphas_[per_neuron_ ? j : 0]; }
  const StepFunction& alpha(std::size_t j) const { return alphas_[per_neuron_ ? j : 0]; }
  /// Super-diagonal entry of column j (row j-1), defined for j >= 1.
  const StepFunction& beta(std::size_t j) const { return betas_[per_neuron_ ? j - 1 : 0]; }
  StepFunction& beta(std::size_t j) { return betas_[per_neuron_ ? j - 1 : 0]; }
  /// Sub-diagonal entry of column j (row j+1), defined for j + 1 < width.
  const StepFunction& gamma(std::size_t j) const { return gammas_[per_neuron_ ? j : 0]; }
  StepFunction& gamma(std::size_t j) { return gammas_[per_neuron_ ? j : 0]; }

  std::vector<double>& prelu_slopes() { return slopes_; }
  const std::vector<double>& prelu_slopes() const { return slopes_; }

 private:
  ActivationOp(ActivationKind kind, std::size_t width) : kind_(kind), width_(width) {}

  double factor(double y, std::size_t i) const;

  ActivationKind kind_;
  std::size_t width_;
  bool per_neuron_ = false;
  double leaky_slope_ = 0.0;
  std::vector<double> slopes_;
  std::vector<double> slope_grads_;
  std::vector<StepFunction> alphas_;
  std::vector<StepFunction> betas_;
  std::vector<StepFunction> gammas_;
};

}  // namespace tmaf
