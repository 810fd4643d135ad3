#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "tmaf/activations.hpp"
#include "tmaf/la.hpp"
#include "tmaf/params.hpp"
#include "tmaf/rng.hpp"

namespace tmaf {

enum class Mode { kTrain, kEval };

/// Breakpoint layout for one step function.
struct IntervalSpec {
  enum class Type { kDecile, kGrid };
  Type type = Type::kDecile;
  double lo = -1.0;
  double hi = 1.0;
  std::size_t k = 100;

  static IntervalSpec decile() { return {}; }
  static IntervalSpec grid(double lo, double hi, std::size_t k) {
    return {Type::kGrid, lo, hi, k};
  }
  std::vector<double> breakpoints() const;
  bool operator==(const IntervalSpec&) const = default;
};

struct ActivationSpec {
  ActivationKind kind = ActivationKind::kReLU;
  IntervalSpec alpha = IntervalSpec::decile();
  IntervalSpec beta = IntervalSpec::grid(-2.01, -0.01, 100);
  IntervalSpec gamma = IntervalSpec::grid(0.01, 2.01, 100);
  double leaky_slope = 0.01;
  double prelu_init = 0.25;
  bool per_neuron = false;
  bool operator==(const ActivationSpec&) const = default;
};

/// Architecture descriptor: widths n_0 ... n_L, one activation family for all
/// hidden layers, and whether hidden linear outputs are batch-normalized.
struct NetworkSpec {
  std::vector<std::size_t> widths;
  ActivationSpec activation;
  bool batch_norm = false;
  bool operator==(const NetworkSpec&) const = default;
};

/// Builds the activation for one hidden layer. TMAF values start at the
/// ReLU configuration; off-diagonals start at zero.
ActivationOp make_activation(const ActivationSpec& spec, std::size_t width);

struct AffineLayer {
  Matrix w;  // out x in
  Vector b;
  Matrix w_grad;
  Vector b_grad;

  AffineLayer(std::size_t in, std::size_t out);
  std::size_t in_dim() const { return w.cols(); }
  std::size_t out_dim() const { return w.rows(); }
};

struct BatchNormCache {
  Batch normalized;  // pre scale/shift
  Vector inv_std;
};

/// Per-feature batch normalization with trainable scale/shift and running
/// statistics for eval mode.
class BatchNormLayer {
 public:
  explicit BatchNormLayer(std::size_t width, double eps = 1e-5, double momentum = 0.1);

  /// Train mode normalizes by batch mean and biased variance and updates the
  /// running statistics (unbiased variance); it needs at least two rows.
  Batch forward(const Batch& y, Mode mode, BatchNormCache* cache);
  Batch backward(const BatchNormCache& cache, const Batch& upstream);

  std::size_t width() const { return scale.size(); }

  Vector scale, shift;
  Vector scale_grad, shift_grad;
  Vector running_mean, running_var;
  double eps;
  double momentum;
};

struct Layer {
  AffineLayer affine;
  std::optional<BatchNormLayer> bn;
  std::optional<ActivationOp> activation;
};

struct LayerTape {
  Batch input;
  std::optional<BatchNormCache> bn;
  std::optional<ActivationCache> activation;
};

/// Intermediates of one train-mode forward pass, consumed by one backward.
struct GradientTape {
  std::vector<LayerTape> layers;
};

class Network {
 public:
  /// Weights uniform in [-1/sqrt(fan_in), 1/sqrt(fan_in)], zero biases.
  Network(NetworkSpec spec, Rng& rng);

  const NetworkSpec& spec() const { return spec_; }
  std::size_t input_dim() const { return spec_.widths.front(); }
  std::size_t output_dim() const { return spec_.widths.back(); }
  std::vector<Layer>& layers() { return layers_; }
  const std::vector<Layer>& layers() const { return layers_; }

  /// affine -> batch-norm -> activation on hidden layers, affine only on the
  /// last. The tape is empty in eval mode.
  std::pair<Batch, GradientTape> forward(const Batch& x, Mode mode);
  /// Eval-mode forward without a tape.
  Batch predict(const Batch& x);

  /// Accumulates every parameter gradient and returns d loss / d input.
  Batch backward(GradientTape&& tape, const Batch& out_grad);

  void zero_grads();
  ParamList collect_params();
  std::size_t param_count();

  /// Non-trainable state (batch-norm running statistics), in layer order.
  std::vector<std::span<double>> collect_buffers();

 private:
  NetworkSpec spec_;
  std::vector<Layer> layers_;
};

/// Throws ConfigError listing every problem with the descriptor.
void validate(const NetworkSpec& spec);

/// Model file layout, all integers and floats little-endian:
///   "TMAFMODL" | u32 version | u64 n | n bytes architecture JSON
///   | u64 count | count f64 parameters (collect_params order)
///   | u64 count | count f64 buffers (collect_buffers order)
inline constexpr std::uint32_t kModelFormatVersion = 1;

std::vector<std::uint8_t> encode_model(Network& net);
Network decode_model(const std::vector<std::uint8_t>& bytes);
void save_model(Network& net, const std::string& path);
Network load_model(const std::string& path);

std::string to_json_string(const NetworkSpec& spec);
NetworkSpec network_spec_from_json_string(const std::string& text);

}  // namespace tmaf
