#include "tmaf/network.hpp"

#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <iterator>

#include "spec_json.hpp"
#include "tmaf/error.hpp"

namespace tmaf {

std::vector<double> IntervalSpec::breakpoints() const {
  if (type == Type::kDecile) return gaussian_decile_breakpoints();
  return uniform_grid_breakpoints(lo, hi, k);
}

ActivationOp make_activation(const ActivationSpec& spec, std::size_t width) {
  switch (spec.kind) {
    case ActivationKind::kReLU: return ActivationOp::relu(width);
    case ActivationKind::kLeakyReLU: return ActivationOp::leaky_relu(width, spec.leaky_slope);
    case ActivationKind::kPReLU: return ActivationOp::prelu(width, spec.prelu_init);
    case ActivationKind::kDiagTMAF:
      return ActivationOp::diag_tmaf(width, StepFunction::relu_like(spec.alpha.breakpoints()),
                                     spec.per_neuron);
    case ActivationKind::kTriDiagTMAF:
      return ActivationOp::tridiag_tmaf(width, StepFunction::relu_like(spec.alpha.breakpoints()),
                                        StepFunction::constant(spec.beta.breakpoints(), 0.0),
                                        StepFunction::constant(spec.gamma.breakpoints(), 0.0),
                                        spec.per_neuron);
  }
  throw Error("make_activation: unknown kind");
}

// ---------------------------------------------------------------------------
// Layers

AffineLayer::AffineLayer(std::size_t in, std::size_t out)
    : w(out, in), b(out, 0.0), w_grad(out, in), b_grad(out, 0.0) {}

BatchNormLayer::BatchNormLayer(std::size_t width, double eps, double momentum)
    : scale(width, 1.0),
      shift(width, 0.0),
      scale_grad(width, 0.0),
      shift_grad(width, 0.0),
      running_mean(width, 0.0),
      running_var(width, 1.0),
      eps(eps),
      momentum(momentum) {}

Batch BatchNormLayer::forward(const Batch& y, Mode mode, BatchNormCache* cache) {
  const std::size_t n = y.rows();
  const std::size_t d = width();
  if (y.cols() != d) {
    throw DimensionError("batch-norm: expected width " + std::to_string(d) + ", got " + y.shape());
  }
  Vector mean(d, 0.0), inv_std(d, 0.0);
  if (mode == Mode::kTrain) {
    if (n < 2) throw DimensionError("batch-norm: train mode needs at least 2 samples, got 1");
    Vector var(d, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
      const auto r = y.row(i);
      for (std::size_t j = 0; j < d; ++j) mean[j] += r[j];
    }
    for (auto& m : mean) m /= static_cast<double>(n);
    for (std::size_t i = 0; i < n; ++i) {
      const auto r = y.row(i);
      for (std::size_t j = 0; j < d; ++j) {
        const double c = r[j] - mean[j];
        var[j] += c * c;
      }
    }
    const double unbias = static_cast<double>(n) / static_cast<double>(n - 1);
    for (std::size_t j = 0; j < d; ++j) {
      var[j] /= static_cast<double>(n);
      inv_std[j] = 1.0 / std::sqrt(var[j] + eps);
      running_mean[j] = (1.0 - momentum) * running_mean[j] + momentum * mean[j];
      running_var[j] = (1.0 - momentum) * running_var[j] + momentum * var[j] * unbias;
    }
  } else {
    mean = running_mean;
    for (std::size_t j = 0; j < d; ++j) inv_std[j] = 1.0 / std::sqrt(running_var[j] + eps);
  }

  Batch normalized(n, d), out(n, d);
  for (std::size_t i = 0; i < n; ++i) {
    const auto r = y.row(i);
    auto z = normalized.row(i);
    auto o = out.row(i);
    for (std::size_t j = 0; j < d; ++j) {
      z[j] = (r[j] - mean[j]) * inv_std[j];
      o[j] = scale[j] * z[j] + shift[j];
    }
  }
  if (cache != nullptr) *cache = BatchNormCache{std::move(normalized), std::move(inv_std)};
  return out;
}

Batch BatchNormLayer::backward(const BatchNormCache& cache, const Batch& upstream) {
  const Batch& z = cache.normalized;
  if (upstream.rows() != z.rows() || upstream.cols() != z.cols()) {
    throw DimensionError("batch-norm backward: upstream " + upstream.shape() + " vs cache " +
                         z.shape());
  }
  const std::size_t n = z.rows();
  const std::size_t d = width();
  Vector sum_dz(d, 0.0), sum_dz_z(d, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    const auto u = upstream.row(i);
    const auto zr = z.row(i);
    for (std::size_t j = 0; j < d; ++j) {
      scale_grad[j] += u[j] * zr[j];
      shift_grad[j] += u[j];
      const double dz = u[j] * scale[j];
      sum_dz[j] += dz;
      sum_dz_z[j] += dz * zr[j];
    }
  }
  const double nd = static_cast<double>(n);
  Batch grad(n, d);
  for (std::size_t i = 0; i < n; ++i) {
    const auto u = upstream.row(i);
    const auto zr = z.row(i);
    auto g = grad.row(i);
    for (std::size_t j = 0; j < d; ++j) {
      const double dz = u[j] * scale[j];
      g[j] = cache.inv_std[j] / nd * (nd * dz - sum_dz[j] - zr[j] * sum_dz_z[j]);
    }
  }
  return grad;
}

// ---------------------------------------------------------------------------
// Network

void validate(const NetworkSpec& spec) {
  std::vector<std::string> violations;
  if (spec.widths.size() < 2) {
    violations.push_back("architecture: need at least input and output widths");
  }
  for (std::size_t i = 0; i < spec.widths.size(); ++i) {
    if (spec.widths[i] == 0) {
      violations.push_back("architecture: width " + std::to_string(i) + " is zero");
    }
  }
  auto check_intervals = [&](const IntervalSpec& s, const char* which) {
    if (s.type != IntervalSpec::Type::kGrid) return;
    if (!(s.lo < s.hi)) violations.push_back(std::string(which) + " grid: lo must be < hi");
    if (s.k < 1) violations.push_back(std::string(which) + " grid: k must be >= 1");
  };
  const auto& a = spec.activation;
  if (a.kind == ActivationKind::kDiagTMAF || a.kind == ActivationKind::kTriDiagTMAF) {
    check_intervals(a.alpha, "alpha");
  }
  if (a.kind == ActivationKind::kTriDiagTMAF) {
    check_intervals(a.beta, "beta");
    check_intervals(a.gamma, "gamma");
  }
  if (!std::isfinite(a.leaky_slope)) violations.push_back("leaky_slope must be finite");
  if (!std::isfinite(a.prelu_init)) violations.push_back("prelu_init must be finite");
  if (!violations.empty()) throw ConfigError(std::move(violations));
}

Network::Network(NetworkSpec spec, Rng& rng) : spec_(std::move(spec)) {
  validate(spec_);
  const std::size_t count = spec_.widths.size() - 1;
  layers_.reserve(count);
  for (std::size_t l = 0; l < count; ++l) {
    const std::size_t in = spec_.widths[l];
    const std::size_t out = spec_.widths[l + 1];
    Layer layer{AffineLayer(in, out), std::nullopt, std::nullopt};
    const double bound = 1.0 / std::sqrt(static_cast<double>(in));
    for (double& w : layer.affine.w.data()) w = rng.uniform(-bound, bound);
    if (l + 1 < count) {
      if (spec_.batch_norm) layer.bn.emplace(out);
      layer.activation.emplace(make_activation(spec_.activation, out));
    }
    layers_.push_back(std::move(layer));
  }
}

std::pair<Batch, GradientTape> Network::forward(const Batch& x, Mode mode) {
  if (x.cols() != input_dim()) {
    throw DimensionError("network forward: expected input dim " + std::to_string(input_dim()) +
                         ", got " + x.shape());
  }
  GradientTape tape;
  const bool record = mode == Mode::kTrain;
  if (record) tape.layers.reserve(layers_.size());
  Batch current = x;
  for (auto& layer : layers_) {
    LayerTape entry;
    Batch y = affine_batch(current, layer.affine.w, layer.affine.b);
    if (record) entry.input = std::move(current);
    if (layer.bn) {
      BatchNormCache bn_cache;
      y = layer.bn->forward(y, mode, record ? &bn_cache : nullptr);
      if (record) entry.bn = std::move(bn_cache);
    }
    if (layer.activation) {
      auto [out, act_cache] = layer.activation->forward(std::move(y));
      y = std::move(out);
      if (record) entry.activation = std::move(act_cache);
    }
    current = std::move(y);
    if (record) tape.layers.push_back(std::move(entry));
  }
  return {std::move(current), std::move(tape)};
}

Batch Network::predict(const Batch& x) { return forward(x, Mode::kEval).first; }

Batch Network::backward(GradientTape&& tape, const Batch& out_grad) {
  if (tape.layers.size() != layers_.size()) {
    throw DimensionError("network backward: tape has " + std::to_string(tape.layers.size()) +
                         " layers, network has " + std::to_string(layers_.size()) +
                         " (was the forward pass run in train mode?)");
  }
  if (out_grad.cols() != output_dim() || out_grad.rows() != tape.layers.front().input.rows()) {
    throw DimensionError("network backward: output gradient " + out_grad.shape() +
                         " does not match the recorded forward pass");
  }
  Batch grad = out_grad;
  for (std::size_t l = layers_.size(); l-- > 0;) {
    Layer& layer = layers_[l];
    LayerTape& entry = tape.layers[l];
    if (layer.activation) grad = layer.activation->backward(*entry.activation, grad);
    if (layer.bn) grad = layer.bn->backward(*entry.bn, grad);
    matmul_tn_accumulate(grad, entry.input, layer.affine.w_grad);
    const Vector bsum = column_sum(grad);
    for (std::size_t j = 0; j < bsum.size(); ++j) layer.affine.b_grad[j] += bsum[j];
    grad = matmul(grad, layer.affine.w);
  }
  tape.layers.clear();
  return grad;
}

void Network::zero_grads() {
  for (auto& layer : layers_) {
    std::fill(layer.affine.w_grad.data().begin(), layer.affine.w_grad.data().end(), 0.0);
    std::fill(layer.affine.b_grad.begin(), layer.affine.b_grad.end(), 0.0);
    if (layer.bn) {
      std::fill(layer.bn->scale_grad.begin(), layer.bn->scale_grad.end(), 0.0);
      std::fill(layer.bn->shift_grad.begin(), layer.bn->shift_grad.end(), 0.0);
    }
    if (layer.activation) layer.activation->zero_grads();
  }
}

ParamList Network::collect_params() {
  ParamList out;
  for (std::size_t l = 0; l < layers_.size(); ++l) {
    Layer& layer = layers_[l];
    const std::string prefix = "layer" + std::to_string(l) + ".";
    out.push_back({prefix + "w", ParamClass::kWeight, layer.affine.w.data(),
                   layer.affine.w_grad.data()});
    out.push_back({prefix + "b", ParamClass::kBias, layer.affine.b, layer.affine.b_grad});
    if (layer.bn) {
      out.push_back({prefix + "bn_scale", ParamClass::kBnScale, layer.bn->scale,
                     layer.bn->scale_grad});
      out.push_back({prefix + "bn_shift", ParamClass::kBnShift, layer.bn->shift,
                     layer.bn->shift_grad});
    }
    if (layer.activation) {
      for (auto& block : layer.activation->collect_params()) {
        block.name = prefix + block.name;
        out.push_back(std::move(block));
      }
    }
  }
  return out;
}

std::size_t Network::param_count() { return scalar_count(collect_params()); }

std::vector<std::span<double>> Network::collect_buffers() {
  std::vector<std::span<double>> out;
  for (auto& layer : layers_) {
    if (layer.bn) {
      out.emplace_back(layer.bn->running_mean);
      out.emplace_back(layer.bn->running_var);
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Serialization

namespace {

constexpr char kMagic[8] = {'T', 'M', 'A', 'F', 'M', 'O', 'D', 'L'};

void put_u32(std::vector<std::uint8_t>& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}

void put_u64(std::vector<std::uint8_t>& out, std::uint64_t v) {
  for (int i = 0; i < 8; ++i) out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}

void put_f64(std::vector<std::uint8_t>& out, double v) { put_u64(out, std::bit_cast<std::uint64_t>(v)); }

class ByteReader {
 public:
  explicit ByteReader(const std::vector<std::uint8_t>& bytes) : bytes_(bytes) {}

  void need(std::size_t n, const char* what) const {
    if (bytes_.size() - pos_ < n) {
      throw ModelFormatError(std::string("model file truncated while reading ") + what);
    }
  }
  std::uint64_t uint(int width, const char* what) {
    need(static_cast<std::size_t>(width), what);
    std::uint64_t v = 0;
    for (int i = 0; i < width; ++i) v |= static_cast<std::uint64_t>(bytes_[pos_ + i]) << (8 * i);
    pos_ += static_cast<std::size_t>(width);
    return v;
  }
  double f64(const char* what) { return std::bit_cast<double>(uint(8, what)); }
  std::string text(std::size_t n, const char* what) {
    need(n, what);
    std::string s(bytes_.begin() + static_cast<std::ptrdiff_t>(pos_),
                  bytes_.begin() + static_cast<std::ptrdiff_t>(pos_ + n));
    pos_ += n;
    return s;
  }
  bool at_end() const { return pos_ == bytes_.size(); }

 private:
  const std::vector<std::uint8_t>& bytes_;
  std::size_t pos_ = 0;
};

}  // namespace

std::string to_json_string(const NetworkSpec& spec) { return detail::to_json(spec).dump(); }

NetworkSpec network_spec_from_json_string(const std::string& text) {
  detail::Json j;
  try {
    j = detail::Json::parse(text);
  } catch (const detail::Json::parse_error& e) {
    throw ConfigError({std::string("architecture descriptor: ") + e.what()});
  }
  std::vector<std::string> violations;
  NetworkSpec spec = detail::parse_network_spec(j, "", violations);
  if (!violations.empty()) throw ConfigError(std::move(violations));
  return spec;
}

std::vector<std::uint8_t> encode_model(Network& net) {
  std::vector<std::uint8_t> out(std::begin(kMagic), std::end(kMagic));
  put_u32(out, kModelFormatVersion);
  const std::string descriptor = to_json_string(net.spec());
  put_u64(out, descriptor.size());
  out.insert(out.end(), descriptor.begin(), descriptor.end());
  const ParamList params = net.collect_params();
  put_u64(out, scalar_count(params));
  for (const auto& block : params) {
    for (double v : block.values) put_f64(out, v);
  }
  const auto buffers = net.collect_buffers();
  std::size_t buffer_count = 0;
  for (const auto& b : buffers) buffer_count += b.size();
  put_u64(out, buffer_count);
  for (const auto& b : buffers) {
    for (double v : b) put_f64(out, v);
  }
  return out;
}

Network decode_model(const std::vector<std::uint8_t>& bytes) {
  ByteReader in(bytes);
  in.need(sizeof(kMagic), "magic");
  if (std::memcmp(bytes.data(), kMagic, sizeof(kMagic)) != 0) {
    throw ModelFormatError("not a model file (bad magic)");
  }
  in.text(sizeof(kMagic), "magic");
  const auto version = in.uint(4, "version");
  if (version != kModelFormatVersion) {
    throw ModelFormatError("unsupported model format version " + std::to_string(version));
  }
  const auto descriptor_len = in.uint(8, "descriptor length");
  NetworkSpec spec;
  try {
    spec = network_spec_from_json_string(in.text(descriptor_len, "descriptor"));
  } catch (const ConfigError& e) {
    throw ModelFormatError(std::string("bad architecture descriptor: ") + e.what());
  }
  Rng unused(0);
  Network net(std::move(spec), unused);
  const ParamList params = net.collect_params();
  const auto param_count = in.uint(8, "parameter count");
  if (param_count != scalar_count(params)) {
    throw ModelFormatError("parameter count " + std::to_string(param_count) +
                           " does not match architecture (" +
                           std::to_string(scalar_count(params)) + ")");
  }
  for (const auto& block : params) {
    for (double& v : block.values) v = in.f64("parameters");
  }
  auto buffers = net.collect_buffers();
  std::size_t expected_buffers = 0;
  for (const auto& b : buffers) expected_buffers += b.size();
  const auto buffer_count = in.uint(8, "buffer count");
  if (buffer_count != expected_buffers) {
    throw ModelFormatError("buffer count " + std::to_string(buffer_count) +
                           " does not match architecture (" + std::to_string(expected_buffers) +
                           ")");
  }
  for (auto& b : buffers) {
    for (double& v : b) v = in.f64("buffers");
  }
  if (!in.at_end()) throw ModelFormatError("trailing bytes after model payload");
  return net;
}

void save_model(Network& net, const std::string& path) {
  const auto bytes = encode_model(net);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot open " + path + " for writing");
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw Error("failed writing " + path);
}

Network load_model(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ModelFormatError("cannot open model file " + path);
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)),
                                  std::istreambuf_iterator<char>());
  return decode_model(bytes);
}

}  // namespace tmaf
