#include "tmaf/activations.hpp"

#include <algorithm>

#include "tmaf/error.hpp"

namespace tmaf {
namespace {

// The + 0.0 maps a -0 product to +0, so a zero factor gives the same bits as
// max(y, 0) whatever the sign of y.
inline double scale(double factor, double y) { return factor * y + 0.0; }

void check_width(const Batch& y, std::size_t width, const char* what) {
  if (y.cols() != width) {
    throw DimensionError(std::string(what) + ": expected width " + std::to_string(width) +
                         ", got " + y.shape());
  }
}

std::vector<StepFunction> replicate(StepFunction f, std::size_t count) {
  return std::vector<StepFunction>(std::max<std::size_t>(count, 1), std::move(f));
}

void append_step_params(ParamList& out, std::vector<StepFunction>& fns, const char* name,
                        ParamClass cls) {
  for (std::size_t k = 0; k < fns.size(); ++k) {
    std::string n = name;
    if (fns.size() > 1) n += "[" + std::to_string(k) + "]";
    out.push_back({std::move(n), cls, fns[k].values(), fns[k].value_grads()});
  }
}

}  // namespace

const char* to_string(ActivationKind kind) {
  switch (kind) {
    case ActivationKind::kReLU: return "relu";
    case ActivationKind::kLeakyReLU: return "leaky_relu";
    case ActivationKind::kPReLU: return "prelu";
    case ActivationKind::kDiagTMAF: return "diag_tmaf";
    case ActivationKind::kTriDiagTMAF: return "tridiag_tmaf";
  }
  return "unknown";
}

std::optional<ActivationKind> parse_activation_kind(const std::string& name) {
  for (auto kind : {ActivationKind::kReLU, ActivationKind::kLeakyReLU, ActivationKind::kPReLU,
                    ActivationKind::kDiagTMAF, ActivationKind::kTriDiagTMAF}) {
    if (name == to_string(kind)) return kind;
  }
  return std::nullopt;
}

ActivationOp ActivationOp::relu(std::size_t width) {
  return ActivationOp(ActivationKind::kReLU, width);
}

ActivationOp ActivationOp::leaky_relu(std::size_t width, double slope) {
  ActivationOp op(ActivationKind::kLeakyReLU, width);
  op.leaky_slope_ = slope;
  return op;
}

ActivationOp ActivationOp::prelu(std::size_t width, double initial_slope) {
  ActivationOp op(ActivationKind::kPReLU, width);
  op.slopes_.assign(width, initial_slope);
  op.slope_grads_.assign(width, 0.0);
  return op;
}

ActivationOp ActivationOp::diag_tmaf(std::size_t width, StepFunction alpha, bool per_neuron) {
  ActivationOp op(ActivationKind::kDiagTMAF, width);
  op.per_neuron_ = per_neuron;
  op.alphas_ = replicate(std::move(alpha), per_neuron ? width : 1);
  return op;
}

ActivationOp ActivationOp::tridiag_tmaf(std::size_t width, StepFunction alpha, StepFunction beta,
                                        StepFunction gamma, bool per_neuron) {
  ActivationOp op(ActivationKind::kTriDiagTMAF, width);
  op.per_neuron_ = per_neuron;
  const std::size_t off = width > 0 ? width - 1 : 0;
  op.alphas_ = replicate(std::move(alpha), per_neuron ? width : 1);
  op.betas_ = replicate(std::move(beta), per_neuron ? off : 1);
  op.gammas_ = replicate(std::move(gamma), per_neuron ? off : 1);
  return op;
}

double ActivationOp::factor(double y, std::size_t i) const {
  switch (kind_) {
    case ActivationKind::kReLU: return y > 0.0 ? 1.0 : 0.0;
    case ActivationKind::kLeakyReLU: return y > 0.0 ? 1.0 : leaky_slope_;
    case ActivationKind::kPReLU: return y > 0.0 ? 1.0 : slopes_[i];
    case ActivationKind::kDiagTMAF:
    case ActivationKind::kTriDiagTMAF: return alpha(i).eval(y);
  }
  return 0.0;
}

std::pair<Batch, ActivationCache> ActivationOp::forward(Batch y) const {
  check_width(y, width_, "activation forward");
  Batch out(y.rows(), y.cols());
  const std::size_t n = width_;
  for (std::size_t r = 0; r < y.rows(); ++r) {
    const auto in = y.row(r);
    auto dst = out.row(r);
    for (std::size_t i = 0; i < n; ++i) dst[i] = scale(factor(in[i], i), in[i]);
    if (kind_ == ActivationKind::kTriDiagTMAF) {
      for (std::size_t i = 0; i < n; ++i) {
        if (i > 0) dst[i] += gamma(i - 1).eval(in[i - 1]) * in[i - 1];
        if (i + 1 < n) dst[i] += beta(i + 1).eval(in[i + 1]) * in[i + 1];
      }
    }
  }
  return {std::move(out), ActivationCache{std::move(y)}};
}

Batch ActivationOp::backward(const ActivationCache& cache, const Batch& upstream) {
  const Batch& y = cache.input;
  check_width(y, width_, "activation backward");
  if (upstream.rows() != y.rows() || upstream.cols() != y.cols()) {
    throw DimensionError("activation backward: upstream " + upstream.shape() +
                         " does not match cached input " + y.shape());
  }
  Batch grad(y.rows(), y.cols());
  const std::size_t n = width_;
  for (std::size_t r = 0; r < y.rows(); ++r) {
    const auto in = y.row(r);
    const auto up = upstream.row(r);
    auto dst = grad.row(r);
    switch (kind_) {
      case ActivationKind::kPReLU:
        for (std::size_t j = 0; j < n; ++j) {
          dst[j] = scale(factor(in[j], j), up[j]);
          slope_grads_[j] += up[j] * std::min(in[j], 0.0);
        }
        break;
      case ActivationKind::kDiagTMAF:
        for (std::size_t j = 0; j < n; ++j) {
          StepFunction& a = alpha(j);
          const IntervalIndex idx = a.locate(in[j]);
          dst[j] = scale(a.value_at(idx), up[j]);
          a.accumulate_value_grad(idx, in[j], up[j]);
        }
        break;
      case ActivationKind::kTriDiagTMAF:
        for (std::size_t j = 0; j < n; ++j) {
          StepFunction& a = alpha(j);
          const IntervalIndex idx = a.locate(in[j]);
          dst[j] = scale(a.value_at(idx), up[j]);
          a.accumulate_value_grad(idx, in[j], up[j]);
          if (j > 0) {
            StepFunction& b = beta(j);
            const IntervalIndex bi = b.locate(in[j]);
            dst[j] += up[j - 1] * b.value_at(bi);
            b.accumulate_value_grad(bi, in[j], up[j - 1]);
          }
          if (j + 1 < n) {
            StepFunction& c = gamma(j);
            const IntervalIndex ci = c.locate(in[j]);
            dst[j] += up[j + 1] * c.value_at(ci);
            c.accumulate_value_grad(ci, in[j], up[j + 1]);
          }
        }
        break;
      default:
        for (std::size_t j = 0; j < n; ++j) dst[j] = scale(factor(in[j], j), up[j]);
        break;
    }
  }
  return grad;
}

void ActivationOp::zero_grads() {
  std::fill(slope_grads_.begin(), slope_grads_.end(), 0.0);
  for (auto& f : alphas_) f.zero_grads();
  for (auto& f : betas_) f.zero_grads();
  for (auto& f : gammas_) f.zero_grads();
}

ParamList ActivationOp::collect_params() {
  ParamList out;
  switch (kind_) {
    case ActivationKind::kPReLU:
      out.push_back({"prelu_slope", ParamClass::kPReLUSlope, slopes_, slope_grads_});
      break;
    case ActivationKind::kDiagTMAF:
      append_step_params(out, alphas_, "alpha", ParamClass::kTmafAlpha);
      break;
    case ActivationKind::kTriDiagTMAF:
      append_step_params(out, alphas_, "alpha", ParamClass::kTmafAlpha);
      append_step_params(out, betas_, "beta", ParamClass::kTmafBeta);
      append_step_params(out, gammas_, "gamma", ParamClass::kTmafGamma);
      break;
    default:
      break;
  }
  return out;
}

}  // namespace tmaf
