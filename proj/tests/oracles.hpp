#pragma once

// Reference implementations used only by tests. They deliberately avoid the
// library's kernels: plain loops, linear scans, explicit matrices.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <vector>

#include "tmaf/la.hpp"
#include "tmaf/network.hpp"
#include "tmaf/rng.hpp"

namespace tmaf::oracle {

inline Matrix naive_matmul(const Matrix& a, const Matrix& b) {
  Matrix out(a.rows(), b.cols());
  for (std::size_t i = 0; i < a.rows(); ++i) {
    for (std::size_t j = 0; j < b.cols(); ++j) {
      double s = 0.0;
      for (std::size_t k = 0; k < a.cols(); ++k) s += a(i, k) * b(k, j);
      out(i, j) = s;
    }
  }
  return out;
}

inline Matrix random_matrix(std::size_t rows, std::size_t cols, Rng& rng, double lo = -1.0,
                            double hi = 1.0) {
  Matrix m(rows, cols);
  for (double& v : m.data()) v = rng.uniform(lo, hi);
  return m;
}

/// Interval index by scanning intervals left to right: (-inf, s1], (s1, s2], ...
inline std::size_t linear_locate(const std::vector<double>& breakpoints, double s) {
  for (std::size_t j = 0; j < breakpoints.size(); ++j) {
    if (s <= breakpoints[j]) return j;
  }
  return breakpoints.size();
}

inline double step_value(const StepFunction& f, double s) {
  std::vector<double> bp(f.breakpoints().begin(), f.breakpoints().end());
  return f.values()[linear_locate(bp, s)];
}

/// The activation as an explicit n x n matrix acting on y.
inline std::vector<double> activation_matrix_apply(const ActivationOp& op,
                                                   const std::vector<double>& y) {
  const std::size_t n = y.size();
  std::vector<double> m(n * n, 0.0);
  for (std::size_t j = 0; j < n; ++j) {
    double diag = 0.0;
    switch (op.kind()) {
      case ActivationKind::kReLU: diag = y[j] > 0 ? 1.0 : 0.0; break;
      case ActivationKind::kLeakyReLU: diag = y[j] > 0 ? 1.0 : op.leaky_slope(); break;
      case ActivationKind::kPReLU: diag = y[j] > 0 ? 1.0 : op.prelu_slopes()[j]; break;
      default: diag = step_value(op.alpha(j), y[j]); break;
    }
    m[j * n + j] = diag;
    if (op.kind() == ActivationKind::kTriDiagTMAF) {
      if (j > 0) m[(j - 1) * n + j] = step_value(op.beta(j), y[j]);
      if (j + 1 < n) m[(j + 1) * n + j] = step_value(op.gamma(j), y[j]);
    }
  }
  std::vector<double> out(n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) out[i] += m[i * n + j] * y[j];
  }
  return out;
}

/// Network output evaluated sample by sample, layer by layer. Batch norm uses
/// running statistics (eval mode).
inline Batch reference_forward(const Network& net, const Batch& x) {
  Batch out(x.rows(), net.output_dim());
  for (std::size_t r = 0; r < x.rows(); ++r) {
    std::vector<double> v(x.row(r).begin(), x.row(r).end());
    for (const auto& layer : net.layers()) {
      const auto& w = layer.affine.w;
      std::vector<double> y(w.rows(), 0.0);
      for (std::size_t i = 0; i < w.rows(); ++i) {
        double s = layer.affine.b[i];
        for (std::size_t k = 0; k < w.cols(); ++k) s += w(i, k) * v[k];
        y[i] = s;
      }
      if (layer.bn) {
        const auto& bn = *layer.bn;
        for (std::size_t i = 0; i < y.size(); ++i) {
          y[i] = bn.scale[i] * (y[i] - bn.running_mean[i]) / std::sqrt(bn.running_var[i] + bn.eps) +
                 bn.shift[i];
        }
      }
      if (layer.activation) y = activation_matrix_apply(*layer.activation, y);
      v = std::move(y);
    }
    for (std::size_t j = 0; j < v.size(); ++j) out(r, j) = v[j];
  }
  return out;
}

inline double central_difference(const std::function<double(double)>& f, double x, double h) {
  return (f(x + h) - f(x - h)) / (2.0 * h);
}

/// |a - b| / max(|a|, |b|, floor).
inline double rel_error(double a, double b, double floor = 1e-3) {
  return std::abs(a - b) / std::max({std::abs(a), std::abs(b), floor});
}

}  // namespace tmaf::oracle
