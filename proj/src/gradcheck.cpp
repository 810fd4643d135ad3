#include "tmaf/gradcheck.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <limits>
#include <map>
#include <numeric>
#include <optional>

#include "tmaf/data.hpp"

namespace tmaf {
namespace {

struct BufferSnapshot {
  std::vector<std::vector<double>> saved;

  explicit BufferSnapshot(Network& net) {
    for (const auto& b : net.collect_buffers()) saved.emplace_back(b.begin(), b.end());
  }
  void restore(Network& net) const {
    auto buffers = net.collect_buffers();
    for (std::size_t i = 0; i < buffers.size(); ++i) {
      std::copy(saved[i].begin(), saved[i].end(), buffers[i].begin());
    }
  }
};

double rel_error(double analytic, double numeric, double floor) {
  const double denom = std::max({std::abs(analytic), std::abs(numeric), floor});
  return std::abs(analytic - numeric) / denom;
}

void record(std::map<std::string, GradcheckClassReport>& by_class, const std::string& cls,
            const std::string& where, double err) {
  auto& r = by_class[cls];
  r.name = cls;
  ++r.count;
  if (r.count == 1 || err > r.max_rel_error) {
    r.max_rel_error = err;
    r.worst = where;
  }
}

// Interval index of every activation input, flattened over layers, rows and
// neurons. Two points with the same pattern lie on one linear piece of every
// activation, so the loss is smooth on the segment between them.
std::vector<std::uint32_t> activation_pattern(const Network& net, const GradientTape& tape) {
  std::vector<std::uint32_t> pattern;
  for (std::size_t l = 0; l < net.layers().size(); ++l) {
    const auto& op = net.layers()[l].activation;
    if (!op) continue;
    const Batch& y = tape.layers[l].activation->input;
    const std::size_t n = y.cols();
    for (std::size_t r = 0; r < y.rows(); ++r) {
      for (std::size_t j = 0; j < n; ++j) {
        const double v = y(r, j);
        switch (op->kind()) {
          case ActivationKind::kDiagTMAF:
            pattern.push_back(static_cast<std::uint32_t>(op->alpha(j).locate(v).j));
            break;
          case ActivationKind::kTriDiagTMAF:
            pattern.push_back(static_cast<std::uint32_t>(op->alpha(j).locate(v).j));
            if (j > 0) pattern.push_back(static_cast<std::uint32_t>(op->beta(j).locate(v).j));
            if (j + 1 < n) pattern.push_back(static_cast<std::uint32_t>(op->gamma(j).locate(v).j));
            break;
          default:
            pattern.push_back(v > 0.0 ? 1u : (v < 0.0 ? 0u : 2u));
            break;
        }
      }
    }
  }
  return pattern;
}

}  // namespace

std::string GradcheckReport::to_text() const {
  std::string out;
  char line[256];
  for (const auto& c : classes) {
    std::snprintf(line, sizeof(line),
                  "%-12s %6zu entries  max rel error %.3e  (worst %s)  %zu skipped\n",
                  c.name.c_str(), c.count, c.max_rel_error, c.worst.empty() ? "-" : c.worst.c_str(),
                  c.skipped);
    out += line;
  }
  std::snprintf(line, sizeof(line),
                "overall max rel error %.3e, tolerance %.1e, %zu skipped (%.2f%%): %s\n",
                max_rel_error, tolerance, skipped, 100.0 * skipped_fraction, passed ? "PASS" : "FAIL");
  out += line;
  return out;
}

GradcheckReport check_gradients(Network& net, const Batch& x, const LossFn& loss,
                                const GradcheckOptions& options) {
  const BufferSnapshot snapshot(net);

  net.zero_grads();
  auto [pred, tape] = net.forward(x, Mode::kTrain);
  const std::vector<std::uint32_t> base_pattern = activation_pattern(net, tape);
  const LossResult base = loss(pred);
  const Batch input_grad = net.backward(std::move(tape), base.grad);
  if (options.after_backward) options.after_backward(net);

  // Loss at a perturbed point, or nothing when the perturbation moved some
  // activation input into another interval.
  auto loss_at = [&](const Batch& input) -> std::optional<double> {
    auto [out, t] = net.forward(input, Mode::kTrain);
    if (activation_pattern(net, t) != base_pattern) return std::nullopt;
    return loss(out).loss;
  };

  std::map<std::string, GradcheckClassReport> by_class;
  const double h = options.step;
  auto compare = [&](const std::string& cls, const std::string& where, double analytic,
                     std::optional<double> up, std::optional<double> down) {
    if (!up || !down) {
      auto& r = by_class[cls];
      r.name = cls;
      ++r.skipped;
      return;
    }
    const double numeric = (*up - *down) / (2.0 * h);
    char detail[96];
    std::snprintf(detail, sizeof(detail), " analytic %.9e numeric %.9e", analytic, numeric);
    record(by_class, cls, where + detail, rel_error(analytic, numeric, options.denominator_floor));
  };
  for (const auto& block : net.collect_params()) {
    for (std::size_t i = 0; i < block.values.size(); ++i) {
      const double original = block.values[i];
      block.values[i] = original + h;
      const auto up = loss_at(x);
      block.values[i] = original - h;
      const auto down = loss_at(x);
      block.values[i] = original;
      compare(to_string(block.cls), block.name + "[" + std::to_string(i) + "]", block.grads[i], up,
              down);
    }
  }
  Batch probe = x;
  for (std::size_t i = 0; i < probe.size(); ++i) {
    const double original = probe.data()[i];
    probe.data()[i] = original + h;
    const auto up = loss_at(probe);
    probe.data()[i] = original - h;
    const auto down = loss_at(probe);
    probe.data()[i] = original;
    compare("input", "x[" + std::to_string(i) + "]", input_grad.data()[i], up, down);
  }
  snapshot.restore(net);

  GradcheckReport report;
  report.tolerance = options.tolerance;
  std::size_t compared = 0;
  bool every_class_compared = true;
  for (auto& [name, r] : by_class) {
    report.max_rel_error = std::max(report.max_rel_error, r.max_rel_error);
    report.skipped += r.skipped;
    compared += r.count;
    every_class_compared = every_class_compared && r.count > 0;
    report.classes.push_back(std::move(r));
  }
  const std::size_t total = compared + report.skipped;
  report.skipped_fraction = total == 0 ? 0.0 : static_cast<double>(report.skipped) / total;
  report.passed = report.max_rel_error < options.tolerance && every_class_compared &&
                  report.skipped_fraction <= options.max_skipped_fraction;
  return report;
}

std::vector<double> kink_distances(Network& net, const Batch& x) {
  const BufferSnapshot snapshot(net);
  auto [out, tape] = net.forward(x, Mode::kTrain);
  snapshot.restore(net);
  std::vector<double> dist(x.rows(), std::numeric_limits<double>::infinity());
  for (std::size_t l = 0; l < net.layers().size(); ++l) {
    const auto& op = net.layers()[l].activation;
    if (!op) continue;
    const Batch& y = tape.layers[l].activation->input;
    const std::size_t n = y.cols();
    for (std::size_t r = 0; r < y.rows(); ++r) {
      for (std::size_t j = 0; j < n; ++j) {
        const double v = y(r, j);
        double d;
        switch (op->kind()) {
          case ActivationKind::kDiagTMAF:
            d = op->alpha(j).distance_to_breakpoint(v);
            break;
          case ActivationKind::kTriDiagTMAF:
            d = op->alpha(j).distance_to_breakpoint(v);
            if (j > 0) d = std::min(d, op->beta(j).distance_to_breakpoint(v));
            if (j + 1 < n) d = std::min(d, op->gamma(j).distance_to_breakpoint(v));
            break;
          default:
            d = std::abs(v);
            break;
        }
        dist[r] = std::min(dist[r], d);
      }
    }
  }
  return dist;
}

double min_batch_norm_std(Network& net, const Batch& x) {
  double out = std::numeric_limits<double>::infinity();
  if (!net.spec().batch_norm) return out;
  const BufferSnapshot snapshot(net);
  auto [pred, tape] = net.forward(x, Mode::kTrain);
  snapshot.restore(net);
  for (const auto& entry : tape.layers) {
    if (!entry.bn) continue;
    for (double inv : entry.bn->inv_std) out = std::min(out, 1.0 / inv);
  }
  return out;
}

std::size_t condition_batch_norm_inputs(Network& net, const Batch& x, double min_std) {
  if (!net.spec().batch_norm) return 0;
  // Scaling one layer shifts the next layer's inputs slightly (through eps),
  // so passes repeat until nothing changes.
  constexpr int kMaxPasses = 8;
  std::size_t total = 0;
  for (int pass = 0; pass < kMaxPasses; ++pass) {
    const BufferSnapshot snapshot(net);
    auto [pred, tape] = net.forward(x, Mode::kTrain);
    snapshot.restore(net);
    std::size_t scaled = 0;
    for (std::size_t l = 0; l < tape.layers.size(); ++l) {
      if (!tape.layers[l].bn) continue;
      const BatchNormLayer& bn = *net.layers()[l].bn;
      AffineLayer& affine = net.layers()[l].affine;
      const Vector& inv_std = tape.layers[l].bn->inv_std;
      for (std::size_t i = 0; i < inv_std.size(); ++i) {
        // inv_std holds 1/sqrt(var + eps); recover the plain std.
        const double var = 1.0 / (inv_std[i] * inv_std[i]) - bn.eps;
        const double std = var > 0.0 ? std::sqrt(var) : 0.0;
        if (std >= min_std || std == 0.0) continue;
        const double c = min_std / std;
        for (double& w : affine.w.row(i)) w *= c;
        affine.b[i] *= c;
        ++scaled;
      }
    }
    total += scaled;
    if (scaled == 0) break;
  }
  return total;
}

std::vector<std::size_t> rows_off_kinks(Network& net, const Batch& x, double margin,
                                        std::size_t max_rows) {
  const std::size_t min_rows = net.spec().batch_norm ? 2 : 1;
  auto clear = [&](const std::vector<std::size_t>& rows) {
    const auto dist = kink_distances(net, gather_rows(x, rows));
    return std::all_of(dist.begin(), dist.end(), [&](double d) { return d >= margin; });
  };
  std::vector<std::size_t> keep;
  std::optional<std::size_t> pending;  // batch norm cannot score a lone row
  for (std::size_t i = 0; i < x.rows() && keep.size() < max_rows; ++i) {
    if (keep.empty() && min_rows == 2) {
      if (!pending) {
        pending = i;
        continue;
      }
      if (clear({*pending, i})) {
        keep = {*pending, i};
      } else {
        pending = i;
      }
      continue;
    }
    std::vector<std::size_t> trial = keep;
    trial.push_back(i);
    if (clear(trial)) keep = std::move(trial);
  }
  if (keep.empty() && min_rows == 1) return {};
  return keep;
}

}  // namespace tmaf
