#pragma once

#include <cstddef>
#include <functional>
#include <string>
#include <vector>

#include "tmaf/la.hpp"
#include "tmaf/network.hpp"
#include "tmaf/optim.hpp"

namespace tmaf {

/// Loss of a prediction batch, with its gradient.
using LossFn = std::function<LossResult(const Batch& prediction)>;

struct GradcheckOptions {
  double step = 1e-5;
  double tolerance = 1e-6;
  /// Relative error is |analytic - numeric| / max(|analytic|, |numeric|, floor).
  double denominator_floor = 1e-3;
  /// Entries whose +h or -h probe moves an activation input into another
  /// interval have no valid central difference and are skipped. The check
  /// fails when more than this fraction of all entries is skipped.
  double max_skipped_fraction = 0.25;
  /// Test seam: runs after the analytic backward, before comparison.
  std::function<void(Network&)> after_backward;
};

struct GradcheckClassReport {
  std::string name;  // ParamClass name, or "input"
  std::size_t count = 0;    // entries compared
  std::size_t skipped = 0;  // entries whose probes crossed a breakpoint
  double max_rel_error = 0.0;
  std::string worst;  // "<block>[<index>]" of the largest error, with both values
};

struct GradcheckReport {
  std::vector<GradcheckClassReport> classes;
  double max_rel_error = 0.0;
  double tolerance = 0.0;
  std::size_t skipped = 0;
  double skipped_fraction = 0.0;
  bool passed = false;

  std::string to_text() const;
};

/// Compares backward() against central finite differences of `loss` for every
/// parameter and every input entry. Forward passes run in train mode; batch
/// norm running statistics are restored afterwards. Passing needs every error
/// below tolerance, at least one compared entry per class and a skipped
/// fraction within bounds.
GradcheckReport check_gradients(Network& net, const Batch& x, const LossFn& loss,
                                const GradcheckOptions& options = {});

/// Per-sample distance from every pre-activation to the nearest kink of the
/// activation it feeds (breakpoints for TMAF, 0 for the ReLU family). Uses a
/// train-mode forward, so batch statistics of `x` as a whole apply.
std::vector<double> kink_distances(Network& net, const Batch& x);

/// Smallest batch standard deviation seen by any batch-norm layer on `x`
/// (train mode); infinity without batch norm. Central differences lose
/// accuracy roughly as (step / std)^2, so tiny values flag a poorly
/// conditioned check point.
double min_batch_norm_std(Network& net, const Batch& x);

/// Scales the affine row feeding each batch-norm neuron whose batch std on x
/// is below min_std so that the std becomes min_std. Central differences
/// through a normalisation with a tiny std lose accuracy to (h/std)^2
/// truncation. Batch norm cancels the scale except through eps, so the check
/// point stays a typical one. Returns the number of row scalings applied.
std::size_t condition_batch_norm_inputs(Network& net, const Batch& x, double min_std);

/// Greedily grows a subset of the rows of `x`, in order, accepting a row
/// only if every pre-activation of the enlarged subset (a train-mode forward
/// on the subset, so batch statistics are those of the subset) stays at least
/// `margin` from a kink. Returns at most `max_rows` indices; may be empty.
std::vector<std::size_t> rows_off_kinks(Network& net, const Batch& x, double margin,
                                        std::size_t max_rows = static_cast<std::size_t>(-1));

}  // namespace tmaf
