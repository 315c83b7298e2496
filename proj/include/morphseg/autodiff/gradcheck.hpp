#pragma once

#include <functional>
#include <span>
#include <vector>

#include "morphseg/autodiff/tape.hpp"

namespace morphseg::ad {

/// Builds a scalar loss on `tape` from one node per input tensor.
using ScalarFunction = std::function<Node(Tape& tape, std::span<const Node> inputs)>;

struct GradCheckResult {
  double max_relative_error = 0.0;
  std::size_t worst_input = 0;
  std::size_t worst_entry = 0;
  double analytic = 0.0;
  double numeric = 0.0;
};

enum class FiniteDifference {
  /// D(eps) = (f(p+eps) - f(p-eps)) / 2eps.
  Central,
  /// (4 D(eps/2) - D(eps)) / 3, which cancels the eps^2 error term and so
  /// allows a larger step with less roundoff.
  Richardson,
};

/// Compares reverse-mode gradients of `f` against finite differences, entry
/// by entry. The error of one entry is
/// |analytic - numeric| / max(1e-8, |analytic| + |numeric|).
GradCheckResult finite_difference_check(const ScalarFunction& f, std::span<const Tensor> inputs,
                                        double eps = 1e-5,
                                        FiniteDifference scheme = FiniteDifference::Central);

}  // namespace morphseg::ad
