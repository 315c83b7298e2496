#pragma once

#include <vector>

#include "morphseg/autodiff/tape.hpp"

namespace morphseg::training {

/// Running averages E[g^2] and E[dx^2], zero-initialised, one per parameter.
struct AdadeltaState {
  explicit AdadeltaState(const ad::ParamSet& params);

  std::vector<ad::Tensor> mean_sq_grad;
  std::vector<ad::Tensor> mean_sq_delta;
};

/// One ADADELTA update:
///   E[g^2]  <- rho E[g^2] + (1 - rho) g^2
///   dx      =  -sqrt(E[dx^2] + eps) / sqrt(E[g^2] + eps) * g
///   E[dx^2] <- rho E[dx^2] + (1 - rho) dx^2
///   x       <- x + dx
/// Parameters without an entry in `grads` are treated as having zero
/// gradient.
void adadelta_step(ad::ParamSet& params, const ad::GradStore& grads, AdadeltaState& state,
                   double rho = 0.95, double eps = 1e-6);

}  // namespace morphseg::training
