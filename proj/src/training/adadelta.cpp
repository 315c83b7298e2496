#include "morphseg/training/adadelta.hpp"

#include <cmath>
#include <stdexcept>

namespace morphseg::training {

AdadeltaState::AdadeltaState(const ad::ParamSet& params) {
  for (ad::ParamId id = 0; id < params.size(); ++id) {
    mean_sq_grad.emplace_back(params.value(id).shape(), 0.0);
    mean_sq_delta.emplace_back(params.value(id).shape(), 0.0);
  }
}

void adadelta_step(ad::ParamSet& params, const ad::GradStore& grads, AdadeltaState& state, double rho,
                   double eps) {
  if (state.mean_sq_grad.size() != params.size()) {
    throw std::invalid_argument("adadelta_step: optimizer state does not match the parameters");
  }
  for (ad::ParamId id = 0; id < params.size(); ++id) {
    ad::Tensor& eg = state.mean_sq_grad[id];
    ad::Tensor& edx = state.mean_sq_delta[id];
    if (!grads.contains(id)) {
      for (std::size_t i = 0; i < eg.size(); ++i) {
        eg[i] *= rho;
        edx[i] *= rho;
      }
      continue;
    }
    const ad::Tensor& g = grads.at(id);
    if (!g.same_shape(params.value(id))) {
      throw ad::DimensionError("adadelta_step: gradient of '" + params.name(id) + "' has shape " +
                               g.shape_string());
    }
    ad::Tensor updated = params.value(id);
    for (std::size_t i = 0; i < g.size(); ++i) {
      eg[i] = rho * eg[i] + (1.0 - rho) * g[i] * g[i];
      const double delta = -std::sqrt(edx[i] + eps) / std::sqrt(eg[i] + eps) * g[i];
      edx[i] = rho * edx[i] + (1.0 - rho) * delta * delta;
      updated[i] += delta;
    }
    params.assign(id, std::move(updated));
  }
}

}  // namespace morphseg::training
