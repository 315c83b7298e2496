#include "morphseg/autodiff/gradcheck.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace morphseg::ad {

namespace {

double evaluate(const ScalarFunction& f, const std::vector<Tensor>& inputs) {
  Tape tape;
  std::vector<Node> nodes;
  nodes.reserve(inputs.size());
  for (const Tensor& t : inputs) nodes.push_back(tape.constant(t));
  return f(tape, nodes).value()[0];
}

}  // namespace

GradCheckResult finite_difference_check(const ScalarFunction& f, std::span<const Tensor> inputs,
                                        double eps, FiniteDifference scheme) {
  if (!(eps > 0.0)) throw std::invalid_argument("finite_difference_check: eps must be positive");

  std::vector<Tensor> analytic;
  {
    Tape tape;
    std::vector<Node> nodes;
    nodes.reserve(inputs.size());
    for (const Tensor& t : inputs) nodes.push_back(tape.variable(t));
    Node loss = f(tape, nodes);
    tape.backward(loss);
    for (const Node& n : nodes) analytic.push_back(n.grad());
  }

  GradCheckResult result;
  bool first = true;
  std::vector<Tensor> probe(inputs.begin(), inputs.end());
  for (std::size_t i = 0; i < probe.size(); ++i) {
    for (std::size_t k = 0; k < probe[i].size(); ++k) {
      const double original = probe[i][k];
      // Divides by the representable step, not the nominal one.
      auto central = [&](double h) {
        const double hi = original + h, lo = original - h;
        probe[i][k] = hi;
        const double up = evaluate(f, probe);
        probe[i][k] = lo;
        const double down = evaluate(f, probe);
        probe[i][k] = original;
        return (up - down) / (hi - lo);
      };
      const double numeric = scheme == FiniteDifference::Central
                                 ? central(eps)
                                 : (4.0 * central(eps / 2.0) - central(eps)) / 3.0;
      const double a = analytic[i][k];
      const double err = std::abs(a - numeric) / std::max(1e-8, std::abs(a) + std::abs(numeric));
      if (first || err > result.max_relative_error) {
        first = false;
        result = {err, i, k, a, numeric};
      }
    }
  }
  return result;
}

}  // namespace morphseg::ad
