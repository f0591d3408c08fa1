#include "moco/optimizer.hpp"

#include <cmath>

#include "moco/errors.hpp"

namespace moco {

AdamState AdamState::zeros_like(const std::vector<tensor::Array<float>>& params) {
  AdamState s;
  for (const auto& p : params) {
    s.m.emplace_back(p.shape, 0.0f);
    s.v.emplace_back(p.shape, 0.0f);
  }
  return s;
}

void adam_update(std::vector<tensor::Array<float>>& params, const std::vector<tensor::Array<float>>& grads,
                 AdamState& state, const AdamConfig& c) {
  if (grads.size() != params.size() || state.m.size() != params.size() || state.v.size() != params.size())
    throw ContractViolation("adam_update: parameter, gradient and moment counts differ");
  ++state.step;
  const double bc1 = 1.0 - std::pow(c.beta1, static_cast<double>(state.step));
  const double bc2 = 1.0 - std::pow(c.beta2, static_cast<double>(state.step));
  for (std::size_t k = 0; k < params.size(); ++k) {
    auto& p = params[k].data;
    const auto& g = grads[k].data;
    auto& m = state.m[k].data;
    auto& v = state.v[k].data;
    if (g.size() != p.size() || m.size() != p.size() || v.size() != p.size())
      throw ContractViolation("adam_update: shape mismatch in slot " + std::to_string(k));
    for (std::size_t i = 0; i < p.size(); ++i) {
      const double gi = g[i];
      const double mi = c.beta1 * m[i] + (1.0 - c.beta1) * gi;
      const double vi = c.beta2 * v[i] + (1.0 - c.beta2) * gi * gi;
      m[i] = static_cast<float>(mi);
      v[i] = static_cast<float>(vi);
      const double step = (mi / bc1) / (std::sqrt(vi / bc2) + c.eps) + c.weight_decay * p[i];
      p[i] = static_cast<float>(p[i] - c.lr * step);
    }
  }
}

}  // namespace moco
