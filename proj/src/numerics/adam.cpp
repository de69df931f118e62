#include "tlb/numerics/adam.hpp"

#include <cmath>

#include "tlb/error.hpp"

namespace tlb {

void adam_update(Tensor& param, const Tensor& grad, Tensor& m, Tensor& v, std::uint64_t t, const AdamConfig& cfg) {
  if (param.shape() != grad.shape() || param.shape() != m.shape() || param.shape() != v.shape()) {
    throw ShapeError("adam: shape mismatch " + shape_str(param.shape()) + " vs " + shape_str(grad.shape()));
  }
  const double c1 = 1.0 - std::pow(cfg.beta1, static_cast<double>(t));
  const double c2 = 1.0 - std::pow(cfg.beta2, static_cast<double>(t));
  for (std::size_t i = 0; i < param.size(); ++i) {
    const double g = grad[i];
    m[i] = cfg.beta1 * m[i] + (1.0 - cfg.beta1) * g;
    v[i] = cfg.beta2 * v[i] + (1.0 - cfg.beta2) * g * g;
    const double m_hat = m[i] / c1;
    const double v_hat = v[i] / c2;
    param[i] -= cfg.learning_rate * m_hat / (std::sqrt(v_hat) + cfg.epsilon);
  }
}

void Adam::step(std::span<Var> params) {
  if (state_.first_moment.empty()) {
    for (const Var& p : params) {
      state_.first_moment.emplace_back(p.shape());
      state_.second_moment.emplace_back(p.shape());
    }
  }
  if (state_.first_moment.size() != params.size()) {
    throw ShapeError("adam: parameter list changed size between steps");
  }
  ++state_.step;
  for (std::size_t i = 0; i < params.size(); ++i) {
    Var& p = params[i];
    const Tensor grad = p.grad().empty() ? Tensor(p.shape()) : p.grad();
    adam_update(p.mutable_value(), grad, state_.first_moment[i], state_.second_moment[i], state_.step, cfg_);
  }
}

}  // namespace tlb
