#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "tlb/numerics/autograd.hpp"

namespace tlb {

struct AdamConfig {
  double learning_rate = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

// Moment estimates for one parameter list, in the order given to step().
struct AdamState {
  std::vector<Tensor> first_moment;
  std::vector<Tensor> second_moment;
  std::uint64_t step = 0;
};

// Bias-corrected Adam update of one tensor given its gradient and moments.
// `t` is the 1-based step index.
void adam_update(Tensor& param, const Tensor& grad, Tensor& m, Tensor& v, std::uint64_t t, const AdamConfig& cfg);

class Adam {
 public:
  explicit Adam(AdamConfig cfg) : cfg_(cfg) {}

  // One update of every parameter from its accumulated gradient. Parameters
  // with no gradient yet are treated as having a zero gradient.
  void step(std::span<Var> params);

  const AdamState& state() const { return state_; }
  const AdamConfig& config() const { return cfg_; }

 private:
  AdamConfig cfg_;
  AdamState state_;
};

}  // namespace tlb
