#pragma once

#include <functional>
#include <span>

#include "tlb/numerics/autograd.hpp"

namespace tlb {

struct GradCheckResult {
  double max_relative_error = 0.0;
  std::size_t worst_param = 0;
  std::size_t worst_index = 0;
  double analytic = 0.0;
  double numeric = 0.0;
};

// Compares reverse-mode gradients of `loss_fn` against central differences,
// coordinate by coordinate. Relative error uses max(|analytic|, |numeric|,
// 1e-8) as the denominator. `loss_fn` must be deterministic; it is re-run
// twice per coordinate with the parameter values perturbed in place.
GradCheckResult finite_diff_check(const std::function<Var()>& loss_fn, std::span<Var> params, double step = 1e-5);

}  // namespace tlb
