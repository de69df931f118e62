#include "tlb/numerics/gradcheck.hpp"

#include <algorithm>
#include <cmath>

namespace tlb {

GradCheckResult finite_diff_check(const std::function<Var()>& loss_fn, std::span<Var> params, double step) {
  for (Var& p : params) p.zero_grad();
  backward(loss_fn());
  std::vector<Tensor> analytic;
  analytic.reserve(params.size());
  for (const Var& p : params) analytic.push_back(p.grad().empty() ? Tensor(p.shape()) : p.grad());

  GradCheckResult result;
  for (std::size_t k = 0; k < params.size(); ++k) {
    Tensor& value = params[k].mutable_value();
    for (std::size_t i = 0; i < value.size(); ++i) {
      const double saved = value[i];
      value[i] = saved + step;
      const double up = loss_fn().value()[0];
      value[i] = saved - step;
      const double down = loss_fn().value()[0];
      value[i] = saved;
      const double numeric = (up - down) / (2.0 * step);
      const double a = analytic[k][i];
      const double denom = std::max({std::abs(a), std::abs(numeric), 1e-8});
      const double rel = std::abs(a - numeric) / denom;
      if (rel > result.max_relative_error) result = {rel, k, i, a, numeric};
    }
  }
  return result;
}

}  // namespace tlb
