#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <span>
#include <vector>

#include "tlb/numerics/tensor.hpp"

namespace tlb {

namespace detail {
struct Node {
  Tensor value;
  Tensor grad;  // empty until something flows into it
  bool requires_grad = false;
  std::vector<std::shared_ptr<Node>> parents;
  std::function<void(Node&)> backward;

  Tensor& grad_buffer();
};
}  // namespace detail

// Handle onto a value in the computation graph. Copies share the node, so a
// parameter Var held by a model and the one captured by a graph are the same.
class Var {
 public:
  Var() = default;

  static Var constant(Tensor value);
  static Var parameter(Tensor value);

  const Tensor& value() const { return node_->value; }
  Tensor& mutable_value() { return node_->value; }
  const Shape& shape() const { return node_->value.shape(); }

  bool requires_grad() const { return node_ != nullptr && node_->requires_grad; }
  void set_requires_grad(bool on) { node_->requires_grad = on; }

  // Empty tensor when no gradient has reached this node yet.
  const Tensor& grad() const { return node_->grad; }
  void zero_grad();

  bool defined() const { return node_ != nullptr; }

  // Creates a node whose parents are `inputs`. `backward` is dropped when no
  // input requires a gradient.
  static Var from_op(Tensor value, std::vector<Var> inputs, std::function<void(detail::Node&)> backward);

  detail::Node& node() const { return *node_; }
  const std::shared_ptr<detail::Node>& node_ptr() const { return node_; }

 private:
  explicit Var(std::shared_ptr<detail::Node> node) : node_(std::move(node)) {}
  std::shared_ptr<detail::Node> node_;
};

// Reverse sweep from a scalar loss. Gradients accumulate into every
// requires_grad leaf; call zero_grad between steps to reset.
void backward(const Var& loss);

// Dropout randomness is a pure function of (seed, stream, element index).
struct DropoutStream {
  std::uint64_t seed = 0;
  std::uint64_t stream = 0;
};

namespace ops {

Var matmul(const Var& a, const Var& b);     // [m x k] * [k x n]
Var matmul_nt(const Var& a, const Var& b);  // [m x k] * [n x k]^T
Var transpose(const Var& a);
Var add(const Var& a, const Var& b);
Var sub(const Var& a, const Var& b);
Var mul(const Var& a, const Var& b);  // elementwise
Var add_row(const Var& a, const Var& row);  // row broadcast over [m x n]
Var mul_row(const Var& a, const Var& row);
Var scale(const Var& a, double s);
Var concat_rows(std::span<const Var> parts);
Var concat_cols(std::span<const Var> parts);
Var slice_rows(const Var& a, std::size_t begin, std::size_t end);
Var slice_cols(const Var& a, std::size_t begin, std::size_t end);
Var relu(const Var& a);
// Inverted dropout; identity when !training or p == 0.
Var dropout(const Var& a, double p, bool training, DropoutStream stream);
// Softmax along `axis` of a 2-D tensor (1-D inputs are one row). `keep`, when
// non-empty, has one entry per element; 0 entries get probability exactly 0.
Var masked_softmax(const Var& a, std::span<const std::uint8_t> keep = {}, int axis = -1);
Var log_softmax(const Var& a);  // along the last axis
// Normalization without affine terms; variance epsilon 1e-5.
Var layer_norm(const Var& a, int axis = -1);
Var sum(const Var& a);
Var mean(const Var& a);
Var dot(const Var& a, const Var& b);
// Mean over rows of -a[r, targets[r]].
Var nll(const Var& log_probs, std::span<const std::size_t> targets);
// Mean over elements of (a - b)^2; b is treated as a constant.
Var mean_squared_distance(const Var& a, const Var& target);

inline constexpr double kLayerNormEps = 1e-5;

}  // namespace ops
}  // namespace tlb
