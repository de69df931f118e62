#include "tlb/numerics/autograd.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <unordered_set>

#include "tlb/error.hpp"
#include "tlb/numerics/kernels.hpp"
#include "tlb/rng.hpp"

namespace tlb {

Tensor& detail::Node::grad_buffer() {
  if (grad.size() != value.size()) grad = Tensor(value.shape());
  return grad;
}

Var Var::constant(Tensor value) {
  auto node = std::make_shared<detail::Node>();
  node->value = std::move(value);
  return Var(std::move(node));
}

Var Var::parameter(Tensor value) {
  Var v = constant(std::move(value));
  v.node_->requires_grad = true;
  return v;
}

void Var::zero_grad() {
  if (node_ && !node_->grad.empty()) node_->grad.fill(0.0);
}

Var Var::from_op(Tensor value, std::vector<Var> inputs, std::function<void(detail::Node&)> backward) {
  auto node = std::make_shared<detail::Node>();
  node->value = std::move(value);
  const bool needs = std::any_of(inputs.begin(), inputs.end(), [](const Var& v) { return v.requires_grad(); });
  if (needs) {
    node->requires_grad = true;
    node->parents.reserve(inputs.size());
    for (auto& in : inputs) node->parents.push_back(in.node_);
    node->backward = std::move(backward);
  }
  return Var(std::move(node));
}

void backward(const Var& loss) {
  if (loss.value().size() != 1) {
    throw ShapeError("backward needs a scalar loss, got shape " + shape_str(loss.shape()));
  }
  if (!loss.requires_grad()) return;

  // Iterative post-order DFS gives a topological order (parents first).
  std::vector<detail::Node*> order;
  std::unordered_set<detail::Node*> seen;
  std::vector<std::pair<detail::Node*, std::size_t>> stack;
  stack.emplace_back(&loss.node(), 0);
  seen.insert(&loss.node());
  while (!stack.empty()) {
    auto& [node, next] = stack.back();
    if (next < node->parents.size()) {
      detail::Node* parent = node->parents[next++].get();
      if (parent->requires_grad && seen.insert(parent).second) stack.emplace_back(parent, 0);
    } else {
      order.push_back(node);
      stack.pop_back();
    }
  }

  // Interior gradients restart from zero on every sweep; leaves accumulate.
  for (detail::Node* n : order) {
    if (n->backward) n->grad_buffer().fill(0.0);
  }
  loss.node().grad_buffer()[0] += 1.0;
  for (auto it = order.rbegin(); it != order.rend(); ++it) {
    detail::Node* n = *it;
    if (n->backward) n->backward(*n);
  }
}

namespace ops {
namespace {

void require_rank2(const Tensor& t, const char* op) {
  if (t.rank() != 1 && t.rank() != 2) {
    throw ShapeError(std::string(op) + ": expected a matrix, got shape " + shape_str(t.shape()));
  }
}

void require_same(const Tensor& a, const Tensor& b, const char* op) {
  if (a.shape() != b.shape()) {
    throw ShapeError(std::string(op) + ": shape mismatch " + shape_str(a.shape()) + " vs " + shape_str(b.shape()));
  }
}

Shape mat(std::size_t r, std::size_t c) { return {r, c}; }

// Grad accumulation helper for parent i when it takes part in the graph.
Tensor* parent_grad(detail::Node& self, std::size_t i) {
  auto& p = *self.parents[i];
  return p.requires_grad ? &p.grad_buffer() : nullptr;
}

const Tensor& parent_value(detail::Node& self, std::size_t i) { return self.parents[i]->value; }

}  // namespace

Var matmul(const Var& a, const Var& b) {
  const Tensor& av = a.value();
  const Tensor& bv = b.value();
  require_rank2(av, "matmul");
  require_rank2(bv, "matmul");
  if (av.cols() != bv.rows()) {
    throw ShapeError("matmul: shape mismatch " + shape_str(av.shape()) + " vs " + shape_str(bv.shape()));
  }
  const std::size_t m = av.rows(), k = av.cols(), n = bv.cols();
  Tensor out(mat(m, n));
  kernels::active().gemm_nn(m, n, k, av.data(), bv.data(), out.data());
  return Var::from_op(std::move(out), {a, b}, [m, k, n](detail::Node& self) {
    const double* g = self.grad.data();
    if (Tensor* ga = parent_grad(self, 0)) {
      kernels::active().gemm_nt(m, k, n, g, parent_value(self, 1).data(), ga->data());
    }
    if (Tensor* gb = parent_grad(self, 1)) {
      kernels::active().gemm_tn(k, n, m, parent_value(self, 0).data(), g, gb->data());
    }
  });
}

Var matmul_nt(const Var& a, const Var& b) {
  const Tensor& av = a.value();
  const Tensor& bv = b.value();
  require_rank2(av, "matmul_nt");
  require_rank2(bv, "matmul_nt");
  if (av.cols() != bv.cols()) {
    throw ShapeError("matmul_nt: shape mismatch " + shape_str(av.shape()) + " vs " + shape_str(bv.shape()));
  }
  const std::size_t m = av.rows(), k = av.cols(), n = bv.rows();
  Tensor out(mat(m, n));
  kernels::active().gemm_nt(m, n, k, av.data(), bv.data(), out.data());
  return Var::from_op(std::move(out), {a, b}, [m, k, n](detail::Node& self) {
    const double* g = self.grad.data();
    if (Tensor* ga = parent_grad(self, 0)) {
      kernels::active().gemm_nn(m, k, n, g, parent_value(self, 1).data(), ga->data());
    }
    if (Tensor* gb = parent_grad(self, 1)) {
      kernels::active().gemm_tn(n, k, m, g, parent_value(self, 0).data(), gb->data());
    }
  });
}

Var transpose(const Var& a) {
  const Tensor& av = a.value();
  require_rank2(av, "transpose");
  const std::size_t r = av.rows(), c = av.cols();
  Tensor out(mat(c, r));
  for (std::size_t i = 0; i < r; ++i)
    for (std::size_t j = 0; j < c; ++j) out.at(j, i) = av.at(i, j);
  return Var::from_op(std::move(out), {a}, [r, c](detail::Node& self) {
    Tensor* ga = parent_grad(self, 0);
    for (std::size_t i = 0; i < r; ++i)
      for (std::size_t j = 0; j < c; ++j) (*ga)[i * c + j] += self.grad[j * r + i];
  });
}

Var add(const Var& a, const Var& b) {
  require_same(a.value(), b.value(), "add");
  Tensor out = a.value();
  kernels::active().axpy(1.0, b.value().data(), out.data(), out.size());
  return Var::from_op(std::move(out), {a, b}, [](detail::Node& self) {
    for (std::size_t i = 0; i < 2; ++i) {
      if (Tensor* g = parent_grad(self, i)) kernels::active().axpy(1.0, self.grad.data(), g->data(), g->size());
    }
  });
}

Var sub(const Var& a, const Var& b) {
  require_same(a.value(), b.value(), "sub");
  Tensor out = a.value();
  kernels::active().axpy(-1.0, b.value().data(), out.data(), out.size());
  return Var::from_op(std::move(out), {a, b}, [](detail::Node& self) {
    if (Tensor* g = parent_grad(self, 0)) kernels::active().axpy(1.0, self.grad.data(), g->data(), g->size());
    if (Tensor* g = parent_grad(self, 1)) kernels::active().axpy(-1.0, self.grad.data(), g->data(), g->size());
  });
}

Var mul(const Var& a, const Var& b) {
  require_same(a.value(), b.value(), "mul");
  Tensor out = a.value();
  for (std::size_t i = 0; i < out.size(); ++i) out[i] *= b.value()[i];
  return Var::from_op(std::move(out), {a, b}, [](detail::Node& self) {
    const Tensor& av = parent_value(self, 0);
    const Tensor& bv = parent_value(self, 1);
    if (Tensor* g = parent_grad(self, 0))
      for (std::size_t i = 0; i < g->size(); ++i) (*g)[i] += self.grad[i] * bv[i];
    if (Tensor* g = parent_grad(self, 1))
      for (std::size_t i = 0; i < g->size(); ++i) (*g)[i] += self.grad[i] * av[i];
  });
}

Var add_row(const Var& a, const Var& row) {
  const Tensor& av = a.value();
  require_rank2(av, "add_row");
  if (row.value().size() != av.cols()) {
    throw ShapeError("add_row: shape mismatch " + shape_str(av.shape()) + " vs " + shape_str(row.shape()));
  }
  Tensor out = av;
  const std::size_t r = av.rows(), c = av.cols();
  for (std::size_t i = 0; i < r; ++i) kernels::active().axpy(1.0, row.value().data(), out.data() + i * c, c);
  return Var::from_op(std::move(out), {a, row}, [r, c](detail::Node& self) {
    if (Tensor* g = parent_grad(self, 0)) kernels::active().axpy(1.0, self.grad.data(), g->data(), g->size());
    if (Tensor* g = parent_grad(self, 1))
      for (std::size_t i = 0; i < r; ++i) kernels::active().axpy(1.0, self.grad.data() + i * c, g->data(), c);
  });
}

Var mul_row(const Var& a, const Var& row) {
  const Tensor& av = a.value();
  require_rank2(av, "mul_row");
  if (row.value().size() != av.cols()) {
    throw ShapeError("mul_row: shape mismatch " + shape_str(av.shape()) + " vs " + shape_str(row.shape()));
  }
  Tensor out = av;
  const std::size_t r = av.rows(), c = av.cols();
  for (std::size_t i = 0; i < r; ++i)
    for (std::size_t j = 0; j < c; ++j) out[i * c + j] *= row.value()[j];
  return Var::from_op(std::move(out), {a, row}, [r, c](detail::Node& self) {
    const Tensor& xv = parent_value(self, 0);
    const Tensor& wv = parent_value(self, 1);
    Tensor* ga = parent_grad(self, 0);
    Tensor* gw = parent_grad(self, 1);
    for (std::size_t i = 0; i < r; ++i) {
      for (std::size_t j = 0; j < c; ++j) {
        const double g = self.grad[i * c + j];
        if (ga) (*ga)[i * c + j] += g * wv[j];
        if (gw) (*gw)[j] += g * xv[i * c + j];
      }
    }
  });
}

Var scale(const Var& a, double s) {
  Tensor out = a.value();
  for (double& v : out.values()) v *= s;
  return Var::from_op(std::move(out), {a}, [s](detail::Node& self) {
    Tensor* g = parent_grad(self, 0);
    kernels::active().axpy(s, self.grad.data(), g->data(), g->size());
  });
}

Var concat_rows(std::span<const Var> parts) {
  if (parts.empty()) throw ShapeError("concat_rows: no inputs");
  const std::size_t c = parts.front().value().cols();
  std::size_t total = 0;
  for (const Var& p : parts) {
    require_rank2(p.value(), "concat_rows");
    if (p.value().cols() != c) {
      throw ShapeError("concat_rows: shape mismatch " + shape_str(parts.front().shape()) + " vs " +
                       shape_str(p.shape()));
    }
    total += p.value().rows();
  }
  Tensor out(mat(total, c));
  std::size_t offset = 0;
  for (const Var& p : parts) {
    std::copy(p.value().values().begin(), p.value().values().end(), out.data() + offset);
    offset += p.value().size();
  }
  return Var::from_op(std::move(out), std::vector<Var>(parts.begin(), parts.end()), [](detail::Node& self) {
    std::size_t off = 0;
    for (std::size_t i = 0; i < self.parents.size(); ++i) {
      const std::size_t n = self.parents[i]->value.size();
      if (Tensor* g = parent_grad(self, i)) kernels::active().axpy(1.0, self.grad.data() + off, g->data(), n);
      off += n;
    }
  });
}

Var concat_cols(std::span<const Var> parts) {
  if (parts.empty()) throw ShapeError("concat_cols: no inputs");
  const std::size_t r = parts.front().value().rows();
  std::size_t total = 0;
  for (const Var& p : parts) {
    require_rank2(p.value(), "concat_cols");
    if (p.value().rows() != r) {
      throw ShapeError("concat_cols: shape mismatch " + shape_str(parts.front().shape()) + " vs " +
                       shape_str(p.shape()));
    }
    total += p.value().cols();
  }
  Tensor out(mat(r, total));
  std::size_t offset = 0;
  for (const Var& p : parts) {
    const std::size_t c = p.value().cols();
    for (std::size_t i = 0; i < r; ++i) {
      std::copy_n(p.value().data() + i * c, c, out.data() + i * total + offset);
    }
    offset += c;
  }
  return Var::from_op(std::move(out), std::vector<Var>(parts.begin(), parts.end()), [r, total](detail::Node& self) {
    std::size_t off = 0;
    for (std::size_t k = 0; k < self.parents.size(); ++k) {
      const std::size_t c = self.parents[k]->value.cols();
      if (Tensor* g = parent_grad(self, k)) {
        for (std::size_t i = 0; i < r; ++i)
          kernels::active().axpy(1.0, self.grad.data() + i * total + off, g->data() + i * c, c);
      }
      off += c;
    }
  });
}

Var slice_rows(const Var& a, std::size_t begin, std::size_t end) {
  const Tensor& av = a.value();
  require_rank2(av, "slice_rows");
  if (begin > end || end > av.rows()) {
    throw ShapeError("slice_rows: range [" + std::to_string(begin) + ", " + std::to_string(end) +
                     ") outside shape " + shape_str(av.shape()));
  }
  const std::size_t c = av.cols();
  Tensor out(mat(end - begin, c));
  std::copy_n(av.data() + begin * c, out.size(), out.data());
  return Var::from_op(std::move(out), {a}, [begin, c](detail::Node& self) {
    Tensor* g = parent_grad(self, 0);
    kernels::active().axpy(1.0, self.grad.data(), g->data() + begin * c, self.grad.size());
  });
}

Var slice_cols(const Var& a, std::size_t begin, std::size_t end) {
  const Tensor& av = a.value();
  require_rank2(av, "slice_cols");
  if (begin > end || end > av.cols()) {
    throw ShapeError("slice_cols: range [" + std::to_string(begin) + ", " + std::to_string(end) +
                     ") outside shape " + shape_str(av.shape()));
  }
  const std::size_t r = av.rows(), c = av.cols(), w = end - begin;
  Tensor out(mat(r, w));
  for (std::size_t i = 0; i < r; ++i) std::copy_n(av.data() + i * c + begin, w, out.data() + i * w);
  return Var::from_op(std::move(out), {a}, [r, c, w, begin](detail::Node& self) {
    Tensor* g = parent_grad(self, 0);
    for (std::size_t i = 0; i < r; ++i)
      kernels::active().axpy(1.0, self.grad.data() + i * w, g->data() + i * c + begin, w);
  });
}

Var relu(const Var& a) {
  Tensor out = a.value();
  for (double& v : out.values()) v = v > 0.0 ? v : 0.0;
  return Var::from_op(std::move(out), {a}, [](detail::Node& self) {
    Tensor* g = parent_grad(self, 0);
    const Tensor& x = parent_value(self, 0);
    for (std::size_t i = 0; i < g->size(); ++i)
      if (x[i] > 0.0) (*g)[i] += self.grad[i];
  });
}

Var dropout(const Var& a, double p, bool training, DropoutStream stream) {
  if (p < 0.0 || p >= 1.0) throw ConfigError("dropout probability must lie in [0, 1)");
  if (!training || p == 0.0) return a;
  const double keep_scale = 1.0 / (1.0 - p);
  std::vector<double> mask(a.value().size());
  for (std::size_t i = 0; i < mask.size(); ++i) {
    mask[i] = counter_uniform(stream.seed, stream.stream, i) < p ? 0.0 : keep_scale;
  }
  Tensor out = a.value();
  for (std::size_t i = 0; i < out.size(); ++i) out[i] *= mask[i];
  return Var::from_op(std::move(out), {a}, [mask = std::move(mask)](detail::Node& self) {
    Tensor* g = parent_grad(self, 0);
    for (std::size_t i = 0; i < g->size(); ++i) (*g)[i] += self.grad[i] * mask[i];
  });
}

namespace {

Var softmax_last(const Var& a, std::span<const std::uint8_t> keep) {
  const Tensor& av = a.value();
  require_rank2(av, "masked_softmax");
  if (!keep.empty() && keep.size() != av.size()) {
    throw ShapeError("masked_softmax: mask has " + std::to_string(keep.size()) + " entries for shape " +
                     shape_str(av.shape()));
  }
  const std::size_t r = av.rows(), c = av.cols();
  Tensor out(av.shape());
  for (std::size_t i = 0; i < r; ++i) {
    double mx = -std::numeric_limits<double>::infinity();
    for (std::size_t j = 0; j < c; ++j)
      if (keep.empty() || keep[i * c + j]) mx = std::max(mx, av[i * c + j]);
    if (mx == -std::numeric_limits<double>::infinity()) continue;  // fully masked row stays 0
    double z = 0.0;
    for (std::size_t j = 0; j < c; ++j) {
      if (!keep.empty() && !keep[i * c + j]) continue;
      const double e = std::exp(av[i * c + j] - mx);
      out[i * c + j] = e;
      z += e;
    }
    for (std::size_t j = 0; j < c; ++j) out[i * c + j] /= z;
  }
  return Var::from_op(std::move(out), {a}, [r, c](detail::Node& self) {
    Tensor* g = parent_grad(self, 0);
    const Tensor& y = self.value;
    for (std::size_t i = 0; i < r; ++i) {
      const double* yr = y.data() + i * c;
      const double* gr = self.grad.data() + i * c;
      const double s = kernels::active().dot(yr, gr, c);
      for (std::size_t j = 0; j < c; ++j) (*g)[i * c + j] += yr[j] * (gr[j] - s);
    }
  });
}

Var layer_norm_last(const Var& a) {
  const Tensor& av = a.value();
  require_rank2(av, "layer_norm");
  const std::size_t r = av.rows(), c = av.cols();
  Tensor out(av.shape());
  std::vector<double> inv_std(r);
  for (std::size_t i = 0; i < r; ++i) {
    const double* x = av.data() + i * c;
    double mu = 0.0;
    for (std::size_t j = 0; j < c; ++j) mu += x[j];
    mu /= static_cast<double>(c);
    double var = 0.0;
    for (std::size_t j = 0; j < c; ++j) var += (x[j] - mu) * (x[j] - mu);
    var /= static_cast<double>(c);
    inv_std[i] = 1.0 / std::sqrt(var + kLayerNormEps);
    for (std::size_t j = 0; j < c; ++j) out[i * c + j] = (x[j] - mu) * inv_std[i];
  }
  return Var::from_op(std::move(out), {a}, [r, c, inv_std = std::move(inv_std)](detail::Node& self) {
    Tensor* g = parent_grad(self, 0);
    const Tensor& y = self.value;
    const double inv_c = 1.0 / static_cast<double>(c);
    for (std::size_t i = 0; i < r; ++i) {
      const double* yr = y.data() + i * c;
      const double* gr = self.grad.data() + i * c;
      double mean_g = 0.0;
      for (std::size_t j = 0; j < c; ++j) mean_g += gr[j];
      mean_g *= inv_c;
      const double mean_gy = kernels::active().dot(gr, yr, c) * inv_c;
      for (std::size_t j = 0; j < c; ++j) (*g)[i * c + j] += inv_std[i] * (gr[j] - mean_g - yr[j] * mean_gy);
    }
  });
}

bool is_last_axis(const Tensor& t, int axis) {
  if (axis == -1) return true;
  if (t.rank() <= 1) return axis == 0;
  if (axis == static_cast<int>(t.rank()) - 1) return true;
  if (axis == 0 && t.rank() == 2) return false;
  throw ShapeError("axis " + std::to_string(axis) + " out of range for shape " + shape_str(t.shape()));
}

std::vector<std::uint8_t> transposed_mask(std::span<const std::uint8_t> keep, std::size_t r, std::size_t c) {
  std::vector<std::uint8_t> out(keep.size());
  for (std::size_t i = 0; i < r; ++i)
    for (std::size_t j = 0; j < c; ++j) out[j * r + i] = keep[i * c + j];
  return out;
}

}  // namespace

Var masked_softmax(const Var& a, std::span<const std::uint8_t> keep, int axis) {
  if (is_last_axis(a.value(), axis)) return softmax_last(a, keep);
  const auto mask = keep.empty() ? std::vector<std::uint8_t>{}
                                 : transposed_mask(keep, a.value().rows(), a.value().cols());
  return transpose(softmax_last(transpose(a), mask));
}

Var layer_norm(const Var& a, int axis) {
  if (is_last_axis(a.value(), axis)) return layer_norm_last(a);
  return transpose(layer_norm_last(transpose(a)));
}

Var log_softmax(const Var& a) {
  const Tensor& av = a.value();
  require_rank2(av, "log_softmax");
  const std::size_t r = av.rows(), c = av.cols();
  Tensor out(av.shape());
  for (std::size_t i = 0; i < r; ++i) {
    const double* x = av.data() + i * c;
    const double mx = *std::max_element(x, x + c);
    double z = 0.0;
    for (std::size_t j = 0; j < c; ++j) z += std::exp(x[j] - mx);
    const double lse = mx + std::log(z);
    for (std::size_t j = 0; j < c; ++j) out[i * c + j] = x[j] - lse;
  }
  return Var::from_op(std::move(out), {a}, [r, c](detail::Node& self) {
    Tensor* g = parent_grad(self, 0);
    for (std::size_t i = 0; i < r; ++i) {
      const double* gr = self.grad.data() + i * c;
      double s = 0.0;
      for (std::size_t j = 0; j < c; ++j) s += gr[j];
      for (std::size_t j = 0; j < c; ++j) (*g)[i * c + j] += gr[j] - std::exp(self.value[i * c + j]) * s;
    }
  });
}

Var sum(const Var& a) {
  double s = 0.0;
  for (double v : a.value().values()) s += v;
  return Var::from_op(Tensor(Shape{}, std::vector<double>{s}), {a}, [](detail::Node& self) {
    Tensor* g = parent_grad(self, 0);
    const double gs = self.grad[0];
    for (double& v : g->values()) v += gs;
  });
}

Var mean(const Var& a) {
  if (a.value().size() == 0) throw ShapeError("mean of an empty tensor");
  return scale(sum(a), 1.0 / static_cast<double>(a.value().size()));
}

Var dot(const Var& a, const Var& b) {
  if (a.value().size() != b.value().size()) {
    throw ShapeError("dot: shape mismatch " + shape_str(a.shape()) + " vs " + shape_str(b.shape()));
  }
  const double s = kernels::active().dot(a.value().data(), b.value().data(), a.value().size());
  return Var::from_op(Tensor(Shape{}, std::vector<double>{s}), {a, b}, [](detail::Node& self) {
    const double gs = self.grad[0];
    if (Tensor* g = parent_grad(self, 0)) kernels::active().axpy(gs, parent_value(self, 1).data(), g->data(), g->size());
    if (Tensor* g = parent_grad(self, 1)) kernels::active().axpy(gs, parent_value(self, 0).data(), g->data(), g->size());
  });
}

Var nll(const Var& log_probs, std::span<const std::size_t> targets) {
  const Tensor& lp = log_probs.value();
  require_rank2(lp, "nll");
  const std::size_t r = lp.rows(), c = lp.cols();
  if (targets.size() != r) {
    throw ShapeError("nll: " + std::to_string(targets.size()) + " targets for shape " + shape_str(lp.shape()));
  }
  if (r == 0) throw ShapeError("nll: no rows");
  double s = 0.0;
  for (std::size_t i = 0; i < r; ++i) {
    if (targets[i] >= c) throw ShapeError("nll: target " + std::to_string(targets[i]) + " out of range");
    s -= lp[i * c + targets[i]];
  }
  const double inv = 1.0 / static_cast<double>(r);
  std::vector<std::size_t> idx(targets.begin(), targets.end());
  return Var::from_op(Tensor(Shape{}, std::vector<double>{s * inv}), {log_probs},
                      [idx = std::move(idx), c, inv](detail::Node& self) {
                        Tensor* g = parent_grad(self, 0);
                        const double gs = self.grad[0] * inv;
                        for (std::size_t i = 0; i < idx.size(); ++i) (*g)[i * c + idx[i]] -= gs;
                      });
}

Var mean_squared_distance(const Var& a, const Var& target) {
  require_same(a.value(), target.value(), "mean_squared_distance");
  const std::size_t n = a.value().size();
  if (n == 0) throw ShapeError("mean_squared_distance: empty tensors");
  std::vector<double> diff(n);
  double s = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    diff[i] = a.value()[i] - target.value()[i];
    s += diff[i] * diff[i];
  }
  const double inv = 1.0 / static_cast<double>(n);
  return Var::from_op(Tensor(Shape{}, std::vector<double>{s * inv}), {a},
                      [diff = std::move(diff), inv](detail::Node& self) {
                        Tensor* g = parent_grad(self, 0);
                        kernels::active().axpy(2.0 * inv * self.grad[0], diff.data(), g->data(), g->size());
                      });
}

}  // namespace ops
}  // namespace tlb
