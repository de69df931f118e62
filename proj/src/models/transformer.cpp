#include <cmath>
#include <limits>

#include "tlb/error.hpp"
#include "tlb/models.hpp"
#include "tlb/numerics/encoding.hpp"
#include "tlb/rng.hpp"

namespace tlb {
namespace {

using namespace ops;

// Hands out one dropout stream per call site, in forward order.
class DropoutSites {
 public:
  DropoutSites(const ModelConfig& cfg, ForwardMode mode) : p_(cfg.dropout_p), mode_(mode) {}

  Var apply(const Var& x) {
    const DropoutStream stream{mix64(mode_.seed) ^ mode_.step, next_++};
    return dropout(x, p_, mode_.training, stream);
  }

 private:
  double p_;
  ForwardMode mode_;
  std::uint64_t next_ = 0;
};

Var linear(const Var& x, const Var& w, const Var& b) { return add_row(matmul(x, w), b); }

Var norm(const Var& x, const ModelParams& p, const std::string& prefix) {
  const Var scaled = mul_row(layer_norm(x), p.at(prefix + ".g"));
  return p.contains(prefix + ".b") ? add_row(scaled, p.at(prefix + ".b")) : scaled;
}

Var self_attention(const Var& x, const ModelParams& p, const std::string& L, const ModelConfig& cfg) {
  const std::size_t heads = cfg.num_heads;
  const std::size_t dh = cfg.d_model / heads;
  const double inv_sqrt = 1.0 / std::sqrt(static_cast<double>(dh));
  const Var q = matmul(x, p.at(L + "attn.wq"));
  const Var k = matmul(x, p.at(L + "attn.wk"));
  const Var v = linear(x, p.at(L + "attn.wv"), p.at(L + "attn.bv"));
  std::vector<Var> outs;
  outs.reserve(heads);
  for (std::size_t h = 0; h < heads; ++h) {
    const Var qh = slice_cols(q, h * dh, (h + 1) * dh);
    const Var kh = slice_cols(k, h * dh, (h + 1) * dh);
    const Var vh = slice_cols(v, h * dh, (h + 1) * dh);
    const Var weights = masked_softmax(scale(matmul_nt(qh, kh), inv_sqrt));
    outs.push_back(matmul(weights, vh));
  }
  const Var merged = heads == 1 ? outs.front() : concat_cols(outs);
  return linear(merged, p.at(L + "attn.wo"), p.at(L + "attn.bo"));
}

// Pre-norm encoder stack with a final layer norm.
Var encode(Var x, const ModelParams& p, const std::string& prefix, const ModelConfig& cfg, DropoutSites& drop) {
  for (std::size_t l = 0; l < cfg.num_layers; ++l) {
    const std::string L = prefix + ".l" + std::to_string(l) + ".";
    x = add(x, drop.apply(self_attention(norm(x, p, L + "ln1"), p, L, cfg)));
    const Var hidden = relu(linear(norm(x, p, L + "ln2"), p.at(L + "ff.w1"), p.at(L + "ff.b1")));
    x = add(x, drop.apply(linear(drop.apply(hidden), p.at(L + "ff.w2"), p.at(L + "ff.b2"))));
  }
  return norm(x, p, prefix + ".lnf");
}

Var video_tokens(const TimelineSample& s, const ModelParams& p, const ModelConfig& cfg) {
  if (!s.has_embeddings()) {
    throw InputError("topic " + s.topic_id + " has no video embeddings (metrics-only data cannot feed a model)");
  }
  const std::size_t n = s.videos.size();
  Tensor emb({n, cfg.input_dim});
  for (std::size_t i = 0; i < n; ++i) {
    const auto& e = s.videos[i].embedding;
    if (e.size() != cfg.input_dim) {
      throw DimensionError("topic " + s.topic_id + ": embedding dimension " + std::to_string(e.size()) +
                           ", model expects " + std::to_string(cfg.input_dim));
    }
    std::copy(e.begin(), e.end(), emb.row(i).begin());
  }
  Var x = linear(Var::constant(std::move(emb)), p.at("input.w"), p.at("input.b"));
  if (cfg.use_video_pe) x = add(x, Var::constant(sinusoidal_pe(n, cfg.d_model)));
  return x;
}

Var node_tokens(const ModelParams& p, const ModelConfig& cfg, const std::vector<std::vector<double>>* text) {
  Var nodes = add(p.at("node.embed"), p.at("node.pe"));
  if (text == nullptr) return nodes;
  const std::size_t k = text->size();
  if (k > kNumClasses) {
    throw InputError("teacher given " + std::to_string(k) + " node texts; at most " + std::to_string(kNumClasses));
  }
  if (k == 0) return nodes;
  Tensor t({k, cfg.d_text});
  for (std::size_t i = 0; i < k; ++i) {
    if ((*text)[i].size() != cfg.d_text) {
      throw DimensionError("node text embedding dimension " + std::to_string((*text)[i].size()) +
                           ", model expects " + std::to_string(cfg.d_text));
    }
    std::copy((*text)[i].begin(), (*text)[i].end(), t.row(i).begin());
  }
  const Var projected = matmul(Var::constant(std::move(t)), p.at("text.w"));
  const Var head = add(slice_rows(nodes, 0, k), projected);
  if (k == kNumClasses) return head;
  const std::vector<Var> parts{head, slice_rows(nodes, k, kNumClasses)};
  return concat_rows(parts);
}

}  // namespace

Tensor ForwardOutput::probabilities() const {
  Tensor t = log_probs.value();
  for (double& v : t.values()) v = std::exp(v);
  return t;
}

ForwardOutput v_transformer_forward(const TimelineSample& s, const ModelParams& params, const ModelConfig& cfg,
                                    ForwardMode mode) {
  DropoutSites drop(cfg, mode);
  const Var x = drop.apply(video_tokens(s, params, cfg));
  const Var h = encode(x, params, "enc1", cfg, drop);
  ForwardOutput out;
  out.log_probs = log_softmax(linear(h, params.at("head.w"), params.at("head.b")));
  return out;
}

ForwardOutput tri_transformer_forward(const TimelineSample& s, const ModelParams& params, const ModelConfig& cfg,
                                      ForwardMode mode, const std::vector<std::vector<double>>* text) {
  DropoutSites drop(cfg, mode);
  const Var videos = video_tokens(s, params, cfg);
  const Var nodes = node_tokens(params, cfg, text);
  const std::size_t n = videos.value().rows();
  const std::vector<Var> seq_parts{nodes, videos};
  const Var joint = encode(drop.apply(concat_rows(seq_parts)), params, "enc1", cfg, drop);

  ForwardOutput out;
  out.encoder1_node_reps = slice_rows(joint, 0, kNumClasses);
  out.encoder1_video_reps = slice_rows(joint, kNumClasses, kNumClasses + n);
  Var node_reps = out.encoder1_node_reps;
  Var video_reps = out.encoder1_video_reps;
  if (cfg.use_encoders_2_3) {
    node_reps = encode(node_reps, params, "enc2", cfg, drop);
    video_reps = encode(video_reps, params, "enc3", cfg, drop);
  }
  const Var q = matmul(video_reps, params.at("score.wq"));
  const Var k = matmul(node_reps, params.at("score.wk"));
  const Var logits = scale(matmul_nt(q, k), 1.0 / std::sqrt(static_cast<double>(cfg.d_model)));
  out.log_probs = log_softmax(logits);
  return out;
}

ForwardOutput model_forward(const TimelineSample& s, const Model& m, ForwardMode mode) {
  switch (m.config.kind) {
    case ModelKind::v:
      return v_transformer_forward(s, m.params, m.config, mode);
    case ModelKind::tri:
    case ModelKind::tri_distill: {
      const std::vector<std::vector<double>>* text = nullptr;
      if (m.config.text_input) {
        if (!s.node_text_embeddings) {
          throw InputError("topic " + s.topic_id + " lacks node_text_embeddings required by a text-fed model");
        }
        text = &*s.node_text_embeddings;
      }
      return tri_transformer_forward(s, m.params, m.config, mode, text);
    }
    case ModelKind::label_oracle: {
      // Debug path: one-hot log-probabilities of the stored labels.
      Tensor lp({s.labels.size(), kNumClasses}, -std::numeric_limits<double>::infinity());
      for (std::size_t i = 0; i < s.labels.size(); ++i) {
        const NodeId a = s.labels[i];
        if (a < 1 || static_cast<std::size_t>(a) > kNumClasses) throw InputError("label outside 1..24");
        lp.at(i, static_cast<std::size_t>(a) - 1) = 0.0;
      }
      ForwardOutput out;
      out.log_probs = Var::constant(std::move(lp));
      return out;
    }
  }
  throw ConfigError("unhandled model kind");
}

}  // namespace tlb
