#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "tlb/data.hpp"
#include "tlb/numerics/autograd.hpp"
#include "tlb/numerics/checkpoint.hpp"

namespace tlb {

// Number of node classes the models choose from. Fixed by the formulation:
// the longest timeline in the benchmark has 24 nodes.
inline constexpr std::size_t kNumClasses = 24;

enum class ModelKind {
  v,            // V-Transformer: video encoder + 24-way classifier
  tri,          // Tri-Transformer: node/video encoders + pointer scoring
  tri_distill,  // Tri-Transformer student trained against a text-fed teacher
  label_oracle, // debug: emits the ground-truth labels; no parameters
};

std::string_view to_string(ModelKind kind);
ModelKind parse_model_kind(std::string_view name);  // "v", "tri", "tri-distill"/"tri_distill", "label-oracle"

struct ModelConfig {
  ModelKind kind = ModelKind::tri;
  std::size_t input_dim = 0;  // video embedding dimension D
  std::size_t d_model = 64;
  std::size_t num_heads = 4;
  std::size_t num_layers = 2;
  std::size_t ff_dim = 128;
  double dropout_p = 0.0;
  bool use_video_pe = true;
  bool use_encoders_2_3 = true;  // Tri only
  double distill_weight = 0.1;
  double ce_weight = 1.0;
  // Teacher: node text embeddings of dimension d_text are projected and
  // added to the first K node tokens.
  bool text_input = false;
  std::size_t d_text = 0;

  friend bool operator==(const ModelConfig&, const ModelConfig&) = default;
};

void validate_model_config(const ModelConfig& cfg);
std::string model_config_to_json(const ModelConfig& cfg);
ModelConfig model_config_from_json(std::string_view text);

// Named parameter tensors, ordered by name.
class ModelParams {
 public:
  void add(const std::string& name, Tensor value);
  const Var& at(const std::string& name) const;
  bool contains(const std::string& name) const { return tensors_.contains(name); }
  std::size_t size() const { return tensors_.size(); }
  std::size_t numel() const;

  // Handles in name order; they share storage with the params.
  std::vector<Var> list() const;
  const std::map<std::string, Var>& entries() const { return tensors_; }

  void zero_grad();
  // Frozen params never record gradients (teacher during distillation).
  void set_trainable(bool on);
  // Deep copy with independent storage.
  ModelParams clone() const;

 private:
  std::map<std::string, Var> tensors_;
};

struct Model {
  ModelConfig config;
  ModelParams params;
};

// Xavier-uniform weights, zero biases, unit layer-norm gains.
Model init_model(const ModelConfig& cfg, std::uint64_t seed);

Checkpoint model_to_checkpoint(const Model& m);
Model model_from_checkpoint(const Checkpoint& ckpt);

struct ForwardMode {
  bool training = false;
  std::uint64_t seed = 0;  // dropout stream
  std::uint64_t step = 0;
};

struct ForwardOutput {
  Var log_probs;            // [N x 24]
  Var encoder1_node_reps;   // [24 x d_model], Tri only
  Var encoder1_video_reps;  // [N x d_model], Tri only

  Tensor probabilities() const;
};

// Videos must already be in release order (see order_videos_by_release).
ForwardOutput v_transformer_forward(const TimelineSample& s, const ModelParams& params, const ModelConfig& cfg,
                                    ForwardMode mode);

// `text`, when given, holds K <= 24 node text embeddings (teacher input).
ForwardOutput tri_transformer_forward(const TimelineSample& s, const ModelParams& params, const ModelConfig& cfg,
                                      ForwardMode mode, const std::vector<std::vector<double>>* text = nullptr);

// Dispatch on cfg.kind; teachers read text from the sample.
ForwardOutput model_forward(const TimelineSample& s, const Model& m, ForwardMode mode);

// Mean over videos of -log p(label). Labels must lie in 1..24.
Var cross_entropy_loss(const Var& log_probs, const LabelVector& labels);

// Mean squared difference over encoder-1 node and video representations; the
// teacher side is a constant.
Var distillation_loss(const ForwardOutput& student, const ForwardOutput& teacher);

// Per-row argmax, 1-based; ties go to the smaller ID.
LabelVector predict_assignments(const Tensor& scores);

// Renumbers the distinct IDs by rank so the predicted timeline has no empty
// nodes: {1,1,4,2} -> {1,1,3,2}.
LabelVector postprocess_skip_empty(const LabelVector& raw);

// Release-order the sample, run the model in eval mode, decode, post-process,
// and map the IDs back to the stored video order.
LabelVector predict_sample(const Model& m, const TimelineSample& s);

}  // namespace tlb
