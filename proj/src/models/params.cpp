#include <cmath>

#include "json.hpp"
#include "tlb/error.hpp"
#include "tlb/models.hpp"
#include "tlb/rng.hpp"

namespace tlb {

std::string_view to_string(ModelKind kind) {
  switch (kind) {
    case ModelKind::v: return "v";
    case ModelKind::tri: return "tri";
    case ModelKind::tri_distill: return "tri-distill";
    case ModelKind::label_oracle: return "label-oracle";
  }
  return "?";
}

ModelKind parse_model_kind(std::string_view name) {
  if (name == "v") return ModelKind::v;
  if (name == "tri") return ModelKind::tri;
  if (name == "tri-distill" || name == "tri_distill") return ModelKind::tri_distill;
  if (name == "label-oracle" || name == "label_oracle") return ModelKind::label_oracle;
  throw ConfigError("unknown model kind '" + std::string(name) + "'");
}

void validate_model_config(const ModelConfig& cfg) {
  if (cfg.kind == ModelKind::label_oracle) return;
  if (cfg.input_dim == 0) throw ConfigError("model input_dim must be positive");
  if (cfg.d_model == 0 || cfg.num_heads == 0 || cfg.d_model % cfg.num_heads != 0) {
    throw ConfigError("d_model must be a positive multiple of num_heads");
  }
  if (cfg.d_model % 2 != 0) throw ConfigError("d_model must be even (sinusoidal encoding)");
  if (cfg.num_layers == 0 || cfg.ff_dim == 0) throw ConfigError("num_layers and ff_dim must be positive");
  if (cfg.dropout_p < 0.0 || cfg.dropout_p >= 1.0) throw ConfigError("dropout_p must lie in [0, 1)");
  if (cfg.distill_weight < 0.0 || cfg.ce_weight < 0.0) throw ConfigError("loss weights must be >= 0");
  if (cfg.text_input && cfg.d_text == 0) throw ConfigError("text_input requires d_text > 0");
  if (cfg.text_input && cfg.kind == ModelKind::v) throw ConfigError("text input is only defined for Tri models");
}

std::string model_config_to_json(const ModelConfig& cfg) {
  nlohmann::ordered_json j;
  j["kind"] = to_string(cfg.kind);
  j["input_dim"] = cfg.input_dim;
  j["d_model"] = cfg.d_model;
  j["num_heads"] = cfg.num_heads;
  j["num_layers"] = cfg.num_layers;
  j["ff_dim"] = cfg.ff_dim;
  j["dropout_p"] = cfg.dropout_p;
  j["use_video_pe"] = cfg.use_video_pe;
  j["use_encoders_2_3"] = cfg.use_encoders_2_3;
  j["distill_weight"] = cfg.distill_weight;
  j["ce_weight"] = cfg.ce_weight;
  j["text_input"] = cfg.text_input;
  j["d_text"] = cfg.d_text;
  return j.dump();
}

ModelConfig model_config_from_json(std::string_view text) {
  ModelConfig cfg;
  try {
    const auto j = nlohmann::json::parse(text);
    cfg.kind = parse_model_kind(j.at("kind").get<std::string>());
    cfg.input_dim = j.at("input_dim").get<std::size_t>();
    cfg.d_model = j.at("d_model").get<std::size_t>();
    cfg.num_heads = j.at("num_heads").get<std::size_t>();
    cfg.num_layers = j.at("num_layers").get<std::size_t>();
    cfg.ff_dim = j.at("ff_dim").get<std::size_t>();
    cfg.dropout_p = j.at("dropout_p").get<double>();
    cfg.use_video_pe = j.at("use_video_pe").get<bool>();
    cfg.use_encoders_2_3 = j.at("use_encoders_2_3").get<bool>();
    cfg.distill_weight = j.at("distill_weight").get<double>();
    cfg.ce_weight = j.at("ce_weight").get<double>();
    cfg.text_input = j.at("text_input").get<bool>();
    cfg.d_text = j.at("d_text").get<std::size_t>();
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("model config: ") + e.what());
  }
  validate_model_config(cfg);
  return cfg;
}

void ModelParams::add(const std::string& name, Tensor value) {
  if (!tensors_.emplace(name, Var::parameter(std::move(value))).second) {
    throw ConfigError("duplicate parameter '" + name + "'");
  }
}

const Var& ModelParams::at(const std::string& name) const {
  auto it = tensors_.find(name);
  if (it == tensors_.end()) throw ConfigError("model has no parameter '" + name + "'");
  return it->second;
}

std::size_t ModelParams::numel() const {
  std::size_t n = 0;
  for (const auto& [_, v] : tensors_) n += v.value().size();
  return n;
}

std::vector<Var> ModelParams::list() const {
  std::vector<Var> out;
  out.reserve(tensors_.size());
  for (const auto& [_, v] : tensors_) out.push_back(v);
  return out;
}

void ModelParams::zero_grad() {
  for (auto& [_, v] : tensors_) v.zero_grad();
}

void ModelParams::set_trainable(bool on) {
  for (auto& [_, v] : tensors_) v.set_requires_grad(on);
}

ModelParams ModelParams::clone() const {
  ModelParams out;
  for (const auto& [name, v] : tensors_) {
    out.add(name, v.value());
    out.tensors_.at(name).set_requires_grad(v.requires_grad());
  }
  return out;
}

namespace {

Tensor xavier(Rng& rng, std::size_t fan_in, std::size_t fan_out) {
  const double a = std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
  Tensor t({fan_in, fan_out});
  for (double& v : t.values()) v = rng.uniform(-a, a);
  return t;
}

// `final_bias` is off for the node-only encoder: a bias shared by every node
// representation shifts all of a video's logits equally and never gets a
// gradient.
void add_encoder(ModelParams& p, Rng& rng, const std::string& prefix, const ModelConfig& cfg,
                 bool final_bias = true) {
  const std::size_t d = cfg.d_model;
  for (std::size_t l = 0; l < cfg.num_layers; ++l) {
    const std::string L = prefix + ".l" + std::to_string(l) + ".";
    p.add(L + "ln1.g", Tensor({d}, 1.0));
    p.add(L + "ln1.b", Tensor({d}));
    p.add(L + "attn.wq", xavier(rng, d, d));
    p.add(L + "attn.wk", xavier(rng, d, d));
    p.add(L + "attn.wv", xavier(rng, d, d));
    p.add(L + "attn.bv", Tensor({d}));
    p.add(L + "attn.wo", xavier(rng, d, d));
    p.add(L + "attn.bo", Tensor({d}));
    p.add(L + "ln2.g", Tensor({d}, 1.0));
    p.add(L + "ln2.b", Tensor({d}));
    p.add(L + "ff.w1", xavier(rng, d, cfg.ff_dim));
    p.add(L + "ff.b1", Tensor({cfg.ff_dim}));
    p.add(L + "ff.w2", xavier(rng, cfg.ff_dim, d));
    p.add(L + "ff.b2", Tensor({d}));
  }
  p.add(prefix + ".lnf.g", Tensor({d}, 1.0));
  if (final_bias) p.add(prefix + ".lnf.b", Tensor({d}));
}

}  // namespace

Model init_model(const ModelConfig& cfg, std::uint64_t seed) {
  validate_model_config(cfg);
  Model m{cfg, {}};
  if (cfg.kind == ModelKind::label_oracle) return m;
  Rng rng(seed);
  auto& p = m.params;
  const std::size_t d = cfg.d_model;
  p.add("input.w", xavier(rng, cfg.input_dim, d));
  p.add("input.b", Tensor({d}));
  add_encoder(p, rng, "enc1", cfg);
  if (cfg.kind == ModelKind::v) {
    p.add("head.w", xavier(rng, d, kNumClasses));
    p.add("head.b", Tensor({kNumClasses}));
    return m;
  }
  p.add("node.embed", xavier(rng, kNumClasses, d));
  p.add("node.pe", xavier(rng, kNumClasses, d));
  if (cfg.use_encoders_2_3) {
    add_encoder(p, rng, "enc2", cfg, false);
    add_encoder(p, rng, "enc3", cfg);
  }
  p.add("score.wq", xavier(rng, d, d));
  p.add("score.wk", xavier(rng, d, d));
  if (cfg.text_input) p.add("text.w", xavier(rng, cfg.d_text, d));
  return m;
}

Checkpoint model_to_checkpoint(const Model& m) {
  Checkpoint c;
  c.header = model_config_to_json(m.config);
  for (const auto& [name, v] : m.params.entries()) c.tensors.emplace(name, v.value());
  return c;
}

Model model_from_checkpoint(const Checkpoint& ckpt) {
  Model m{model_config_from_json(ckpt.header), {}};
  // Shapes must match what the config implies.
  const Model reference = init_model(m.config, 0);
  if (reference.params.size() != ckpt.tensors.size()) {
    throw DimensionError("checkpoint holds " + std::to_string(ckpt.tensors.size()) + " tensors, config implies " +
                         std::to_string(reference.params.size()));
  }
  for (const auto& [name, ref] : reference.params.entries()) {
    auto it = ckpt.tensors.find(name);
    if (it == ckpt.tensors.end()) throw DimensionError("checkpoint lacks tensor '" + name + "'");
    if (it->second.shape() != ref.shape()) {
      throw DimensionError("checkpoint tensor '" + name + "' has shape " + shape_str(it->second.shape()) +
                           ", expected " + shape_str(ref.shape()));
    }
    m.params.add(name, it->second);
  }
  return m;
}

}  // namespace tlb
