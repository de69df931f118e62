#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <numeric>
#include <set>

#include "oracles.hpp"
#include "tlb/error.hpp"
#include "tlb/models.hpp"

namespace {

using namespace tlb;

TimelineSample random_sample(std::size_t n, std::size_t dim, int k, std::uint64_t seed) {
  Rng rng(seed);
  TimelineSample s;
  s.topic_id = "s" + std::to_string(seed);
  s.num_nodes = k;
  s.labels = testkit::random_partition(rng, n, k);
  for (std::size_t i = 0; i < n; ++i) {
    Video v{"v" + std::to_string(i), static_cast<std::int64_t>(rng.uniform_int(0, 1000)), {}, std::nullopt};
    for (std::size_t j = 0; j < dim; ++j) v.embedding.push_back(rng.normal());
    s.videos.push_back(std::move(v));
  }
  std::vector<std::vector<double>> text(static_cast<std::size_t>(k), std::vector<double>(4));
  for (auto& row : text) {
    for (double& x : row) x = rng.normal();
  }
  s.node_text_embeddings = std::move(text);
  return s;
}

ModelConfig config(ModelKind kind, std::size_t dim = 16) {
  ModelConfig cfg;
  cfg.kind = kind;
  cfg.input_dim = dim;
  return cfg;
}

void expect_distributions(const ForwardOutput& out, std::size_t rows) {
  const Tensor p = out.probabilities();
  ASSERT_EQ(p.shape(), (Shape{rows, kNumClasses}));
  for (std::size_t i = 0; i < rows; ++i) {
    const auto row = p.row(i);
    EXPECT_NEAR(std::accumulate(row.begin(), row.end(), 0.0), 1.0, 1e-9);
  }
}

TimelineSample permuted(const TimelineSample& s, const std::vector<std::size_t>& order) { return permute_sample(s, order); }

TEST(VTransformer, ShapesAndNormalization) {
  const Model m = init_model(config(ModelKind::v), 1);
  const TimelineSample s = random_sample(3, 16, 2, 1);
  expect_distributions(v_transformer_forward(s, m.params, m.config, {}), 3);
  ModelConfig drop = m.config;
  drop.dropout_p = 0.3;
  expect_distributions(v_transformer_forward(s, m.params, drop, ForwardMode{true, 4, 0}), 3);
}

TEST(VTransformer, DeterministicInEvalMode) {
  const Model m = init_model(config(ModelKind::v), 2);
  const TimelineSample s = random_sample(6, 16, 3, 2);
  EXPECT_EQ(v_transformer_forward(s, m.params, m.config, {}).log_probs.value(),
            v_transformer_forward(s, m.params, m.config, {}).log_probs.value());
}

TEST(VTransformer, EquivariantWithoutPositionalEncoding) {
  ModelConfig cfg = config(ModelKind::v);
  cfg.use_video_pe = false;
  const Model m = init_model(cfg, 3);
  const TimelineSample s = random_sample(7, 16, 3, 3);
  const std::vector<std::size_t> order{4, 0, 6, 2, 1, 5, 3};
  const Tensor a = v_transformer_forward(s, m.params, cfg, {}).log_probs.value();
  const Tensor b = v_transformer_forward(permuted(s, order), m.params, cfg, {}).log_probs.value();
  for (std::size_t i = 0; i < order.size(); ++i) {
    for (std::size_t c = 0; c < kNumClasses; ++c) EXPECT_NEAR(b.at(i, c), a.at(order[i], c), 1e-12);
  }

  // With the encoding on, position matters.
  const Model pe = init_model(config(ModelKind::v), 3);
  const Tensor c = v_transformer_forward(s, pe.params, pe.config, {}).log_probs.value();
  const Tensor d = v_transformer_forward(permuted(s, order), pe.params, pe.config, {}).log_probs.value();
  EXPECT_GT(std::abs(d.at(0, 0) - c.at(order[0], 0)), 1e-9);
}

TEST(VTransformer, RejectsBareSamples) {
  const Model m = init_model(config(ModelKind::v), 1);
  TimelineSample s = random_sample(3, 16, 2, 1);
  for (auto& v : s.videos) v.embedding.clear();
  EXPECT_ANY_THROW(v_transformer_forward(s, m.params, m.config, {}));
}

TEST(TriTransformer, ShapesAndRetainedRepresentations) {
  const Model m = init_model(config(ModelKind::tri), 1);
  const ForwardOutput out = tri_transformer_forward(random_sample(5, 16, 3, 5), m.params, m.config, {});
  expect_distributions(out, 5);
  EXPECT_EQ(out.encoder1_node_reps.shape(), (Shape{kNumClasses, 64}));
  EXPECT_EQ(out.encoder1_video_reps.shape(), (Shape{5, 64}));

  ModelConfig ablated = config(ModelKind::tri);
  ablated.use_encoders_2_3 = false;
  const Model a = init_model(ablated, 1);
  EXPECT_FALSE(a.params.contains("enc2.lnf.g"));
  expect_distributions(tri_transformer_forward(random_sample(5, 16, 3, 5), a.params, ablated, {}), 5);
}

TEST(TriTransformer, ZeroQueryProjectionGivesUniformRows) {
  Model m = init_model(config(ModelKind::tri), 6);
  Var wq = m.params.at("score.wq");
  for (double& x : wq.mutable_value().values()) x = 0.0;
  const Tensor p = tri_transformer_forward(random_sample(4, 16, 2, 6), m.params, m.config, {}).probabilities();
  for (double x : p.values()) EXPECT_NEAR(x, 1.0 / 24.0, 1e-15);
}

TEST(TriTransformer, EquivariantWithoutVideoEncoding) {
  ModelConfig cfg = config(ModelKind::tri);
  cfg.use_video_pe = false;
  const Model m = init_model(cfg, 8);
  const TimelineSample s = random_sample(6, 16, 3, 8);
  const std::vector<std::size_t> order{5, 3, 1, 0, 2, 4};
  const Tensor a = tri_transformer_forward(s, m.params, cfg, {}).log_probs.value();
  const Tensor b = tri_transformer_forward(permuted(s, order), m.params, cfg, {}).log_probs.value();
  for (std::size_t i = 0; i < order.size(); ++i) {
    for (std::size_t c = 0; c < kNumClasses; ++c) EXPECT_NEAR(b.at(i, c), a.at(order[i], c), 1e-12);
  }
}

TEST(TriTransformer, TeacherWithZeroTextMatchesStudent) {
  ModelConfig tcfg = config(ModelKind::tri);
  tcfg.text_input = true;
  tcfg.d_text = 4;
  const Model teacher = init_model(tcfg, 9);
  const TimelineSample s = random_sample(5, 16, 3, 9);
  const std::vector<std::vector<double>> zeros(3, std::vector<double>(4, 0.0));
  const Tensor with_text = tri_transformer_forward(s, teacher.params, tcfg, {}, &zeros).log_probs.value();
  const Tensor without = tri_transformer_forward(s, teacher.params, config(ModelKind::tri), {}).log_probs.value();
  EXPECT_EQ(with_text, without);

  const Tensor real = tri_transformer_forward(s, teacher.params, tcfg, {}, &*s.node_text_embeddings).log_probs.value();
  EXPECT_NE(real, without);

  const std::vector<std::vector<double>> too_many(25, std::vector<double>(4, 0.0));
  EXPECT_ANY_THROW(tri_transformer_forward(s, teacher.params, tcfg, {}, &too_many));
}

TEST(Losses, CrossEntropyClosedForms) {
  const Var uniform = Var::constant(Tensor({3, kNumClasses}, -std::log(24.0)));
  EXPECT_NEAR(cross_entropy_loss(uniform, {1, 7, 24}).value()[0], std::log(24.0), 1e-14);
  Tensor onehot({2, kNumClasses}, -std::numeric_limits<double>::infinity());
  onehot.at(0, 2) = 0.0;
  onehot.at(1, 5) = 0.0;
  EXPECT_EQ(cross_entropy_loss(Var::constant(onehot), {3, 6}).value()[0], 0.0);
  EXPECT_THROW(cross_entropy_loss(uniform, {0, 1, 2}), InputError);
  EXPECT_THROW(cross_entropy_loss(uniform, {25, 1, 2}), InputError);
}

TEST(Losses, DistillationClosedForms) {
  ForwardOutput a, b;
  a.encoder1_node_reps = Var::constant(Tensor({kNumClasses, 4}, 0.25));
  a.encoder1_video_reps = Var::constant(Tensor({3, 4}, -1.0));
  EXPECT_EQ(distillation_loss(a, a).value()[0], 0.0);
  b.encoder1_node_reps = Var::constant(Tensor({kNumClasses, 4}, 0.25 + 0.5));
  b.encoder1_video_reps = Var::constant(Tensor({3, 4}, -1.0 + 0.5));
  EXPECT_NEAR(distillation_loss(a, b).value()[0], 0.25, 1e-15);
  EXPECT_THROW(distillation_loss(ForwardOutput{}, a), ShapeError);
}

TEST(Decode, ArgmaxAndTies) {
  Tensor onehot({3, kNumClasses}, 0.0);
  onehot.at(0, 1) = onehot.at(1, 1) = onehot.at(2, 4) = 1.0;
  EXPECT_EQ(predict_assignments(onehot), (LabelVector{2, 2, 5}));
  EXPECT_EQ(predict_assignments(Tensor({1, kNumClasses}, 1.0 / 24.0)), (LabelVector{1}));

  Rng rng(4);
  Tensor scores({20, kNumClasses});
  for (double& x : scores.values()) x = rng.normal();
  Tensor squashed = scores;
  for (double& x : squashed.values()) x = std::exp(3.0 * x) + 1.0;
  EXPECT_EQ(predict_assignments(scores), predict_assignments(squashed));
}

TEST(Decode, SkipEmptyNodes) {
  EXPECT_EQ(postprocess_skip_empty({1, 1, 4, 2}), (LabelVector{1, 1, 3, 2}));
  EXPECT_EQ(postprocess_skip_empty({1, 2, 2, 3}), (LabelVector{1, 2, 2, 3}));
  EXPECT_EQ(postprocess_skip_empty({3, 5, 3}), (LabelVector{1, 2, 1}));
}

TEST(Decode, SkipEmptyIsIdempotentAndOrderPreserving) {
  Rng rng(12);
  for (int trial = 0; trial < 200; ++trial) {
    const LabelVector raw = testkit::random_labels(rng, static_cast<std::size_t>(rng.uniform_int(1, 30)), 24);
    const LabelVector out = postprocess_skip_empty(raw);
    EXPECT_EQ(postprocess_skip_empty(out), out);
    const int k_hat = *std::max_element(out.begin(), out.end());
    EXPECT_EQ(static_cast<std::size_t>(k_hat), std::set<NodeId>(raw.begin(), raw.end()).size());
    for (std::size_t i = 0; i < raw.size(); ++i) {
      for (std::size_t j = 0; j < raw.size(); ++j) {
        EXPECT_EQ(raw[i] < raw[j], out[i] < out[j]);
      }
    }
  }
}

TEST(Decode, PredictSampleMapsBackToStoredOrder) {
  const Model oracle = init_model(config(ModelKind::label_oracle), 0);
  TimelineSample s = random_sample(8, 16, 3, 13);
  s.labels = {3, 1, 3, 2, 1, 2, 3, 1};
  EXPECT_EQ(predict_sample(oracle, s), s.labels);

  // A model whose prediction depends only on content must give the same
  // answer for every stored order of the same videos.
  ModelConfig cfg = config(ModelKind::tri);
  const Model m = init_model(cfg, 13);
  const std::vector<std::size_t> order{7, 6, 5, 4, 3, 2, 1, 0};
  const LabelVector a = predict_sample(m, s);
  const LabelVector b = predict_sample(m, permuted(s, order));
  for (std::size_t i = 0; i < order.size(); ++i) EXPECT_EQ(b[i], a[order[i]]);
}

TEST(ModelCheckpoint, RoundTripAndShapeChecks) {
  ModelConfig cfg = config(ModelKind::tri);
  cfg.text_input = true;
  cfg.d_text = 4;
  const Model m = init_model(cfg, 21);
  const Model back = model_from_checkpoint(decode_checkpoint(encode_checkpoint(model_to_checkpoint(m))));
  EXPECT_EQ(back.config, m.config);
  ASSERT_EQ(back.params.size(), m.params.size());
  for (const auto& [name, v] : m.params.entries()) EXPECT_EQ(back.params.at(name).value(), v.value()) << name;

  Checkpoint broken = model_to_checkpoint(m);
  broken.tensors.at("score.wq") = Tensor({3, 3});
  EXPECT_THROW(model_from_checkpoint(broken), DimensionError);
  broken = model_to_checkpoint(m);
  broken.tensors.erase("text.w");
  EXPECT_THROW(model_from_checkpoint(broken), DimensionError);
}

TEST(ModelConfigs, Validation) {
  ModelConfig cfg = config(ModelKind::tri);
  cfg.num_heads = 5;
  EXPECT_THROW(validate_model_config(cfg), ConfigError);
  cfg = config(ModelKind::v);
  cfg.text_input = true;
  cfg.d_text = 3;
  EXPECT_THROW(validate_model_config(cfg), ConfigError);
  EXPECT_THROW(parse_model_kind("cnn"), ConfigError);
  EXPECT_EQ(parse_model_kind("tri_distill"), ModelKind::tri_distill);
  EXPECT_EQ(model_config_from_json(model_config_to_json(config(ModelKind::v))), config(ModelKind::v));
}

}  // namespace
