#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <limits>

#include "tlb/error.hpp"
#include "tlb/train.hpp"

namespace {

using namespace tlb;

Dataset tiny_data(int n, std::uint64_t seed, double overlap = 0.2) {
  GenConfig g;
  g.num_timelines = n;
  g.node_count_range = {2, 3};
  g.videos_per_node_range = {2, 3};
  g.embedding_dim = 4;
  g.video_noise_sigma = 0.05;
  g.text_noise_sigma = 0.0;
  g.release_overlap_fraction = overlap;
  g.seed = seed;
  return generate_synthetic(g);
}

TrainConfig tiny_config(ModelKind kind, int epochs) {
  TrainConfig cfg;
  cfg.epochs = epochs;
  cfg.batch_size = 4;
  cfg.learning_rate = 0.01;
  cfg.model.kind = kind;
  cfg.model.d_model = 8;
  cfg.model.num_heads = 1;
  cfg.model.num_layers = 1;
  cfg.model.ff_dim = 16;
  return cfg;
}

std::string bytes_of(const Model& m) { return encode_checkpoint(model_to_checkpoint(m)); }

TEST(Train, OneEpochSmoke) {
  const TrainResult r = train(tiny_data(8, 1), tiny_data(2, 2), tiny_config(ModelKind::tri, 1));
  ASSERT_EQ(r.report.epochs.size(), 1u);
  EXPECT_TRUE(std::isfinite(r.report.epochs[0].train_loss));
  EXPECT_TRUE(std::isfinite(r.report.initial_train_loss));
  EXPECT_EQ(r.report.model_kind, "tri");
  EXPECT_EQ(r.model.config.input_dim, 4u);
  EXPECT_FALSE(r.teacher.has_value());
}

TEST(Train, DeterministicBitForBit) {
  const Dataset tr = tiny_data(8, 3), va = tiny_data(3, 4);
  TrainConfig cfg = tiny_config(ModelKind::tri, 3);
  cfg.dropout_p = 0.25;
  const TrainResult a = train(tr, va, cfg);
  const TrainResult b = train(tr, va, cfg);
  EXPECT_EQ(bytes_of(a.model), bytes_of(b.model));
  EXPECT_EQ(train_report_to_json(a.report), train_report_to_json(b.report));
  ASSERT_EQ(a.report.epochs.size(), b.report.epochs.size());
  for (std::size_t i = 0; i < a.report.epochs.size(); ++i) {
    EXPECT_EQ(a.report.epochs[i].train_loss, b.report.epochs[i].train_loss);
    EXPECT_EQ(a.report.epochs[i].validation, b.report.epochs[i].validation);
  }
  cfg.seed = 1;
  EXPECT_NE(bytes_of(train(tr, va, cfg).model), bytes_of(a.model));
}

TEST(Train, LossDecreasesOnEasyData) {
  for (ModelKind kind : {ModelKind::v, ModelKind::tri}) {
    const TrainResult r = train(tiny_data(16, 5), Dataset{}, tiny_config(kind, 15));
    EXPECT_LT(r.report.final_train_loss(), r.report.initial_train_loss) << to_string(kind);
    // No validation set: the last epoch is kept.
    EXPECT_EQ(r.report.best_epoch, 15);
  }
}

TEST(Train, DistillationTrainsTeacherThenStudent) {
  const Dataset tr = tiny_data(8, 6), va = tiny_data(2, 7);
  const TrainResult r = train(tr, va, tiny_config(ModelKind::tri_distill, 2));
  ASSERT_TRUE(r.teacher.has_value());
  ASSERT_TRUE(r.teacher_report.has_value());
  EXPECT_TRUE(r.teacher->config.text_input);
  EXPECT_EQ(r.teacher->config.d_text, 4u);
  EXPECT_FALSE(r.model.config.text_input);
  EXPECT_EQ(r.report.epochs.size(), 2u);

  // Reusing the teacher skips phase one and reproduces the student.
  const TrainResult again = train(tr, va, tiny_config(ModelKind::tri_distill, 2), &*r.teacher);
  EXPECT_EQ(bytes_of(again.model), bytes_of(r.model));
}

TEST(Train, DistillationNeedsNodeText) {
  Dataset tr = tiny_data(4, 8);
  for (auto& s : tr.samples) s.node_text_embeddings.reset();
  EXPECT_THROW(train(tr, Dataset{}, tiny_config(ModelKind::tri_distill, 1)), InputError);

  const Model student_as_teacher = init_model([] {
    ModelConfig m = tiny_config(ModelKind::tri, 1).model;
    m.input_dim = 4;
    return m;
  }(), 0);
  EXPECT_THROW(train(tiny_data(4, 8), Dataset{}, tiny_config(ModelKind::tri_distill, 1), &student_as_teacher),
               ConfigError);
}

TEST(Train, RejectsMetricsOnlyAndMismatchedData) {
  Dataset bare = parse_dataset(R"({"t": [["a", "b"], ["c"]]})");
  EXPECT_THROW(train(bare, Dataset{}, tiny_config(ModelKind::tri, 1)), InputError);

  GenConfig g;
  g.num_timelines = 2;
  g.node_count_range = {2, 2};
  g.embedding_dim = 6;
  EXPECT_THROW(train(tiny_data(4, 9), generate_synthetic(g), tiny_config(ModelKind::tri, 1)), DimensionError);

  const TrainResult r = train(tiny_data(4, 9), Dataset{}, tiny_config(ModelKind::tri, 1));
  EXPECT_THROW(evaluate(r.model, generate_synthetic(g), ScoreConfig{}), DimensionError);
}

TEST(Evaluate, LabelOracleIsPerfect) {
  const Dataset test = tiny_data(6, 10);
  const TrainResult r = train(tiny_data(2, 11), Dataset{}, tiny_config(ModelKind::label_oracle, 5));
  EXPECT_TRUE(r.report.epochs.empty());
  const MetricsReport m = evaluate(r.model, test, ScoreConfig{});
  for (const MetricBlock& b : {m.macro, m.micro}) {
    EXPECT_EQ(b, (MetricBlock{1.0, 1.0, 0.0, 0.0, 1.0}));
  }
}

TEST(Evaluate, SurvivesCheckpointRoundTrip) {
  const Dataset test = tiny_data(6, 12);
  const TrainResult r = train(tiny_data(8, 13), Dataset{}, tiny_config(ModelKind::tri, 3));
  const auto path = std::filesystem::temp_directory_path() / "tlb_train_roundtrip.ckpt";
  save_checkpoint(path, model_to_checkpoint(r.model));
  const Model loaded = model_from_checkpoint(load_checkpoint(path));
  std::filesystem::remove(path);
  EXPECT_EQ(evaluate(loaded, test, ScoreConfig{}), evaluate(r.model, test, ScoreConfig{}));
  EXPECT_EQ(predict_dataset(loaded, test, 3), predict_dataset(r.model, test, 1));
}

TEST(Evaluate, TrainingBeatsRandomWeights) {
  const Dataset tr = tiny_data(40, 14, 0.0), test = tiny_data(10, 15, 0.0);
  TrainConfig cfg = tiny_config(ModelKind::tri, 40);
  cfg.model.d_model = 16;
  const TrainResult r = train(tr, Dataset{}, cfg);
  ModelConfig untrained_cfg = r.model.config;
  const Model untrained = init_model(untrained_cfg, 99);
  const double trained_err = evaluate(r.model, test, ScoreConfig{}).micro.hamming;
  const double random_err = evaluate(untrained, test, ScoreConfig{}).micro.hamming;
  EXPECT_GT(random_err, 2.0 * trained_err) << "trained " << trained_err << " random " << random_err;
}

TEST(GridSearch, SingleCellMatchesTrain) {
  const Dataset tr = tiny_data(8, 16), va = tiny_data(3, 17);
  TrainConfig cfg = tiny_config(ModelKind::v, 2);
  cfg.lr_grid = {cfg.learning_rate};
  cfg.dropout_grid = {cfg.dropout_p};
  const GridResult g = grid_search(tr, va, cfg);
  ASSERT_EQ(g.cells.size(), 1u);
  EXPECT_EQ(bytes_of(g.best.model), bytes_of(train(tr, va, cfg).model));
}

TEST(GridSearch, DivergentLearningRateLoses) {
  const Dataset tr = tiny_data(24, 18, 0.0), va = tiny_data(8, 19, 0.0);
  TrainConfig cfg = tiny_config(ModelKind::tri, 20);
  cfg.lr_grid = {10.0, 0.001};
  cfg.dropout_grid = {0.0};
  cfg.threads = 2;
  const GridResult g = grid_search(tr, va, cfg);
  ASSERT_EQ(g.cells.size(), 2u);
  EXPECT_EQ(g.cells[0].learning_rate, 10.0);
  EXPECT_EQ(g.best_config.learning_rate, 0.001) << g.cells[0].selection << " vs " << g.cells[1].selection;
}

TEST(TrainConfigIo, ParseRoundTripAndRejects) {
  TrainConfig cfg = parse_train_config(R"({"epochs": 3, "learning_rate": 0.01, "model": {"d_model": 16},
                                          "sigma": "0.51"})");
  EXPECT_EQ(cfg.epochs, 3);
  EXPECT_EQ(cfg.model.d_model, 16u);
  EXPECT_EQ(cfg.score.sigma, Ratio::parse("0.51"));
  const TrainConfig back = parse_train_config(train_config_to_json(cfg));
  EXPECT_EQ(train_config_to_json(back), train_config_to_json(cfg));
  EXPECT_THROW(parse_train_config(R"({"epoch": 3})"), ConfigError);
  EXPECT_THROW(parse_train_config(R"({"model": {"layers": 3}})"), ConfigError);
  EXPECT_THROW(parse_train_config(R"({"batch_size": 0})"), ConfigError);
  EXPECT_THROW(parse_train_config("{"), ParseError);
}

TEST(Selection, MetricsAndNaN) {
  MetricsReport r;
  r.micro = {0.5, 0.25, 0.3, 0.6, 0.8};
  r.macro.agreement = 0.7;
  EXPECT_EQ(selection_value(r, "micro_agreement"), 0.8);
  EXPECT_EQ(selection_value(r, "macro_agreement"), 0.7);
  EXPECT_EQ(selection_value(r, "micro_recall"), 0.25);
  EXPECT_EQ(selection_value(r, "micro_hamming"), -0.3);
  r.micro.agreement = std::numeric_limits<double>::quiet_NaN();
  EXPECT_EQ(selection_value(r, "micro_agreement"), -std::numeric_limits<double>::infinity());
  EXPECT_THROW(selection_value(r, "accuracy"), ConfigError);
}

}  // namespace
