#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "tlb/data.hpp"
#include "tlb/metrics.hpp"
#include "tlb/models.hpp"

namespace tlb {

struct TrainConfig {
  int epochs = 100;
  int batch_size = 32;
  double learning_rate = 1e-3;
  double dropout_p = 0.0;
  std::vector<double> lr_grid{0.01, 0.001, 0.0005};
  std::vector<double> dropout_grid{0.0, 0.1, 0.25, 0.5};
  std::uint64_t seed = 0;
  // input_dim / d_text are filled in from the data; dropout_p above wins
  // over model.dropout_p.
  ModelConfig model;
  // micro_agreement | macro_agreement | micro_precision | micro_recall |
  // micro_hamming | micro_euclidean (the last two: lower is better).
  std::string selection_metric = "micro_agreement";
  ScoreConfig score;
  unsigned threads = 1;
};

void validate_train_config(const TrainConfig& cfg);
// Unknown keys are rejected. Model fields live under "model".
TrainConfig parse_train_config(std::string_view json_text);
std::string train_config_to_json(const TrainConfig& cfg);

// Higher is better; NaN maps to -inf.
double selection_value(const MetricsReport& r, std::string_view metric);

struct EpochRecord {
  int epoch = 0;
  double train_loss = 0.0;
  MetricsReport validation;
  double selection = 0.0;
};

struct TrainReport {
  std::string model_kind;
  double initial_train_loss = 0.0;
  std::vector<EpochRecord> epochs;
  int best_epoch = 0;  // 0 = initial weights
  double best_selection = 0.0;
  double wall_seconds = 0.0;

  double final_train_loss() const { return epochs.empty() ? initial_train_loss : epochs.back().train_loss; }
};

struct TrainResult {
  Model model;                    // best checkpoint by validation selection
  std::optional<Model> teacher;   // tri-distill only
  TrainReport report;
  std::optional<TrainReport> teacher_report;
};

// Fully determined by (data, cfg). For tri_distill a teacher (Tri with node
// text input) is trained first unless `teacher` is given; it is then frozen
// and the student minimizes ce_weight * CE + distill_weight * L2.
TrainResult train(const Dataset& train_set, const Dataset& val_set, const TrainConfig& cfg,
                  const Model* teacher = nullptr);

// Mean training objective over a dataset with dropout off.
double dataset_loss(const Model& m, const Dataset& d);

Predictions predict_dataset(const Model& m, const Dataset& d, unsigned threads = 1);

// Eval-mode forward -> argmax -> skip empty nodes -> score.
MetricsReport evaluate(const Model& m, const Dataset& d, const ScoreConfig& score, unsigned threads = 1);

struct GridCell {
  double learning_rate = 0.0;
  double dropout_p = 0.0;
  double selection = 0.0;
};

struct GridResult {
  TrainConfig best_config;
  TrainResult best;
  std::vector<GridCell> cells;  // lr-major grid order
};

// Trains every (lr, dropout) cell; the best validation selection wins, ties
// broken by grid order.
GridResult grid_search(const Dataset& train_set, const Dataset& val_set, const TrainConfig& cfg);

// The JSON report leaves out wall time so reruns compare byte-equal; the log
// keeps it.
std::string train_report_to_json(const TrainReport& r);
std::string train_report_to_log(const TrainReport& r);

}  // namespace tlb
