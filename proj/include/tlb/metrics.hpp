#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "tlb/data.hpp"

namespace tlb {

// Non-negative rational with 64-bit terms. Used wherever a metric is compared
// against a threshold or asserted exactly.
struct Ratio {
  std::int64_t num = 0;
  std::int64_t den = 1;

  double to_double() const { return static_cast<double>(num) / static_cast<double>(den); }
  Ratio reduced() const;

  // Exact decimal literal ("0.5", "0.51", "1"); throws ConfigError otherwise.
  static Ratio parse(std::string_view decimal);
  // Shortest decimal that round-trips `value`, then parsed exactly, so 0.51
  // means 51/100 rather than the nearest binary double.
  static Ratio from_double(double value);

  friend bool operator==(const Ratio& a, const Ratio& b);
  friend bool operator<(const Ratio& a, const Ratio& b);
  friend bool operator<=(const Ratio& a, const Ratio& b) { return !(b < a); }
};

struct ScoreConfig {
  Ratio sigma{1, 2};  // IoU threshold, 0 < sigma <= 1
};

void validate_score_config(const ScoreConfig& cfg);

// Ground-truth or predicted nodes: the non-empty label groups ordered by ID.
struct NodePartition {
  std::vector<NodeId> ids;
  std::vector<std::vector<std::size_t>> nodes;  // sorted video indices per node
};

NodePartition partition_of(const LabelVector& labels);

// |a ∩ b| / |a ∪ b| for sorted index sets. Throws InputError when both are
// empty.
Ratio iou(std::span<const std::size_t> a, std::span<const std::size_t> b);

struct MatchEdge {
  std::size_t gt = 0;    // 0-based ground-truth node index
  std::size_t pred = 0;  // 0-based predicted node index
};

// Maximum-cardinality matching via unit-capacity max-flow (Ford-Fulkerson
// with DFS augmenting paths).
std::size_t max_bipartite_matching(std::span<const MatchEdge> edges, std::size_t k, std::size_t k_hat);

struct NodeMatch {
  std::size_t matched = 0;
  std::size_t k = 0;
  std::size_t k_hat = 0;

  Ratio precision() const { return {static_cast<std::int64_t>(matched), static_cast<std::int64_t>(k_hat)}; }
  Ratio recall() const { return {static_cast<std::int64_t>(matched), static_cast<std::int64_t>(k)}; }
};

// Edges kept where IoU >= sigma, compared exactly.
NodeMatch node_precision_recall(const LabelVector& gt, const LabelVector& pred, const ScoreConfig& cfg);

// Averages per video. Both throw InputError on empty or mismatched input.
Ratio hamming(const LabelVector& gt, const LabelVector& pred);
Ratio euclidean(const LabelVector& gt, const LabelVector& pred);

struct PairCount {
  std::size_t correct = 0;
  std::size_t total = 0;

  friend bool operator==(const PairCount&, const PairCount&) = default;
};

// Over all unordered pairs: correct iff sign(a_i - a_j) == sign(â_i - â_j).
PairCount pairwise_agreement(const LabelVector& gt, const LabelVector& pred);

struct SampleScore {
  std::size_t matched = 0;
  std::size_t k = 0;
  std::size_t k_hat = 0;
  double precision = 0.0;
  double recall = 0.0;
  std::size_t mismatches = 0;         // Hamming numerator
  std::size_t abs_diff_sum = 0;       // Euclidean numerator
  double hamming_avg = 0.0;
  double euclidean_avg = 0.0;
  std::size_t pairs_correct = 0;
  std::size_t pairs_total = 0;
  std::size_t n = 0;

  friend bool operator==(const SampleScore&, const SampleScore&) = default;
};

SampleScore score_sample(const LabelVector& gt, const LabelVector& pred, const ScoreConfig& cfg);

struct MetricBlock {
  double precision = 0.0;
  double recall = 0.0;
  double hamming = 0.0;
  double euclidean = 0.0;
  double agreement = 0.0;  // NaN when no sample has a pair

  friend bool operator==(const MetricBlock&, const MetricBlock&) = default;
};

enum class Averaging { macro, micro };

// Macro: unweighted mean over samples (zero-pair samples excluded from the
// agreement mean only). Micro: ratio of summed counts.
MetricBlock aggregate(std::span<const SampleScore> scores, Averaging mode);

struct MetricsReport {
  std::vector<std::string> topic_ids;
  std::vector<SampleScore> per_sample;
  MetricBlock macro;
  MetricBlock micro;

  friend bool operator==(const MetricsReport&, const MetricsReport&) = default;
};

// Samples are scored in `threads` workers; results keep dataset order.
MetricsReport score_dataset(const Dataset& gt, const Predictions& predictions, const ScoreConfig& cfg,
                            unsigned threads = 1);

std::string report_to_json(const MetricsReport& r);
// Aligned table: Precision/Recall, Hamming, Euclidean, Agreement, each as
// macro and micro, 6 significant digits.
std::string report_to_table(const MetricsReport& r);

}  // namespace tlb
