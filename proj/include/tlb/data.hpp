#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace tlb {

// Node IDs are 1-based, matching the published label format.
using NodeId = int;
using LabelVector = std::vector<NodeId>;

inline constexpr int kMinNodes = 2;
inline constexpr int kMaxNodes = 24;

struct Video {
  std::string id;
  std::int64_t release_time = 0;  // seconds since epoch
  std::vector<double> embedding;
  std::optional<std::string> title;

  friend bool operator==(const Video&, const Video&) = default;
};

struct TimelineSample {
  std::string topic_id;
  std::vector<Video> videos;
  LabelVector labels;  // aligned with `videos`
  int num_nodes = 0;
  std::optional<std::vector<std::vector<double>>> node_text_embeddings;

  std::size_t size() const { return videos.size(); }
  bool has_embeddings() const { return !videos.empty() && !videos.front().embedding.empty(); }

  friend bool operator==(const TimelineSample&, const TimelineSample&) = default;
};

struct Dataset {
  std::string split_name;
  std::size_t embedding_dim = 0;
  std::vector<TimelineSample> samples;
  // Loaded from the bare ID-only format: usable as ground truth for scoring,
  // not as model input.
  bool metrics_only = false;

  friend bool operator==(const Dataset&, const Dataset&) = default;
};

struct Violation {
  std::string rule;     // e.g. "empty_node", "k_range"
  std::size_t index = 0;  // offending node / video index, 0 when not applicable
  std::string message;

  friend bool operator==(const Violation&, const Violation&) = default;
};

// ---- IO -------------------------------------------------------------------

// Accepts the extended schema ({"split", "embedding_dim", "samples": [...]})
// and the bare appendix mapping ({topic_url: [[video_id, ...], ...]}). `#`
// comments outside string literals are ignored so annotated listings load.
// Throws ParseError, ValidationError (naming the topic) or DimensionError.
Dataset parse_dataset(std::string_view text);

// Extended schema, pretty-printed; parse_dataset(write_dataset(d)) == d.
std::string write_dataset(const Dataset& d);

using Predictions = std::map<std::string, LabelVector>;

Predictions parse_predictions(std::string_view text);
std::string write_predictions(const Predictions& p);

std::string read_text_file(const std::filesystem::path& path);
// Writes to a sibling temporary file and renames, so a failed write never
// leaves a partial file at `path`.
void write_text_file(const std::filesystem::path& path, std::string_view text);

// ---- Validation and ordering ----------------------------------------------

std::vector<Violation> validate_sample(const TimelineSample& s);

// Ascending release time; ties by video id, then by stored index.
std::vector<std::size_t> order_videos_by_release(const TimelineSample& s);

// Reorders videos and labels jointly; `order[i]` is the stored index placed at
// position i.
TimelineSample permute_sample(const TimelineSample& s, const std::vector<std::size_t>& order);

// ---- Synthetic data -------------------------------------------------------

struct GenConfig {
  int num_timelines = 100;
  std::array<int, 2> node_count_range{2, 24};
  std::array<int, 2> videos_per_node_range{1, 5};
  std::size_t embedding_dim = 32;
  double event_step_scale = 1.0;
  double video_noise_sigma = 0.1;
  double text_noise_sigma = 0.05;
  double release_overlap_fraction = 0.2;
  std::uint64_t seed = 0;
};

// Throws ConfigError for impossible settings.
void validate_gen_config(const GenConfig& cfg);
GenConfig parse_gen_config(std::string_view json_text);

Dataset generate_synthetic(const GenConfig& cfg);

// ---- Splits and statistics ------------------------------------------------

struct SplitRatios {
  double train = 0.8;
  double val = 0.1;
  double test = 0.1;
};

// Largest-remainder sizing, so each split is within 1 of ratio * |d|.
std::array<Dataset, 3> split_dataset(const Dataset& d, SplitRatios ratios, std::uint64_t seed);

struct StatsReport {
  std::size_t timelines = 0;
  std::size_t nodes = 0;
  std::size_t videos = 0;
  std::map<std::size_t, std::size_t> videos_per_node;
  std::map<std::size_t, std::size_t> nodes_per_timeline;
  std::map<std::size_t, std::size_t> videos_per_timeline;

  friend bool operator==(const StatsReport&, const StatsReport&) = default;
};

StatsReport dataset_stats(const Dataset& d);
std::string stats_to_json(const StatsReport& s);

}  // namespace tlb
