#include <cmath>
#include <set>

#include "json.hpp"
#include "tlb/data.hpp"
#include "tlb/error.hpp"
#include "tlb/rng.hpp"

namespace tlb {
namespace {

constexpr std::int64_t kDay = 86400;
constexpr std::int64_t kEpochBase = 1577836800;  // 2020-01-01T00:00:00Z
constexpr std::string_view kIdAlphabet = "ABCDEFGHIJKLMNOPQRSTUVWXYZabcdefghijklmnopqrstuvwxyz0123456789-_";

void normalize(std::vector<double>& v) {
  double n = 0.0;
  for (double x : v) n += x * x;
  n = std::sqrt(n);
  if (n == 0.0) return;
  for (double& x : v) x /= n;
}

std::vector<double> gaussian(Rng& rng, std::size_t dim, double sigma) {
  std::vector<double> v(dim);
  for (double& x : v) x = sigma * rng.normal();
  return v;
}

std::vector<double> perturbed(Rng& rng, const std::vector<double>& center, double sigma) {
  std::vector<double> v = center;
  if (sigma > 0.0) {
    for (double& x : v) x += sigma * rng.normal();
    normalize(v);
  }
  return v;
}

// 11-character ids in the YouTube alphabet.
std::string video_id(Rng& rng) {
  std::string id(11, ' ');
  for (char& c : id) c = kIdAlphabet[static_cast<std::size_t>(rng.uniform_int(0, 63))];
  return id;
}

TimelineSample generate_one(const GenConfig& cfg, Rng& rng, int index) {
  TimelineSample s;
  s.topic_id = "synthetic://" + std::to_string(cfg.seed) + "/" + std::to_string(index);
  const int k = static_cast<int>(rng.uniform_int(cfg.node_count_range[0], cfg.node_count_range[1]));
  s.num_nodes = k;

  std::vector<std::vector<double>> events;
  std::vector<double> e = gaussian(rng, cfg.embedding_dim, 1.0);
  normalize(e);
  events.push_back(e);
  for (int i = 1; i < k; ++i) {
    std::vector<double> step = gaussian(rng, cfg.embedding_dim, cfg.event_step_scale);
    for (std::size_t j = 0; j < e.size(); ++j) e[j] += step[j];
    normalize(e);
    events.push_back(e);
  }

  // Node k covers [bounds[k], bounds[k + 1]).
  std::vector<std::int64_t> bounds{kEpochBase + rng.uniform_int(0, 3 * 365 * kDay)};
  for (int i = 0; i < k; ++i) bounds.push_back(bounds.back() + rng.uniform_int(kDay, 60 * kDay));

  std::set<std::string> used_ids;
  for (int node = 0; node < k; ++node) {
    const auto m = rng.uniform_int(cfg.videos_per_node_range[0], cfg.videos_per_node_range[1]);
    for (std::int64_t j = 0; j < m; ++j) {
      Video v;
      do {
        v.id = video_id(rng);
      } while (!used_ids.insert(v.id).second);
      v.embedding = perturbed(rng, events[static_cast<std::size_t>(node)], cfg.video_noise_sigma);
      int interval = node;
      if (cfg.release_overlap_fraction > 0.0 && rng.bernoulli(cfg.release_overlap_fraction)) {
        if (node == 0) {
          interval = 1;
        } else if (node == k - 1) {
          interval = k - 2;
        } else {
          interval = rng.bernoulli(0.5) ? node - 1 : node + 1;
        }
      }
      const auto lo = bounds[static_cast<std::size_t>(interval)];
      const auto hi = bounds[static_cast<std::size_t>(interval) + 1] - 1;
      v.release_time = rng.uniform_int(lo, hi);
      s.videos.push_back(std::move(v));
      s.labels.push_back(node + 1);
    }
  }

  std::vector<std::vector<double>> texts;
  for (const auto& ev : events) texts.push_back(perturbed(rng, ev, cfg.text_noise_sigma));
  s.node_text_embeddings = std::move(texts);

  // Stored order carries no information.
  std::vector<std::size_t> order(s.videos.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  rng.shuffle(order.begin(), order.end());
  return permute_sample(s, order);
}

}  // namespace

void validate_gen_config(const GenConfig& cfg) {
  const auto& nr = cfg.node_count_range;
  const auto& vr = cfg.videos_per_node_range;
  if (cfg.num_timelines < 0) throw ConfigError("num_timelines must be >= 0");
  if (nr[0] > nr[1]) throw ConfigError("node_count_range is empty");
  if (nr[0] < kMinNodes || nr[1] > kMaxNodes) {
    throw ConfigError("node_count_range must lie within [" + std::to_string(kMinNodes) + ", " +
                      std::to_string(kMaxNodes) + "]");
  }
  if (vr[0] > vr[1]) throw ConfigError("videos_per_node_range is empty");
  if (vr[0] < 1) throw ConfigError("videos_per_node_range must start at >= 1");
  if (cfg.embedding_dim == 0) throw ConfigError("embedding_dim must be positive");
  if (cfg.event_step_scale < 0.0 || cfg.video_noise_sigma < 0.0 || cfg.text_noise_sigma < 0.0) {
    throw ConfigError("scales and sigmas must be >= 0");
  }
  if (cfg.release_overlap_fraction < 0.0 || cfg.release_overlap_fraction >= 1.0) {
    throw ConfigError("release_overlap_fraction must lie in [0, 1)");
  }
}

GenConfig parse_gen_config(std::string_view json_text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(json_text, nullptr, true, true);
  } catch (const nlohmann::json::parse_error& e) {
    throw ParseError(std::string("generator config: ") + e.what());
  }
  if (!j.is_object()) throw ConfigError("generator config must be a JSON object");
  GenConfig cfg;
  try {
    for (const auto& [key, value] : j.items()) {
      if (key == "num_timelines") cfg.num_timelines = value.get<int>();
      else if (key == "node_count_range") cfg.node_count_range = value.get<std::array<int, 2>>();
      else if (key == "videos_per_node_range") cfg.videos_per_node_range = value.get<std::array<int, 2>>();
      else if (key == "embedding_dim") cfg.embedding_dim = value.get<std::size_t>();
      else if (key == "event_step_scale") cfg.event_step_scale = value.get<double>();
      else if (key == "video_noise_sigma") cfg.video_noise_sigma = value.get<double>();
      else if (key == "text_noise_sigma") cfg.text_noise_sigma = value.get<double>();
      else if (key == "release_overlap_fraction") cfg.release_overlap_fraction = value.get<double>();
      else if (key == "seed") cfg.seed = value.get<std::uint64_t>();
      else throw ConfigError("generator config: unknown key \"" + key + "\"");
    }
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("generator config: ") + e.what());
  }
  validate_gen_config(cfg);
  return cfg;
}

Dataset generate_synthetic(const GenConfig& cfg) {
  validate_gen_config(cfg);
  Rng rng(cfg.seed);
  Dataset d;
  d.split_name = "synthetic";
  d.embedding_dim = cfg.embedding_dim;
  d.samples.reserve(static_cast<std::size_t>(cfg.num_timelines));
  for (int i = 0; i < cfg.num_timelines; ++i) d.samples.push_back(generate_one(cfg, rng, i));
  return d;
}

}  // namespace tlb
