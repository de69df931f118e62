#include <algorithm>
#include <cmath>
#include <numeric>

#include "json.hpp"
#include "tlb/data.hpp"
#include "tlb/error.hpp"
#include "tlb/rng.hpp"

namespace tlb {

std::array<Dataset, 3> split_dataset(const Dataset& d, SplitRatios ratios, std::uint64_t seed) {
  const std::array<double, 3> r{ratios.train, ratios.val, ratios.test};
  if (std::any_of(r.begin(), r.end(), [](double x) { return !(x > 0.0); })) {
    throw ConfigError("split ratios must be positive");
  }
  if (std::abs(r[0] + r[1] + r[2] - 1.0) > 1e-9) throw ConfigError("split ratios must sum to 1");

  const std::size_t n = d.samples.size();
  std::array<std::size_t, 3> sizes{};
  std::array<double, 3> remainder{};
  std::size_t assigned = 0;
  for (std::size_t i = 0; i < 3; ++i) {
    const double exact = r[i] * static_cast<double>(n);
    sizes[i] = static_cast<std::size_t>(std::floor(exact));
    remainder[i] = exact - static_cast<double>(sizes[i]);
    assigned += sizes[i];
  }
  std::array<std::size_t, 3> by_remainder{0, 1, 2};
  std::stable_sort(by_remainder.begin(), by_remainder.end(),
                   [&](std::size_t a, std::size_t b) { return remainder[a] > remainder[b]; });
  for (std::size_t i = 0; assigned < n; ++i, ++assigned) ++sizes[by_remainder[i % 3]];

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  Rng rng(seed);
  rng.shuffle(order.begin(), order.end());

  static constexpr std::array<const char*, 3> kNames{"train", "val", "test"};
  std::array<Dataset, 3> out;
  std::size_t cursor = 0;
  for (std::size_t i = 0; i < 3; ++i) {
    out[i].split_name = kNames[i];
    out[i].embedding_dim = d.embedding_dim;
    out[i].metrics_only = d.metrics_only;
    for (std::size_t j = 0; j < sizes[i]; ++j) out[i].samples.push_back(d.samples[order[cursor++]]);
  }
  return out;
}

StatsReport dataset_stats(const Dataset& d) {
  StatsReport s;
  s.timelines = d.samples.size();
  for (const auto& sample : d.samples) {
    const auto k = static_cast<std::size_t>(sample.num_nodes);
    std::vector<std::size_t> per_node(k, 0);
    for (NodeId a : sample.labels) {
      if (a >= 1 && static_cast<std::size_t>(a) <= k) ++per_node[static_cast<std::size_t>(a) - 1];
    }
    for (std::size_t c : per_node) ++s.videos_per_node[c];
    s.nodes += k;
    s.videos += sample.videos.size();
    ++s.nodes_per_timeline[k];
    ++s.videos_per_timeline[sample.videos.size()];
  }
  return s;
}

std::string stats_to_json(const StatsReport& s) {
  auto hist = [](const std::map<std::size_t, std::size_t>& h) {
    nlohmann::ordered_json j = nlohmann::ordered_json::object();
    for (const auto& [value, count] : h) j[std::to_string(value)] = count;
    return j;
  };
  nlohmann::ordered_json j;
  j["timelines"] = s.timelines;
  j["nodes"] = s.nodes;
  j["videos"] = s.videos;
  j["videos_per_node"] = hist(s.videos_per_node);
  j["nodes_per_timeline"] = hist(s.nodes_per_timeline);
  j["videos_per_timeline"] = hist(s.videos_per_timeline);
  return j.dump(2) + "\n";
}

}  // namespace tlb
