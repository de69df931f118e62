#include <algorithm>
#include <numeric>
#include <set>
#include <tuple>

#include "tlb/data.hpp"

namespace tlb {

std::vector<Violation> validate_sample(const TimelineSample& s) {
  std::vector<Violation> out;
  const int k = s.num_nodes;
  if (k < kMinNodes || k > kMaxNodes) {
    // Everything below is phrased relative to K, so stop here.
    out.push_back({"k_range", 0, "K out of range"});
    return out;
  }
  if (s.labels.size() != s.videos.size()) {
    out.push_back({"label_count", s.labels.size(),
                   "label count " + std::to_string(s.labels.size()) + " != video count " +
                       std::to_string(s.videos.size())});
  }
  std::vector<std::size_t> node_sizes(static_cast<std::size_t>(k) + 1, 0);
  for (std::size_t i = 0; i < s.labels.size(); ++i) {
    const NodeId a = s.labels[i];
    if (a < 1 || a > k) {
      out.push_back({"label_range", i, "video " + std::to_string(i) + " label " + std::to_string(a) + " outside 1.." +
                                            std::to_string(k)});
    } else {
      ++node_sizes[static_cast<std::size_t>(a)];
    }
  }
  for (int node = 1; node <= k; ++node) {
    if (node_sizes[static_cast<std::size_t>(node)] == 0) {
      out.push_back({"empty_node", static_cast<std::size_t>(node), "node " + std::to_string(node) + " empty"});
    }
  }
  std::set<std::string_view> ids;
  for (std::size_t i = 0; i < s.videos.size(); ++i) {
    if (!ids.insert(s.videos[i].id).second) {
      out.push_back({"duplicate_id", i, "video id " + s.videos[i].id + " repeated"});
    }
  }
  if (!s.videos.empty()) {
    const std::size_t dim = s.videos.front().embedding.size();
    for (std::size_t i = 1; i < s.videos.size(); ++i) {
      if (s.videos[i].embedding.size() != dim) {
        out.push_back({"embedding_dim", i, "video " + std::to_string(i) + " embedding dimension differs"});
      }
    }
  }
  if (s.node_text_embeddings && s.node_text_embeddings->size() != static_cast<std::size_t>(k)) {
    out.push_back({"text_count", s.node_text_embeddings->size(),
                   "node text embedding count " + std::to_string(s.node_text_embeddings->size()) + " != K"});
  }
  return out;
}

std::vector<std::size_t> order_videos_by_release(const TimelineSample& s) {
  std::vector<std::size_t> order(s.videos.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    const Video& va = s.videos[a];
    const Video& vb = s.videos[b];
    return std::tie(va.release_time, va.id, a) < std::tie(vb.release_time, vb.id, b);
  });
  return order;
}

TimelineSample permute_sample(const TimelineSample& s, const std::vector<std::size_t>& order) {
  TimelineSample out;
  out.topic_id = s.topic_id;
  out.num_nodes = s.num_nodes;
  out.node_text_embeddings = s.node_text_embeddings;
  out.videos.reserve(order.size());
  out.labels.reserve(order.size());
  for (std::size_t idx : order) {
    out.videos.push_back(s.videos[idx]);
    if (idx < s.labels.size()) out.labels.push_back(s.labels[idx]);
  }
  return out;
}

}  // namespace tlb
