#include <algorithm>

#include "tlb/error.hpp"
#include "tlb/metrics.hpp"

namespace tlb {
namespace {

// Residual network with unit capacities: source -> gt -> pred -> sink.
class FlowNetwork {
 public:
  explicit FlowNetwork(std::size_t vertices) : adj_(vertices) {}

  void add_edge(std::size_t from, std::size_t to) {
    adj_[from].push_back({to, 1, adj_[to].size()});
    adj_[to].push_back({from, 0, adj_[from].size() - 1});
  }

  std::size_t max_flow(std::size_t source, std::size_t sink) {
    std::size_t flow = 0;
    while (true) {
      visited_.assign(adj_.size(), false);
      if (!augment(source, sink)) break;
      ++flow;
    }
    return flow;
  }

 private:
  struct Arc {
    std::size_t to;
    int capacity;
    std::size_t reverse;
  };

  // Iterative DFS for one augmenting path; pushes one unit along it.
  bool augment(std::size_t source, std::size_t sink) {
    std::vector<std::pair<std::size_t, std::size_t>> path;  // (vertex, arc index)
    std::vector<std::size_t> next(adj_.size(), 0);
    std::vector<std::size_t> stack{source};
    visited_[source] = true;
    while (!stack.empty()) {
      const std::size_t v = stack.back();
      if (v == sink) {
        for (const auto& [u, a] : path) {
          Arc& arc = adj_[u][a];
          --arc.capacity;
          ++adj_[arc.to][arc.reverse].capacity;
        }
        return true;
      }
      bool advanced = false;
      while (next[v] < adj_[v].size()) {
        const std::size_t a = next[v]++;
        const Arc& arc = adj_[v][a];
        if (arc.capacity > 0 && !visited_[arc.to]) {
          visited_[arc.to] = true;
          path.emplace_back(v, a);
          stack.push_back(arc.to);
          advanced = true;
          break;
        }
      }
      if (!advanced) {
        stack.pop_back();
        if (!path.empty()) path.pop_back();
      }
    }
    return false;
  }

  std::vector<std::vector<Arc>> adj_;
  std::vector<bool> visited_;
};

}  // namespace

std::size_t max_bipartite_matching(std::span<const MatchEdge> edges, std::size_t k, std::size_t k_hat) {
  const std::size_t source = 0;
  const std::size_t sink = k + k_hat + 1;
  FlowNetwork net(k + k_hat + 2);
  for (std::size_t i = 0; i < k; ++i) net.add_edge(source, 1 + i);
  for (std::size_t j = 0; j < k_hat; ++j) net.add_edge(1 + k + j, sink);
  for (const auto& e : edges) {
    if (e.gt >= k || e.pred >= k_hat) {
      throw InputError("matching edge (" + std::to_string(e.gt) + ", " + std::to_string(e.pred) +
                       ") outside a " + std::to_string(k) + " x " + std::to_string(k_hat) + " graph");
    }
    net.add_edge(1 + e.gt, 1 + k + e.pred);
  }
  return net.max_flow(source, sink);
}

}  // namespace tlb
