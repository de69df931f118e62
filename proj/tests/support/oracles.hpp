#pragma once

#include <cstddef>
#include <span>

#include "tlb/data.hpp"
#include "tlb/metrics.hpp"
#include "tlb/rng.hpp"

namespace tlb::testkit {

// Exhaustive maximum matching: tries every injective assignment of ground-truth
// nodes to predicted nodes. Only for k, k_hat <= 10.
std::size_t brute_force_matching(std::span<const MatchEdge> edges, std::size_t k, std::size_t k_hat);

// Each edge present independently with probability `density`.
std::vector<MatchEdge> random_bipartite(Rng& rng, std::size_t k, std::size_t k_hat, double density);

// n labels over 1..k with every node non-empty, in random order. Needs n >= k.
LabelVector random_partition(Rng& rng, std::size_t n, int k);

// n labels drawn uniformly from 1..max_id; gaps allowed.
LabelVector random_labels(Rng& rng, std::size_t n, int max_id);

}  // namespace tlb::testkit
