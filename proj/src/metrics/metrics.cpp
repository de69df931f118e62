#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <map>

#include "json.hpp"
#include "tlb/error.hpp"
#include "tlb/metrics.hpp"
#include "tlb/parallel.hpp"

namespace tlb {
namespace {

void check_lengths(const LabelVector& gt, const LabelVector& pred) {
  if (gt.size() != pred.size()) {
    throw InputError("label vectors differ in length (" + std::to_string(gt.size()) + " vs " +
                     std::to_string(pred.size()) + ")");
  }
  if (gt.empty()) throw InputError("label vectors are empty");
}

std::int64_t i64(std::size_t v) { return static_cast<std::int64_t>(v); }

int sign(NodeId d) { return (d > 0) - (d < 0); }

}  // namespace

NodePartition partition_of(const LabelVector& labels) {
  std::map<NodeId, std::vector<std::size_t>> groups;
  for (std::size_t i = 0; i < labels.size(); ++i) groups[labels[i]].push_back(i);
  NodePartition p;
  for (auto& [id, members] : groups) {
    p.ids.push_back(id);
    p.nodes.push_back(std::move(members));
  }
  return p;
}

Ratio iou(std::span<const std::size_t> a, std::span<const std::size_t> b) {
  if (a.empty() && b.empty()) throw InputError("IoU of two empty sets is undefined");
  std::size_t inter = 0;
  auto ia = a.begin();
  auto ib = b.begin();
  while (ia != a.end() && ib != b.end()) {
    if (*ia < *ib) {
      ++ia;
    } else if (*ib < *ia) {
      ++ib;
    } else {
      ++inter;
      ++ia;
      ++ib;
    }
  }
  return {i64(inter), i64(a.size() + b.size() - inter)};
}

NodeMatch node_precision_recall(const LabelVector& gt, const LabelVector& pred, const ScoreConfig& cfg) {
  check_lengths(gt, pred);
  validate_score_config(cfg);
  const NodePartition g = partition_of(gt);
  const NodePartition p = partition_of(pred);
  std::vector<MatchEdge> edges;
  for (std::size_t i = 0; i < g.nodes.size(); ++i) {
    for (std::size_t j = 0; j < p.nodes.size(); ++j) {
      if (cfg.sigma <= iou(g.nodes[i], p.nodes[j])) edges.push_back({i, j});
    }
  }
  return {max_bipartite_matching(edges, g.nodes.size(), p.nodes.size()), g.nodes.size(), p.nodes.size()};
}

Ratio hamming(const LabelVector& gt, const LabelVector& pred) {
  check_lengths(gt, pred);
  std::size_t mismatches = 0;
  for (std::size_t i = 0; i < gt.size(); ++i) mismatches += gt[i] != pred[i];
  return {i64(mismatches), i64(gt.size())};
}

Ratio euclidean(const LabelVector& gt, const LabelVector& pred) {
  check_lengths(gt, pred);
  std::int64_t total = 0;
  for (std::size_t i = 0; i < gt.size(); ++i) total += std::abs(static_cast<std::int64_t>(gt[i]) - pred[i]);
  return {total, i64(gt.size())};
}

PairCount pairwise_agreement(const LabelVector& gt, const LabelVector& pred) {
  check_lengths(gt, pred);
  PairCount c;
  for (std::size_t i = 0; i < gt.size(); ++i) {
    for (std::size_t j = i + 1; j < gt.size(); ++j) {
      c.correct += sign(gt[i] - gt[j]) == sign(pred[i] - pred[j]);
      ++c.total;
    }
  }
  return c;
}

SampleScore score_sample(const LabelVector& gt, const LabelVector& pred, const ScoreConfig& cfg) {
  const NodeMatch m = node_precision_recall(gt, pred, cfg);
  const Ratio h = hamming(gt, pred);
  const Ratio e = euclidean(gt, pred);
  const PairCount pc = pairwise_agreement(gt, pred);
  SampleScore s;
  s.matched = m.matched;
  s.k = m.k;
  s.k_hat = m.k_hat;
  s.precision = m.precision().to_double();
  s.recall = m.recall().to_double();
  s.mismatches = static_cast<std::size_t>(h.num);
  s.abs_diff_sum = static_cast<std::size_t>(e.num);
  s.hamming_avg = h.to_double();
  s.euclidean_avg = e.to_double();
  s.pairs_correct = pc.correct;
  s.pairs_total = pc.total;
  s.n = gt.size();
  return s;
}

MetricBlock aggregate(std::span<const SampleScore> scores, Averaging mode) {
  if (scores.empty()) throw InputError("cannot aggregate zero samples");
  MetricBlock b;
  if (mode == Averaging::macro) {
    double agreement_sum = 0.0;
    std::size_t with_pairs = 0;
    for (const auto& s : scores) {
      b.precision += s.precision;
      b.recall += s.recall;
      b.hamming += s.hamming_avg;
      b.euclidean += s.euclidean_avg;
      if (s.pairs_total > 0) {
        agreement_sum += static_cast<double>(s.pairs_correct) / static_cast<double>(s.pairs_total);
        ++with_pairs;
      }
    }
    const double n = static_cast<double>(scores.size());
    b.precision /= n;
    b.recall /= n;
    b.hamming /= n;
    b.euclidean /= n;
    b.agreement = with_pairs > 0 ? agreement_sum / static_cast<double>(with_pairs)
                                 : std::numeric_limits<double>::quiet_NaN();
    return b;
  }
  std::size_t matched = 0, k = 0, k_hat = 0, mism = 0, diff = 0, videos = 0, correct = 0, pairs = 0;
  for (const auto& s : scores) {
    matched += s.matched;
    k += s.k;
    k_hat += s.k_hat;
    mism += s.mismatches;
    diff += s.abs_diff_sum;
    videos += s.n;
    correct += s.pairs_correct;
    pairs += s.pairs_total;
  }
  const auto ratio = [](std::size_t a, std::size_t b) { return static_cast<double>(a) / static_cast<double>(b); };
  b.precision = ratio(matched, k_hat);
  b.recall = ratio(matched, k);
  b.hamming = ratio(mism, videos);
  b.euclidean = ratio(diff, videos);
  b.agreement = pairs > 0 ? ratio(correct, pairs) : std::numeric_limits<double>::quiet_NaN();
  return b;
}

MetricsReport score_dataset(const Dataset& gt, const Predictions& predictions, const ScoreConfig& cfg,
                            unsigned threads) {
  validate_score_config(cfg);
  MetricsReport r;
  const std::size_t n = gt.samples.size();
  std::vector<const LabelVector*> preds(n);
  for (std::size_t i = 0; i < n; ++i) {
    const auto& s = gt.samples[i];
    auto it = predictions.find(s.topic_id);
    if (it == predictions.end()) throw InputError("missing prediction for topic " + s.topic_id);
    if (it->second.size() != s.labels.size()) {
      throw InputError("prediction for topic " + s.topic_id + " has " + std::to_string(it->second.size()) +
                       " entries, expected " + std::to_string(s.labels.size()));
    }
    preds[i] = &it->second;
    r.topic_ids.push_back(s.topic_id);
  }
  r.per_sample.resize(n);
  parallel_for(n, threads, [&](std::size_t i) { r.per_sample[i] = score_sample(gt.samples[i].labels, *preds[i], cfg); });
  if (n > 0) {
    r.macro = aggregate(r.per_sample, Averaging::macro);
    r.micro = aggregate(r.per_sample, Averaging::micro);
  }
  return r;
}

namespace {

nlohmann::ordered_json block_json(const MetricBlock& b) {
  nlohmann::ordered_json j;
  j["precision"] = b.precision;
  j["recall"] = b.recall;
  j["hamming"] = b.hamming;
  j["euclidean"] = b.euclidean;
  if (std::isnan(b.agreement)) {
    j["agreement"] = nullptr;
  } else {
    j["agreement"] = b.agreement;
  }
  return j;
}

std::string sig6(double v) {
  if (std::isnan(v)) return "n/a";
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.6g", v);
  return buf;
}

}  // namespace

std::string report_to_json(const MetricsReport& r) {
  nlohmann::ordered_json j;
  nlohmann::ordered_json per = nlohmann::ordered_json::array();
  for (std::size_t i = 0; i < r.per_sample.size(); ++i) {
    const auto& s = r.per_sample[i];
    nlohmann::ordered_json js;
    js["topic_id"] = i < r.topic_ids.size() ? r.topic_ids[i] : "";
    js["matched"] = s.matched;
    js["K"] = s.k;
    js["K_hat"] = s.k_hat;
    js["precision"] = s.precision;
    js["recall"] = s.recall;
    js["hamming"] = s.hamming_avg;
    js["euclidean"] = s.euclidean_avg;
    js["mismatches"] = s.mismatches;
    js["abs_diff_sum"] = s.abs_diff_sum;
    js["pairs_correct"] = s.pairs_correct;
    js["pairs_total"] = s.pairs_total;
    js["N"] = s.n;
    per.push_back(std::move(js));
  }
  j["per_sample"] = std::move(per);
  j["macro"] = block_json(r.macro);
  j["micro"] = block_json(r.micro);
  return j.dump(2) + "\n";
}

std::string report_to_table(const MetricsReport& r) {
  const std::vector<std::string> headers{"Averaging", "Precision", "Recall", "Hamming", "Euclidean", "Agreement"};
  std::vector<std::vector<std::string>> rows;
  for (const auto& [name, b] : {std::pair{"macro", r.macro}, std::pair{"micro", r.micro}}) {
    rows.push_back({name, sig6(b.precision), sig6(b.recall), sig6(b.hamming), sig6(b.euclidean), sig6(b.agreement)});
  }
  std::vector<std::size_t> width(headers.size());
  for (std::size_t c = 0; c < headers.size(); ++c) {
    width[c] = headers[c].size();
    for (const auto& row : rows) width[c] = std::max(width[c], row[c].size());
  }
  auto line = [&](const std::vector<std::string>& cells) {
    std::string out;
    for (std::size_t c = 0; c < cells.size(); ++c) {
      if (c > 0) out += "  ";
      out += cells[c] + std::string(width[c] - cells[c].size(), ' ');
    }
    while (!out.empty() && out.back() == ' ') out.pop_back();
    return out + "\n";
  };
  std::string out = line(headers);
  std::size_t total = 0;
  for (std::size_t w : width) total += w;
  out += std::string(total + 2 * (width.size() - 1), '-') + "\n";
  for (const auto& row : rows) out += line(row);
  out += "samples: " + std::to_string(r.per_sample.size()) + "\n";
  return out;
}

}  // namespace tlb
