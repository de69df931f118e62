// Acceptance run: one PASS/FAIL line per criterion. With arguments, runs only
// the listed criteria (e.g. `tlb_acceptance 1 2 9`).

#include <sys/wait.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <functional>
#include <map>
#include <numeric>
#include <set>
#include <string>
#include <vector>

#include "grad_suite.hpp"
#include "oracles.hpp"
#include "tlb/data.hpp"
#include "tlb/metrics.hpp"
#include "tlb/models.hpp"
#include "tlb/train.hpp"

namespace {

using namespace tlb;
namespace fs = std::filesystem;
using Clock = std::chrono::steady_clock;

struct Outcome {
  bool pass = false;
  std::string detail;
};

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof(buf), f, args...);
  return buf;
}

const LabelVector kGt{1, 1, 1, 1, 1, 2, 2, 2, 2, 3};
const LabelVector kPred{1, 1, 1, 1, 3, 4, 2, 2, 4, 3};

Outcome worked_example() {
  const auto t0 = Clock::now();
  const ScoreConfig cfg{};
  const NodeMatch m = node_precision_recall(kGt, kPred, cfg);
  const bool ok = m.precision() == Ratio{3, 4} && m.recall() == Ratio{1, 1} && hamming(kGt, kPred) == Ratio{3, 10} &&
                  euclidean(kGt, kPred) == Ratio{3, 5} && pairwise_agreement(kGt, kPred) == PairCount{32, 45};
  const double ms = 1e3 * seconds_since(t0);
  return {ok && ms < 1.0, fmt("P=3/4 R=1 H=3/10 E=3/5 A=32/45 %s, %.3f ms", ok ? "exact" : "MISMATCH", ms)};
}

Outcome skip_empty() {
  const LabelVector out = postprocess_skip_empty({1, 1, 4, 2});
  return {out == LabelVector{1, 1, 3, 2}, fmt("{1,1,4,2} -> {%d,%d,%d,%d}", out[0], out[1], out[2], out[3])};
}

Outcome matching_oracle() {
  const auto t0 = Clock::now();
  Rng rng(1000);
  int mismatches = 0;
  for (int trial = 0; trial < 1000; ++trial) {
    const auto k = static_cast<std::size_t>(rng.uniform_int(1, 8));
    const auto kh = static_cast<std::size_t>(rng.uniform_int(1, 8));
    const auto edges = testkit::random_bipartite(rng, k, kh, rng.uniform());
    if (max_bipartite_matching(edges, k, kh) != testkit::brute_force_matching(edges, k, kh)) ++mismatches;
  }
  const double s = seconds_since(t0);
  return {mismatches == 0 && s < 5.0, fmt("1000 graphs, %d mismatches, %.2f s", mismatches, s)};
}

Outcome metric_invariants() {
  Rng rng(4000);
  const ScoreConfig cfg{};
  int perm = 0, bound = 0, swap = 0;
  for (int trial = 0; trial < 1000; ++trial) {
    const auto n = static_cast<std::size_t>(rng.uniform_int(2, 40));
    const int k = static_cast<int>(rng.uniform_int(2, std::min<std::int64_t>(24, static_cast<std::int64_t>(n))));
    const LabelVector gt = testkit::random_partition(rng, n, k);
    const LabelVector pred = testkit::random_labels(rng, n, static_cast<int>(rng.uniform_int(1, 24)));

    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    rng.shuffle(order.begin(), order.end());
    LabelVector gt2, pred2;
    for (std::size_t i : order) {
      gt2.push_back(gt[i]);
      pred2.push_back(pred[i]);
    }
    if (!(score_sample(gt, pred, cfg) == score_sample(gt2, pred2, cfg))) ++perm;
    if (!(hamming(gt, pred) <= euclidean(gt, pred))) ++bound;

    const NodeMatch a = node_precision_recall(gt, pred, cfg);
    const NodeMatch b = node_precision_recall(pred, gt, cfg);
    const bool swapped = a.precision() == b.recall() && a.recall() == b.precision() &&
                         hamming(gt, pred) == hamming(pred, gt) && euclidean(gt, pred) == euclidean(pred, gt) &&
                         pairwise_agreement(gt, pred) == pairwise_agreement(pred, gt);
    if (!swapped) ++swap;
  }
  return {perm + bound + swap == 0,
          fmt("1000 pairs; violations: permutation %d, hamming<=euclidean %d, swap %d", perm, bound, swap)};
}

Outcome gradient_checks() {
  const auto t0 = Clock::now();
  double worst = 0.0;
  std::string worst_name;
  std::size_t failed = 0;
  const auto cases = testkit::grad_cases();
  for (const auto& c : cases) {
    const double err = c.run().max_relative_error;
    if (!(err <= 1e-4)) ++failed;
    if (!(err <= worst)) {
      worst = err;
      worst_name = c.name;
    }
  }
  const double s = seconds_since(t0);
  return {failed == 0 && s < 30.0,
          fmt("%zu cases, %zu over 1e-4, worst %.2e (%s), %.1f s", cases.size(), failed, worst, worst_name.c_str(), s)};
}

int run_cli(const fs::path& dir, const std::string& args) {
  const std::string cmd = "cd '" + dir.string() + "' && " + TLB_CLI_PATH + " " + args + " >>cli.out 2>>cli.err";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

Outcome determinism() {
  const fs::path root = fs::temp_directory_path() / "tlb_acceptance_determinism";
  fs::remove_all(root);
  const std::vector<std::string> artifacts{"d.train.json",      "d.val.json", "d.test.json", "m.ckpt", "m.ckpt.report.json",
                                           "m.ckpt.teacher",    "m.ckpt.teacher.report.json", "eval.json"};
  std::vector<std::string> runs;
  for (const char* name : {"a", "b"}) {
    const fs::path dir = root / name;
    fs::create_directories(dir);
    write_text_file(dir / "gen.json", R"({"num_timelines": 20, "node_count_range": [2, 4],
      "videos_per_node_range": [2, 4], "embedding_dim": 8})");
    write_text_file(dir / "train.json", R"({"epochs": 3, "batch_size": 4, "learning_rate": 0.005, "dropout_p": 0.1,
      "model": {"d_model": 16, "num_heads": 2, "num_layers": 1, "ff_dim": 32}})");
    const int codes = run_cli(dir, "gen --config gen.json --seed 11 --out d.json --split 0.8,0.1,0.1") +
                      run_cli(dir, "train --data d.train.json --val d.val.json --model tri-distill --seed 5 "
                                   "--config train.json --out-ckpt m.ckpt") +
                      run_cli(dir, "eval --data d.test.json --ckpt m.ckpt --format json --out eval.json");
    if (codes != 0) return {false, std::string("CLI pipeline failed in run ") + name};
  }
  std::size_t differing = 0;
  std::string first_diff;
  for (const auto& f : artifacts) {
    if (read_text_file(root / "a" / f) != read_text_file(root / "b" / f)) {
      if (differing++ == 0) first_diff = f;
    }
  }
  fs::remove_all(root);
  return {differing == 0, differing == 0 ? fmt("gen+train(tri-distill)+eval twice: %zu artifacts byte-identical",
                                               artifacts.size())
                                         : "differs: " + first_diff};
}

// Shared data and settings for the training criteria.
GenConfig training_gen() {
  GenConfig g;
  g.num_timelines = 250;
  g.node_count_range = {2, 4};
  g.videos_per_node_range = {3, 5};
  g.embedding_dim = 16;
  g.video_noise_sigma = 0.02;
  g.text_noise_sigma = 0.0;
  g.release_overlap_fraction = 0.1;
  g.seed = 7;
  return g;
}

TrainConfig training_config(ModelKind kind, std::uint64_t seed) {
  TrainConfig cfg;
  cfg.epochs = 60;
  cfg.batch_size = 8;
  cfg.learning_rate = 1e-3;
  cfg.dropout_p = 0.0;
  cfg.seed = seed;
  cfg.model.kind = kind;
  cfg.model.d_model = 64;
  cfg.model.num_heads = 4;
  cfg.model.num_layers = 2;
  cfg.model.ff_dim = 128;
  return cfg;
}

struct TrainingData {
  Dataset train, val, test;
};

const TrainingData& training_data() {
  static const TrainingData data = [] {
    const GenConfig g = training_gen();
    auto parts = split_dataset(generate_synthetic(g), SplitRatios{}, g.seed);
    return TrainingData{std::move(parts[0]), std::move(parts[1]), std::move(parts[2])};
  }();
  return data;
}

// Each video goes to the node whose text embedding (the noiseless event
// vector here) has the highest cosine similarity.
Predictions nearest_event_predictions(const Dataset& d) {
  Predictions out;
  for (const auto& s : d.samples) {
    LabelVector labels;
    for (const auto& v : s.videos) {
      double best = -INFINITY;
      NodeId arg = 1;
      for (std::size_t k = 0; k < s.node_text_embeddings->size(); ++k) {
        const auto& e = (*s.node_text_embeddings)[k];
        const double dot = std::inner_product(v.embedding.begin(), v.embedding.end(), e.begin(), 0.0);
        const double norm = std::sqrt(std::inner_product(e.begin(), e.end(), e.begin(), 0.0) *
                                      std::inner_product(v.embedding.begin(), v.embedding.end(), v.embedding.begin(), 0.0));
        if (dot / norm > best) {
          best = dot / norm;
          arg = static_cast<NodeId>(k + 1);
        }
      }
      labels.push_back(arg);
    }
    out[s.topic_id] = postprocess_skip_empty(labels);
  }
  return out;
}

struct RunScore {
  double agreement = 0.0;
  double hamming = 0.0;
  double seconds = 0.0;
};

RunScore score_model(const Model& m, double seconds) {
  const MetricsReport r = evaluate(m, training_data().test, ScoreConfig{});
  return {r.micro.agreement, r.micro.hamming, seconds};
}

RunScore train_and_score(ModelKind kind, std::uint64_t seed, bool video_pe = true, bool enc23 = true,
                         RunScore* teacher = nullptr) {
  TrainConfig cfg = training_config(kind, seed);
  cfg.model.use_video_pe = video_pe;
  cfg.model.use_encoders_2_3 = enc23;
  const auto t0 = Clock::now();
  const TrainResult r = train(training_data().train, training_data().val, cfg);
  const double s = seconds_since(t0);
  if (teacher && r.teacher) *teacher = score_model(*r.teacher, r.teacher_report ? r.teacher_report->wall_seconds : 0.0);
  return score_model(r.model, s);
}

// Tri seed-0 result, shared by criteria 7 and 8.
const RunScore& tri_seed0() {
  static const RunScore r = train_and_score(ModelKind::tri, 0);
  return r;
}

Outcome training_sanity() {
  const TrainingData& d = training_data();
  const MetricsReport oracle = score_dataset(d.test, nearest_event_predictions(d.test), ScoreConfig{});
  const std::string sizes = fmt("%zu/%zu/%zu timelines", d.train.samples.size(), d.val.samples.size(),
                                d.test.samples.size());
  if (!(oracle.micro.agreement >= 0.95)) {
    return {false, fmt("%s; oracle gate failed: nearest-event agreement %.4f < 0.95", sizes.c_str(),
                       oracle.micro.agreement)};
  }
  const RunScore r = tri_seed0();
  const bool ok = r.agreement >= 0.90 && r.hamming <= 0.20 && r.seconds <= 600.0;
  return {ok, fmt("%s; oracle agreement %.4f; Tri 60 epochs: agreement %.4f (>= 0.90), hamming %.4f (<= 0.20), "
                  "%.0f s (<= 600)",
                  sizes.c_str(), oracle.micro.agreement, r.agreement, r.hamming, r.seconds)};
}

double median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  return v[v.size() / 2];
}

Outcome trend_checks() {
  constexpr int kSeeds = 5;
  std::vector<double> teacher, distill, tri, v, nope, nope23;
  for (int seed = 0; seed < kSeeds; ++seed) {
    RunScore t;
    distill.push_back(train_and_score(ModelKind::tri_distill, seed, true, true, &t).agreement);
    teacher.push_back(t.agreement);
    tri.push_back(seed == 0 ? tri_seed0().agreement : train_and_score(ModelKind::tri, seed).agreement);
    v.push_back(train_and_score(ModelKind::v, seed).agreement);
    nope.push_back(train_and_score(ModelKind::tri, seed, false, true).agreement);
    nope23.push_back(train_and_score(ModelKind::tri, seed, false, false).agreement);
    std::printf("  seed %d agreement: teacher %.4f distill %.4f tri %.4f v %.4f noPE %.4f noPE+noEnc23 %.4f\n", seed,
                teacher.back(), distill.back(), tri.back(), v.back(), nope.back(), nope23.back());
    std::fflush(stdout);
  }
  const double mt = median(teacher), md = median(distill), mtri = median(tri), mv = median(v), mn = median(nope),
               mn23 = median(nope23);
  const bool table1 = mt >= md && md >= mtri && mtri >= mv;
  const bool table3 = mtri >= mn && mn >= mn23;
  return {table1 && table3,
          fmt("medians over %d seeds: teacher %.4f %s distill %.4f %s tri %.4f %s v %.4f; tri %.4f %s noPE %.4f %s "
              "noPE+noEnc23 %.4f",
              kSeeds, mt, mt >= md ? ">=" : "<", md, md >= mtri ? ">=" : "<", mtri, mtri >= mv ? ">=" : "<", mv,
              mtri, mtri >= mn ? ">=" : "<", mn, mn >= mn23 ? ">=" : "<", mn23)};
}

Outcome published_listing() {
  try {
    const Dataset d = parse_dataset(read_text_file(fs::path(TLB_TEST_DATA_DIR) / "japan_tsunami_timeline.json"));
    bool valid = d.samples.size() == 1;
    for (const auto& s : d.samples) valid = valid && validate_sample(s).empty();
    StatsReport r = dataset_stats(d);
    const std::map<std::size_t, std::size_t> hist{{5, 2}, {4, 1}, {2, 1}, {1, 1}};
    const bool ok = valid && r.timelines == 1 && r.nodes == 5 && r.videos == 17 && r.videos_per_node == hist;
    return {ok, fmt("timelines %zu, nodes %zu, videos %zu, videos-per-node {5:%zu, 4:%zu, 2:%zu, 1:%zu}", r.timelines,
                    r.nodes, r.videos, r.videos_per_node[5], r.videos_per_node[4], r.videos_per_node[2],
                    r.videos_per_node[1])};
  } catch (const std::exception& e) {
    return {false, std::string("load failed: ") + e.what()};
  }
}

struct Criterion {
  int id;
  const char* title;
  std::function<Outcome()> check;
};

}  // namespace

int main(int argc, char** argv) {
  const std::vector<Criterion> all{
      {1, "worked-example golden metrics", worked_example},
      {2, "post-processing golden", skip_empty},
      {3, "matching vs exhaustive oracle", matching_oracle},
      {4, "metric invariants", metric_invariants},
      {5, "gradient checks", gradient_checks},
      {6, "end-to-end determinism", determinism},
      {7, "training sanity", training_sanity},
      {8, "directional trends", trend_checks},
      {9, "published listing compatibility", published_listing},
  };
  std::set<int> wanted;
  for (int i = 1; i < argc; ++i) wanted.insert(std::atoi(argv[i]));

  int failures = 0;
  for (const auto& c : all) {
    if (!wanted.empty() && !wanted.contains(c.id)) continue;
    Outcome o;
    try {
      o = c.check();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    if (!o.pass) ++failures;
    std::printf("criterion %d %s: %s (%s)\n", c.id, o.pass ? "PASS" : "FAIL", c.title, o.detail.c_str());
    std::fflush(stdout);
  }
  return failures == 0 ? 0 : 1;
}
