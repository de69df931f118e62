#include "tlb/train.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <limits>
#include <numeric>

#include "json.hpp"
#include "tlb/error.hpp"
#include "tlb/numerics/adam.hpp"
#include "tlb/parallel.hpp"
#include "tlb/rng.hpp"

namespace tlb {
namespace {

using Json = nlohmann::ordered_json;

constexpr std::uint64_t kShuffleStream = 0x5348554646ULL;
constexpr std::uint64_t kInitStream = 0x494e4954ULL;

// Samples as the models see them: release-ordered.
std::vector<TimelineSample> release_ordered(const Dataset& d) {
  std::vector<TimelineSample> out;
  out.reserve(d.samples.size());
  for (const auto& s : d.samples) out.push_back(permute_sample(s, order_videos_by_release(s)));
  return out;
}

void require_model_input(const Dataset& d, const char* role) {
  if (d.metrics_only) {
    throw InputError(std::string(role) + " set is metrics-only (no embeddings); it cannot feed a model");
  }
}

std::size_t text_dim_of(const Dataset& d) {
  for (const auto& s : d.samples) {
    if (!s.node_text_embeddings) {
      throw InputError("topic " + s.topic_id + " lacks node_text_embeddings needed for distillation");
    }
  }
  if (d.samples.empty() || d.samples.front().node_text_embeddings->empty()) return 0;
  return d.samples.front().node_text_embeddings->front().size();
}

Model frozen_copy(const Model& m) {
  Model out{m.config, m.params.clone()};
  out.params.set_trainable(false);
  return out;
}

// Encoder-1 targets of a frozen teacher, one per ordered training sample.
std::vector<ForwardOutput> teacher_targets(const Model& teacher, const std::vector<TimelineSample>& samples) {
  const Model frozen = frozen_copy(teacher);
  std::vector<ForwardOutput> out;
  out.reserve(samples.size());
  for (const auto& s : samples) {
    ForwardOutput t = model_forward(s, frozen, ForwardMode{});
    t.log_probs = Var();
    out.push_back(std::move(t));
  }
  return out;
}

// Objective for one sample; `weight` scales the CE term so a batch sums to
// the mean over its videos.
Var sample_objective(const Model& m, const TimelineSample& s, ForwardMode mode, double ce_scale,
                     const ForwardOutput* teacher, double distill_scale) {
  const ForwardOutput out = model_forward(s, m, mode);
  Var loss = ops::scale(cross_entropy_loss(out.log_probs, s.labels), m.config.ce_weight * ce_scale);
  if (teacher != nullptr) {
    loss = ops::add(loss, ops::scale(distillation_loss(out, *teacher), m.config.distill_weight * distill_scale));
  }
  return loss;
}

struct Phase {
  Model model;
  TrainReport report;
};

Phase run_training(const Dataset& train_set, const Dataset& val_set, const TrainConfig& cfg, ModelConfig mc,
                   const Model* teacher) {
  const auto t0 = std::chrono::steady_clock::now();
  const std::vector<TimelineSample> samples = release_ordered(train_set);
  std::vector<ForwardOutput> targets;
  if (teacher != nullptr) targets = teacher_targets(*teacher, samples);

  Phase phase{init_model(mc, mix64(cfg.seed ^ kInitStream) + static_cast<std::uint64_t>(mc.text_input)), {}};
  Model& model = phase.model;
  TrainReport& report = phase.report;
  report.model_kind = std::string(to_string(mc.kind)) + (mc.text_input ? "+text" : "");

  auto objective_over = [&](const Model& m) {
    if (samples.empty()) return 0.0;
    const Model frozen = frozen_copy(m);
    std::size_t videos = 0;
    for (const auto& s : samples) videos += s.size();
    double total = 0.0;
    for (std::size_t i = 0; i < samples.size(); ++i) {
      const double ce_scale = static_cast<double>(samples[i].size()) / static_cast<double>(videos);
      const double d_scale = 1.0 / static_cast<double>(samples.size());
      total += sample_objective(frozen, samples[i], ForwardMode{}, ce_scale, targets.empty() ? nullptr : &targets[i],
                                d_scale)
                   .value()[0];
    }
    return total;
  };
  report.initial_train_loss = objective_over(model);

  std::vector<Var> params = model.params.list();
  Adam adam(AdamConfig{cfg.learning_rate});
  Rng shuffle(mix64(cfg.seed ^ kShuffleStream));
  std::vector<std::size_t> order(samples.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  const std::size_t batch = static_cast<std::size_t>(cfg.batch_size);
  std::uint64_t forward_counter = 0;

  ModelParams best = model.params.clone();
  report.best_selection = -std::numeric_limits<double>::infinity();
  for (int epoch = 1; epoch <= cfg.epochs; ++epoch) {
    shuffle.shuffle(order.begin(), order.end());
    double loss_sum = 0.0;
    std::size_t batches = 0;
    for (std::size_t start = 0; start < order.size(); start += batch) {
      const std::size_t end = std::min(order.size(), start + batch);
      std::size_t videos = 0;
      for (std::size_t i = start; i < end; ++i) videos += samples[order[i]].size();
      model.params.zero_grad();
      double batch_loss = 0.0;
      for (std::size_t i = start; i < end; ++i) {
        const std::size_t idx = order[i];
        const ForwardMode mode{true, cfg.seed, forward_counter++};
        const Var loss = sample_objective(model, samples[idx], mode,
                                          static_cast<double>(samples[idx].size()) / static_cast<double>(videos),
                                          targets.empty() ? nullptr : &targets[idx],
                                          1.0 / static_cast<double>(end - start));
        backward(loss);
        batch_loss += loss.value()[0];
      }
      adam.step(params);
      loss_sum += batch_loss;
      ++batches;
    }
    EpochRecord rec;
    rec.epoch = epoch;
    rec.train_loss = batches > 0 ? loss_sum / static_cast<double>(batches) : 0.0;
    if (!val_set.samples.empty()) {
      rec.validation = evaluate(model, val_set, cfg.score, cfg.threads);
      rec.selection = selection_value(rec.validation, cfg.selection_metric);
    } else {
      rec.selection = static_cast<double>(epoch);  // no validation data: keep the last epoch
    }
    if (rec.selection > report.best_selection) {
      report.best_selection = rec.selection;
      report.best_epoch = epoch;
      best = model.params.clone();
    }
    report.epochs.push_back(std::move(rec));
  }
  if (cfg.epochs > 0) model.params = std::move(best);
  model.params.set_trainable(true);
  report.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return phase;
}

Json block_json(const MetricBlock& b) {
  Json j;
  j["precision"] = b.precision;
  j["recall"] = b.recall;
  j["hamming"] = b.hamming;
  j["euclidean"] = b.euclidean;
  j["agreement"] = b.agreement;
  return j;
}

}  // namespace

void validate_train_config(const TrainConfig& cfg) {
  if (cfg.epochs < 0) throw ConfigError("epochs must be >= 0");
  if (cfg.batch_size <= 0) throw ConfigError("batch_size must be positive");
  if (!(cfg.learning_rate > 0.0)) throw ConfigError("learning_rate must be positive");
  if (cfg.dropout_p < 0.0 || cfg.dropout_p >= 1.0) throw ConfigError("dropout_p must lie in [0, 1)");
  if (cfg.lr_grid.empty() || cfg.dropout_grid.empty()) throw ConfigError("grids must be non-empty");
  for (double lr : cfg.lr_grid)
    if (!(lr > 0.0)) throw ConfigError("lr_grid entries must be positive");
  for (double p : cfg.dropout_grid)
    if (p < 0.0 || p >= 1.0) throw ConfigError("dropout_grid entries must lie in [0, 1)");
  validate_score_config(cfg.score);
  MetricsReport probe;
  (void)selection_value(probe, cfg.selection_metric);
}

double selection_value(const MetricsReport& r, std::string_view metric) {
  double v;
  if (metric == "micro_agreement") v = r.micro.agreement;
  else if (metric == "macro_agreement") v = r.macro.agreement;
  else if (metric == "micro_precision") v = r.micro.precision;
  else if (metric == "micro_recall") v = r.micro.recall;
  else if (metric == "micro_hamming") v = -r.micro.hamming;
  else if (metric == "micro_euclidean") v = -r.micro.euclidean;
  else throw ConfigError("unknown selection metric '" + std::string(metric) + "'");
  return std::isnan(v) ? -std::numeric_limits<double>::infinity() : v;
}

TrainConfig parse_train_config(std::string_view json_text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(json_text, nullptr, true, true);
  } catch (const nlohmann::json::parse_error& e) {
    throw ParseError(std::string("train config: ") + e.what());
  }
  if (!j.is_object()) throw ConfigError("train config must be a JSON object");
  TrainConfig cfg;
  try {
    for (const auto& [key, value] : j.items()) {
      if (key == "epochs") cfg.epochs = value.get<int>();
      else if (key == "batch_size") cfg.batch_size = value.get<int>();
      else if (key == "learning_rate") cfg.learning_rate = value.get<double>();
      else if (key == "dropout_p") cfg.dropout_p = value.get<double>();
      else if (key == "lr_grid") cfg.lr_grid = value.get<std::vector<double>>();
      else if (key == "dropout_grid") cfg.dropout_grid = value.get<std::vector<double>>();
      else if (key == "seed") cfg.seed = value.get<std::uint64_t>();
      else if (key == "selection_metric") cfg.selection_metric = value.get<std::string>();
      else if (key == "threads") cfg.threads = value.get<unsigned>();
      else if (key == "sigma") {
        cfg.score.sigma = value.is_string() ? Ratio::parse(value.get<std::string>()) : Ratio::from_double(value.get<double>());
      } else if (key == "model") {
        for (const auto& [mk, mv] : value.items()) {
          auto& m = cfg.model;
          if (mk == "kind") m.kind = parse_model_kind(mv.get<std::string>());
          else if (mk == "d_model") m.d_model = mv.get<std::size_t>();
          else if (mk == "num_heads") m.num_heads = mv.get<std::size_t>();
          else if (mk == "num_layers") m.num_layers = mv.get<std::size_t>();
          else if (mk == "ff_dim") m.ff_dim = mv.get<std::size_t>();
          else if (mk == "use_video_pe") m.use_video_pe = mv.get<bool>();
          else if (mk == "use_encoders_2_3") m.use_encoders_2_3 = mv.get<bool>();
          else if (mk == "distill_weight") m.distill_weight = mv.get<double>();
          else if (mk == "ce_weight") m.ce_weight = mv.get<double>();
          else throw ConfigError("train config: unknown model key \"" + mk + "\"");
        }
      } else {
        throw ConfigError("train config: unknown key \"" + key + "\"");
      }
    }
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("train config: ") + e.what());
  }
  validate_train_config(cfg);
  return cfg;
}

std::string train_config_to_json(const TrainConfig& cfg) {
  Json j;
  j["epochs"] = cfg.epochs;
  j["batch_size"] = cfg.batch_size;
  j["learning_rate"] = cfg.learning_rate;
  j["dropout_p"] = cfg.dropout_p;
  j["lr_grid"] = cfg.lr_grid;
  j["dropout_grid"] = cfg.dropout_grid;
  j["seed"] = cfg.seed;
  j["selection_metric"] = cfg.selection_metric;
  j["sigma"] = cfg.score.sigma.to_double();
  // Only the keys the parser accepts; the rest are derived from the data.
  const auto& m = cfg.model;
  j["model"] = {{"kind", to_string(m.kind)},        {"d_model", m.d_model},
                {"num_heads", m.num_heads},         {"num_layers", m.num_layers},
                {"ff_dim", m.ff_dim},               {"use_video_pe", m.use_video_pe},
                {"use_encoders_2_3", m.use_encoders_2_3}, {"distill_weight", m.distill_weight},
                {"ce_weight", m.ce_weight}};
  return j.dump(2) + "\n";
}

TrainResult train(const Dataset& train_set, const Dataset& val_set, const TrainConfig& cfg, const Model* teacher) {
  validate_train_config(cfg);
  require_model_input(train_set, "training");
  if (!val_set.samples.empty()) require_model_input(val_set, "validation");
  if (!val_set.samples.empty() && val_set.embedding_dim != train_set.embedding_dim) {
    throw DimensionError("validation embedding dimension " + std::to_string(val_set.embedding_dim) +
                         " != training " + std::to_string(train_set.embedding_dim));
  }
  ModelConfig mc = cfg.model;
  mc.input_dim = train_set.embedding_dim;
  mc.dropout_p = cfg.dropout_p;
  mc.text_input = false;
  mc.d_text = 0;

  TrainResult result;
  if (mc.kind == ModelKind::label_oracle) {
    result.model = init_model(mc, 0);
    result.report.model_kind = std::string(to_string(mc.kind));
    return result;
  }
  if (mc.kind != ModelKind::tri_distill) {
    Phase p = run_training(train_set, val_set, cfg, mc, nullptr);
    result.model = std::move(p.model);
    result.report = std::move(p.report);
    return result;
  }

  if (teacher == nullptr) {
    ModelConfig tc = mc;
    tc.kind = ModelKind::tri;
    tc.text_input = true;
    tc.d_text = text_dim_of(train_set);
    if (!val_set.samples.empty()) (void)text_dim_of(val_set);
    Phase tp = run_training(train_set, val_set, cfg, tc, nullptr);
    result.teacher = std::move(tp.model);
    result.teacher_report = std::move(tp.report);
  } else {
    if (!teacher->config.text_input) throw ConfigError("distillation teacher must take node text input");
    result.teacher = *teacher;
  }
  Phase sp = run_training(train_set, val_set, cfg, mc, &*result.teacher);
  result.model = std::move(sp.model);
  result.report = std::move(sp.report);
  return result;
}

double dataset_loss(const Model& m, const Dataset& d) {
  const auto samples = release_ordered(d);
  const Model frozen = frozen_copy(m);
  std::size_t videos = 0;
  double total = 0.0;
  for (const auto& s : samples) {
    total += cross_entropy_loss(model_forward(s, frozen, ForwardMode{}).log_probs, s.labels).value()[0] *
             static_cast<double>(s.size());
    videos += s.size();
  }
  return videos > 0 ? m.config.ce_weight * total / static_cast<double>(videos) : 0.0;
}

Predictions predict_dataset(const Model& m, const Dataset& d, unsigned threads) {
  if (m.config.kind != ModelKind::label_oracle) {
    require_model_input(d, "evaluation");
    if (d.embedding_dim != m.config.input_dim && !d.samples.empty()) {
      throw DimensionError("dataset embedding dimension " + std::to_string(d.embedding_dim) +
                           " != checkpoint input dimension " + std::to_string(m.config.input_dim));
    }
  }
  const Model frozen = frozen_copy(m);
  std::vector<LabelVector> out(d.samples.size());
  parallel_for(d.samples.size(), resolve_threads(threads),
               [&](std::size_t i) { out[i] = predict_sample(frozen, d.samples[i]); });
  Predictions p;
  for (std::size_t i = 0; i < out.size(); ++i) p[d.samples[i].topic_id] = std::move(out[i]);
  return p;
}

MetricsReport evaluate(const Model& m, const Dataset& d, const ScoreConfig& score, unsigned threads) {
  return score_dataset(d, predict_dataset(m, d, threads), score, resolve_threads(threads));
}

GridResult grid_search(const Dataset& train_set, const Dataset& val_set, const TrainConfig& cfg) {
  validate_train_config(cfg);
  std::vector<TrainConfig> cells;
  for (double lr : cfg.lr_grid) {
    for (double p : cfg.dropout_grid) {
      TrainConfig c = cfg;
      c.learning_rate = lr;
      c.dropout_p = p;
      cells.push_back(std::move(c));
    }
  }
  const unsigned threads = resolve_threads(cfg.threads);
  std::vector<std::optional<TrainResult>> results(cells.size());
  if (threads > 1) {
    for (auto& c : cells) c.threads = 1;
  }
  parallel_for(cells.size(), threads, [&](std::size_t i) { results[i] = train(train_set, val_set, cells[i]); });

  GridResult g;
  std::size_t best = 0;
  for (std::size_t i = 0; i < cells.size(); ++i) {
    const double sel = results[i]->report.best_selection;
    g.cells.push_back({cells[i].learning_rate, cells[i].dropout_p, sel});
    if (sel > results[best]->report.best_selection) best = i;
  }
  g.best_config = cells[best];
  g.best_config.threads = cfg.threads;
  g.best = std::move(*results[best]);
  return g;
}

std::string train_report_to_json(const TrainReport& r) {
  Json j;
  j["model_kind"] = r.model_kind;
  j["initial_train_loss"] = r.initial_train_loss;
  Json epochs = Json::array();
  for (const auto& e : r.epochs) {
    Json je;
    je["epoch"] = e.epoch;
    je["train_loss"] = e.train_loss;
    je["selection"] = e.selection;
    if (!e.validation.per_sample.empty()) {
      je["validation"]["macro"] = block_json(e.validation.macro);
      je["validation"]["micro"] = block_json(e.validation.micro);
    }
    epochs.push_back(std::move(je));
  }
  j["epochs"] = std::move(epochs);
  j["best_epoch"] = r.best_epoch;
  j["best_selection"] = r.best_selection;
  return j.dump(2) + "\n";
}

std::string train_report_to_log(const TrainReport& r) {
  std::string out = "model " + r.model_kind + "\n";
  char buf[160];
  std::snprintf(buf, sizeof(buf), "initial train loss %.6f\n", r.initial_train_loss);
  out += buf;
  for (const auto& e : r.epochs) {
    std::snprintf(buf, sizeof(buf), "epoch %3d  loss %.6f  val micro agreement %.4f  hamming %.4f  selection %.6g\n",
                  e.epoch, e.train_loss, e.validation.micro.agreement, e.validation.micro.hamming, e.selection);
    out += buf;
  }
  std::snprintf(buf, sizeof(buf), "best epoch %d (selection %.6g), %.1f s\n", r.best_epoch, r.best_selection,
                r.wall_seconds);
  out += buf;
  return out;
}

}  // namespace tlb
