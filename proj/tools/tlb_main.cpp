// tlb: timeline benchmark command-line driver.
//
//   tlb gen     --config gen.json --seed 7 --out data.json [--split 0.8,0.1,0.1]
//   tlb stats   --data data.json
//   tlb score   --gt gt.json --pred pred.json --sigma 0.5 --format table|json
//   tlb train   --data train.json --val val.json --model tri --out-ckpt m.ckpt
//   tlb predict --data test.json --ckpt m.ckpt --out pred.json
//   tlb eval    --data test.json --ckpt m.ckpt --sigma 0.5
//   tlb grid    --data train.json --val val.json --model tri --grid-config grid.json
//
// Exit codes: 0 success, 1 validation/config error, 2 IO error.

#include <cstdio>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "tlb/data.hpp"
#include "tlb/error.hpp"
#include "tlb/metrics.hpp"
#include "tlb/models.hpp"
#include "tlb/parallel.hpp"
#include "tlb/train.hpp"

namespace {

using namespace tlb;

// Results go to `out` when given, else to stdout.
void emit(const std::string& out, const std::string& text) {
  if (out.empty()) {
    std::cout << text;
  } else {
    write_text_file(out, text);
  }
}

Dataset load_dataset(const std::string& path) { return parse_dataset(read_text_file(path)); }

ScoreConfig score_config(const std::string& sigma) {
  ScoreConfig cfg{Ratio::parse(sigma)};
  validate_score_config(cfg);
  return cfg;
}

std::string format_report(const MetricsReport& r, const std::string& format) {
  return format == "json" ? report_to_json(r) : report_to_table(r);
}

SplitRatios parse_split(const std::string& text) {
  std::vector<double> parts;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      parts.push_back(std::stod(item));
    } catch (const std::exception&) {
      throw ConfigError("--split: '" + item + "' is not a number");
    }
  }
  if (parts.size() != 3) throw ConfigError("--split expects three comma-separated ratios");
  return {parts[0], parts[1], parts[2]};
}

std::string split_path(const std::string& out, const char* name) {
  const std::string stem = out.size() > 5 && out.ends_with(".json") ? out.substr(0, out.size() - 5) : out;
  return stem + "." + name + ".json";
}

Model load_model(const std::string& path) { return model_from_checkpoint(load_checkpoint(path)); }

struct TrainFlags {
  std::string data, val, model = "tri", config, out_ckpt, teacher;
  std::optional<std::uint64_t> seed;
  bool no_video_pe = false;
  bool no_encoders_23 = false;
};

TrainConfig build_train_config(const TrainFlags& f, unsigned threads) {
  TrainConfig cfg = f.config.empty() ? TrainConfig{} : parse_train_config(read_text_file(f.config));
  cfg.model.kind = parse_model_kind(f.model);
  if (f.seed) cfg.seed = *f.seed;
  if (f.no_video_pe) cfg.model.use_video_pe = false;
  if (f.no_encoders_23) cfg.model.use_encoders_2_3 = false;
  cfg.threads = threads;
  validate_train_config(cfg);
  return cfg;
}

void write_training_outputs(const std::string& ckpt, const TrainResult& r) {
  if (ckpt.empty()) {
    std::cout << train_report_to_json(r.report);
    return;
  }
  save_checkpoint(ckpt, model_to_checkpoint(r.model));
  write_text_file(ckpt + ".report.json", train_report_to_json(r.report));
  std::string log = train_report_to_log(r.report);
  if (r.teacher) {
    save_checkpoint(ckpt + ".teacher", model_to_checkpoint(*r.teacher));
    if (r.teacher_report) {
      write_text_file(ckpt + ".teacher.report.json", train_report_to_json(*r.teacher_report));
      log = train_report_to_log(*r.teacher_report) + log;
    }
  }
  write_text_file(ckpt + ".log", log);
}

void add_train_flags(CLI::App* cmd, TrainFlags& f) {
  cmd->add_option("--data", f.data, "training set")->required();
  cmd->add_option("--val", f.val, "validation set (best-epoch selection)");
  cmd->add_option("--model", f.model, "v | tri | tri-distill")
      ->check(CLI::IsMember({"v", "tri", "tri-distill", "tri_distill", "label-oracle"}));
  cmd->add_option("--seed", f.seed, "training seed (overrides the config)");
  cmd->add_flag("--no-video-pe", f.no_video_pe, "drop the video positional encoding");
  cmd->add_flag("--no-encoders-23", f.no_encoders_23, "Tri only: skip the node-only and video-only encoders");
  cmd->add_option("--out-ckpt", f.out_ckpt,
                  "checkpoint path; also writes <path>.report.json, <path>.log and, for tri-distill, <path>.teacher");
}

int run(int argc, char** argv) {
  CLI::App app{"Timeline benchmark toolkit: data, metrics and Tri-Transformer baselines"};
  app.require_subcommand(1);
  unsigned threads = 0;
  app.add_option("--threads", threads, "worker threads (default: $TLB_THREADS or 1)");

  // gen
  std::string gen_config, gen_out, gen_split;
  std::optional<std::uint64_t> gen_seed;
  auto* gen = app.add_subcommand("gen", "generate a synthetic dataset");
  gen->add_option("--config", gen_config, "generator config JSON");
  gen->add_option("--seed", gen_seed, "generator seed (overrides the config)");
  gen->add_option("--out", gen_out, "output path (stdout when omitted)");
  gen->add_option("--split", gen_split, "train,val,test ratios; writes <out>.{train,val,test}.json")
      ->needs(gen->get_option("--out"));

  // stats
  std::string stats_data, stats_out;
  auto* stats = app.add_subcommand("stats", "dataset statistics as JSON");
  stats->add_option("--data", stats_data, "dataset")->required();
  stats->add_option("--out", stats_out, "output path");

  // score
  std::string score_gt, score_pred, score_sigma = "0.5", score_format = "table", score_out;
  bool score_raw = false;
  auto* score = app.add_subcommand("score", "score predictions against ground truth");
  score->add_option("--gt", score_gt, "ground-truth dataset")->required();
  score->add_option("--pred", score_pred, "predictions {topic_id: [labels]}")->required();
  score->add_option("--sigma", score_sigma, "IoU threshold, decimal in (0, 1]");
  score->add_option("--format", score_format, "table | json")->check(CLI::IsMember({"table", "json"}));
  score->add_option("--out", score_out, "output path");
  score->add_flag("--raw", score_raw, "score predictions as given, without skipping empty nodes");

  // train
  TrainFlags train_flags;
  auto* train_cmd = app.add_subcommand("train", "train a model");
  add_train_flags(train_cmd, train_flags);
  train_cmd->add_option("--config", train_flags.config, "training config JSON");
  train_cmd->add_option("--teacher", train_flags.teacher, "tri-distill: reuse this teacher checkpoint");

  // predict
  std::string pred_data, pred_ckpt, pred_out;
  auto* predict = app.add_subcommand("predict", "write predicted labels");
  predict->add_option("--data", pred_data, "dataset")->required();
  predict->add_option("--ckpt", pred_ckpt, "checkpoint")->required();
  predict->add_option("--out", pred_out, "output path");

  // eval
  std::string eval_data, eval_ckpt, eval_sigma = "0.5", eval_format = "table", eval_out;
  auto* eval = app.add_subcommand("eval", "predict and score a dataset");
  eval->add_option("--data", eval_data, "dataset")->required();
  eval->add_option("--ckpt", eval_ckpt, "checkpoint")->required();
  eval->add_option("--sigma", eval_sigma, "IoU threshold, decimal in (0, 1]");
  eval->add_option("--format", eval_format, "table | json")->check(CLI::IsMember({"table", "json"}));
  eval->add_option("--out", eval_out, "output path");

  // grid
  TrainFlags grid_flags;
  auto* grid = app.add_subcommand("grid", "learning-rate x dropout grid search");
  add_train_flags(grid, grid_flags);
  grid->add_option("--grid-config", grid_flags.config, "training config JSON with lr_grid / dropout_grid");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : 1;
  }
  threads = resolve_threads(threads);

  if (*gen) {
    GenConfig cfg = gen_config.empty() ? GenConfig{} : parse_gen_config(read_text_file(gen_config));
    if (gen_seed) cfg.seed = *gen_seed;
    validate_gen_config(cfg);
    const Dataset d = generate_synthetic(cfg);
    if (gen_split.empty()) {
      emit(gen_out, write_dataset(d));
    } else {
      const auto parts = split_dataset(d, parse_split(gen_split), cfg.seed);
      std::vector<std::string> texts;
      for (const auto& p : parts) texts.push_back(write_dataset(p));
      const char* names[] = {"train", "val", "test"};
      for (std::size_t i = 0; i < 3; ++i) write_text_file(split_path(gen_out, names[i]), texts[i]);
    }
  } else if (*stats) {
    const Dataset d = load_dataset(stats_data);
    emit(stats_out, stats_to_json(dataset_stats(d)));
  } else if (*score) {
    const ScoreConfig cfg = score_config(score_sigma);
    const Dataset gt = load_dataset(score_gt);
    Predictions preds = parse_predictions(read_text_file(score_pred));
    if (!score_raw) {
      for (auto& [topic, labels] : preds) labels = postprocess_skip_empty(labels);
    }
    emit(score_out, format_report(score_dataset(gt, preds, cfg, threads), score_format));
  } else if (*train_cmd) {
    const TrainConfig cfg = build_train_config(train_flags, threads);
    const Dataset train_set = load_dataset(train_flags.data);
    const Dataset val_set = train_flags.val.empty() ? Dataset{} : load_dataset(train_flags.val);
    std::optional<Model> teacher;
    if (!train_flags.teacher.empty()) teacher = load_model(train_flags.teacher);
    const TrainResult r = train(train_set, val_set, cfg, teacher ? &*teacher : nullptr);
    write_training_outputs(train_flags.out_ckpt, r);
  } else if (*predict) {
    const Model m = load_model(pred_ckpt);
    const Dataset d = load_dataset(pred_data);
    emit(pred_out, write_predictions(predict_dataset(m, d, threads)));
  } else if (*eval) {
    const ScoreConfig cfg = score_config(eval_sigma);
    const Model m = load_model(eval_ckpt);
    const Dataset d = load_dataset(eval_data);
    emit(eval_out, format_report(evaluate(m, d, cfg, threads), eval_format));
  } else if (*grid) {
    const TrainConfig cfg = build_train_config(grid_flags, threads);
    const Dataset train_set = load_dataset(grid_flags.data);
    const Dataset val_set = grid_flags.val.empty() ? Dataset{} : load_dataset(grid_flags.val);
    const GridResult g = grid_search(train_set, val_set, cfg);
    for (const auto& c : g.cells) {
      std::fprintf(stderr, "lr %-8g dropout %-5g selection %.6g\n", c.learning_rate, c.dropout_p, c.selection);
    }
    std::fprintf(stderr, "best: lr %g dropout %g\n", g.best_config.learning_rate, g.best_config.dropout_p);
    write_training_outputs(grid_flags.out_ckpt, g.best);
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  try {
    return run(argc, argv);
  } catch (const tlb::IoError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
