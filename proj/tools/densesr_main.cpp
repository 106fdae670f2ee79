// Command-line front end. Links the C API only; all engine work happens
// behind densesr/densesr.h.

#include <cinttypes>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "densesr/densesr.h"

namespace {

namespace fs = std::filesystem;

int exit_code_for(dsr_status s) {
  switch (s) {
    case DSR_OK:
      return 0;
    case DSR_ERR_CONFIG:
    case DSR_ERR_CONTRACT:
    case DSR_ERR_SHAPE:
      return 2;  // configuration / usage
    case DSR_ERR_IO:
    case DSR_ERR_PGM_HEADER:
    case DSR_ERR_PGM_SIZE:
    case DSR_ERR_PGM_MAXVAL:
      return 3;  // input/output
    case DSR_ERR_VERIFY:
      return 4;  // verification
    case DSR_ERR_CKPT_MAGIC:
    case DSR_ERR_CKPT_VERSION:
    case DSR_ERR_CKPT_TRUNCATED:
    case DSR_ERR_CKPT_SHAPE:
    case DSR_ERR_MODEL:
      return 5;  // model / checkpoint
    default:
      return 10;
  }
}

int fail(dsr_status s) {
  std::cerr << "error (" << dsr_status_name(s) << "): " << dsr_last_error() << "\n";
  return exit_code_for(s);
}

void print_resolved_config(const CLI::App& cmd) {
  std::cout << "densesr " << dsr_version() << "\n";
  std::cout << "command: " << cmd.get_name() << "\n";
  std::string cfg = cmd.config_to_str(true, false);
  std::cout << cfg;
  if (!cfg.empty() && cfg.back() != '\n') std::cout << "\n";
}

void diag_to_stderr(void*, const char* item, const char* message) {
  std::cerr << "warning: " << item << ": " << message << "\n";
}

struct PrepareArgs {
  std::string hr_dir, out_dir;
  uint32_t scale = 2;
  uint32_t patch = 64;
};

struct TrainArgs {
  std::string cache_dir, out_dir;
  std::string preset = "small";
  uint32_t scale = 2;
  uint32_t blocks = 0, m = 0, k = 0, feat0 = 0, feat1 = 0;  // 0 = preset value
  uint32_t epochs = 300;
  uint32_t batch = 128;
  double lr = 0.001;
  std::vector<uint32_t> lr_drops = {50, 200};
  double lr_gamma = 10.0;
  double beta1 = 0.9, beta2 = 0.999, epsilon = 1e-4;
  double val_fraction = 0.0;
  uint32_t checkpoint_every = 0;
  bool augment = true;
  bool deterministic = false;
  uint32_t threads = 1;
  uint64_t seed = 0;
};

struct SrArgs {
  std::string model, input, output;
};

struct EvalArgs {
  std::string hr_dir, method, model, out_prefix;
  uint32_t scale = 2;
  uint32_t eval_patch = 0;
  uint32_t threads = 1;
};

struct ReportArgs {
  std::vector<std::string> inputs;
  std::string out_csv;
};

int run_prepare(const PrepareArgs& a) {
  uint64_t pairs = 0;
  dsr_status s = dsr_prepare_dataset(a.hr_dir.c_str(), a.out_dir.c_str(), a.scale, a.patch,
                                     diag_to_stderr, nullptr, &pairs);
  if (s != DSR_OK) return fail(s);
  char frac[64];
  std::snprintf(frac, sizeof(frac), "%g", dsr_retained_fraction(static_cast<int>(a.scale)) * 100.0);
  std::cout << "pairs: " << pairs << "\n";
  std::cout << frac << "% of HR pixels retained\n";
  return 0;
}

bool resolve_model_config(const TrainArgs& a, dsr_model_config& cfg) {
  if (a.preset == "paper") {
    dsr_model_config_paper(a.scale, &cfg);
  } else if (a.preset == "small") {
    dsr_model_config_small(a.scale, &cfg);
  } else {
    std::cerr << "error (config_error): unknown preset '" << a.preset << "'\n";
    return false;
  }
  if (a.blocks) cfg.num_blocks = a.blocks;
  if (a.m) cfg.layers_per_block = a.m;
  if (a.k) cfg.growth = a.k;
  if (a.feat0) cfg.feat0 = a.feat0;
  if (a.feat1) cfg.feat1 = a.feat1;
  if (a.m || a.k) cfg.feat1 = a.feat1 ? cfg.feat1 : cfg.layers_per_block * cfg.growth;
  return true;
}

std::string model_config_line(const dsr_model_config& cfg) {
  char buf[160];
  std::snprintf(buf, sizeof(buf), "model: scale=%u blocks=%u m=%u k=%u feat0=%u feat1=%u",
                cfg.scale, cfg.num_blocks, cfg.layers_per_block, cfg.growth, cfg.feat0, cfg.feat1);
  return buf;
}

int run_train(const TrainArgs& a, const CLI::App& cmd) {
  dsr_model_config model{};
  if (!resolve_model_config(a, model)) return 2;
  std::cout << model_config_line(model) << "\n";

  fs::create_directories(a.out_dir);
  {
    std::ofstream resolved(fs::path(a.out_dir) / "resolved_config.txt");
    resolved << "densesr " << dsr_version() << "\n";
    resolved << "command: train\n";
    resolved << model_config_line(model) << "\n";
    resolved << cmd.config_to_str(true, false);
  }

  dsr_train_config tc{};
  tc.cache_dir = a.cache_dir.c_str();
  tc.out_dir = a.out_dir.c_str();
  tc.model = model;
  tc.seed = a.seed;
  tc.epochs = a.epochs;
  tc.batch_size = a.batch;
  tc.lr = a.lr;
  tc.lr_drop_epochs = a.lr_drops.data();
  tc.num_lr_drops = a.lr_drops.size();
  tc.lr_gamma = a.lr_gamma;
  tc.adam_beta1 = a.beta1;
  tc.adam_beta2 = a.beta2;
  tc.adam_epsilon = a.epsilon;
  tc.val_fraction = a.val_fraction;
  tc.checkpoint_every = a.checkpoint_every;
  tc.augment = a.augment ? 1 : 0;
  tc.deterministic = a.deterministic ? 1 : 0;
  tc.threads = a.threads;

  auto on_epoch = [](void*, uint32_t epoch, double mean_loss, double val_loss, double lr) {
    char line[160];
    if (val_loss == val_loss) {
      std::snprintf(line, sizeof(line), "epoch %u lr %.6g loss %.6g val %.6g", epoch, lr, mean_loss, val_loss);
    } else {
      std::snprintf(line, sizeof(line), "epoch %u lr %.6g loss %.6g", epoch, lr, mean_loss);
    }
    std::cout << line << std::endl;
  };

  double final_loss = 0.0;
  dsr_status s = dsr_train(&tc, on_epoch, nullptr, &final_loss);
  if (s != DSR_OK) return fail(s);
  std::cout << "final mean loss: " << final_loss << "\n";
  std::cout << "checkpoint: " << (fs::path(a.out_dir) / "model.dsr").string() << "\n";
  return 0;
}

int run_sr(const SrArgs& a) {
  dsr_model* model = nullptr;
  dsr_status s = dsr_model_load(a.model.c_str(), &model);
  if (s != DSR_OK) return fail(s);
  dsr_image* input = nullptr;
  s = dsr_image_load_pgm(a.input.c_str(), &input);
  if (s != DSR_OK) {
    dsr_model_destroy(model);
    return fail(s);
  }
  dsr_image* output = nullptr;
  s = dsr_model_forward(model, input, &output);
  if (s == DSR_OK) s = dsr_image_save_pgm(output, a.output.c_str());
  int rc = s == DSR_OK ? 0 : fail(s);
  if (s == DSR_OK) {
    std::cout << "wrote " << a.output << " (" << dsr_image_width(output) << "x"
              << dsr_image_height(output) << ", x" << dsr_model_scale(model) << ")\n";
  }
  dsr_image_destroy(output);
  dsr_image_destroy(input);
  dsr_model_destroy(model);
  return rc;
}

int run_eval(const EvalArgs& a) {
  static const std::map<std::string, dsr_resample_kind> kBaselines = {
      {"nearest", DSR_RESAMPLE_NEAREST},
      {"bilinear", DSR_RESAMPLE_BILINEAR},
      {"bicubic", DSR_RESAMPLE_BICUBIC},
  };
  dsr_eval_config ec{};
  ec.hr_dir = a.hr_dir.c_str();
  ec.scale = a.scale;
  ec.eval_patch = a.eval_patch;
  ec.threads = a.threads;
  if (a.method == "model") {
    if (a.model.empty()) {
      std::cerr << "error (config_error): --method model requires --model\n";
      return 2;
    }
    ec.model_path = a.model.c_str();
  } else {
    auto it = kBaselines.find(a.method);
    if (it == kBaselines.end()) {
      std::cerr << "error (config_error): unknown method '" << a.method << "'\n";
      return 2;
    }
    ec.baseline = it->second;
  }
  const std::string rows_csv = a.out_prefix + ".rows.csv";
  const std::string agg_csv = a.out_prefix + ".agg.csv";
  ec.rows_csv = rows_csv.c_str();
  ec.agg_csv = agg_csv.c_str();

  uint64_t rows = 0;
  dsr_status s = dsr_evaluate(&ec, diag_to_stderr, nullptr, &rows);
  if (s != DSR_OK) return fail(s);
  std::cout << "rows: " << rows << " -> " << rows_csv << "\n";
  std::ifstream agg(agg_csv);
  std::cout << agg.rdbuf();
  return 0;
}

int run_report(const ReportArgs& a) {
  std::vector<const char*> paths;
  paths.reserve(a.inputs.size());
  for (const auto& p : a.inputs) paths.push_back(p.c_str());
  dsr_status s = dsr_report(paths.data(), paths.size(), a.out_csv.c_str());
  if (s != DSR_OK) return fail(s);
  std::ifstream delta(a.out_csv);
  std::cout << delta.rdbuf();
  return 0;
}

int run_gradcheck() {
  auto on_op = [](void*, const char* op, double max_rel_err, int pass) {
    char line[128];
    std::snprintf(line, sizeof(line), "%-14s max_rel_err %.3e  %s", op, max_rel_err,
                  pass ? "pass" : "FAIL");
    std::cout << line << "\n";
  };
  dsr_status s = dsr_gradcheck(on_op, nullptr);
  if (s != DSR_OK) return fail(s);
  std::cout << "all gradient checks passed\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"densesr: grayscale single-image super-resolution"};
  app.set_version_flag("--version", dsr_version());
  app.set_config("--config", "", "Plain-text key=value configuration file; flags override it");
  app.allow_config_extras(false);
  app.require_subcommand(1);

  PrepareArgs prepare;
  auto* cmd_prepare = app.add_subcommand("prepare", "Partition HR images into patch pairs");
  cmd_prepare->add_option("--hr-dir", prepare.hr_dir, "Directory of HR .pgm images")->required();
  cmd_prepare->add_option("--out", prepare.out_dir, "Cache output directory")->required();
  cmd_prepare->add_option("--scale", prepare.scale, "Downsampling factor");
  cmd_prepare->add_option("--patch", prepare.patch, "HR patch side");

  TrainArgs train;
  auto* cmd_train = app.add_subcommand("train", "Train a model on a prepared cache");
  cmd_train->add_option("--cache", train.cache_dir, "Dataset cache directory")->required();
  cmd_train->add_option("--out", train.out_dir, "Checkpoint/log output directory")->required();
  cmd_train->add_option("--preset", train.preset, "Model preset: small | paper");
  cmd_train->add_option("--scale", train.scale, "Upscale factor");
  cmd_train->add_option("--blocks", train.blocks, "Override: dense block count");
  cmd_train->add_option("--m", train.m, "Override: conv layers per block");
  cmd_train->add_option("--k", train.k, "Override: growth rate");
  cmd_train->add_option("--feat0", train.feat0, "Override: first feature width");
  cmd_train->add_option("--feat1", train.feat1, "Override: second feature width");
  cmd_train->add_option("--epochs", train.epochs, "Training epochs");
  cmd_train->add_option("--batch", train.batch, "Mini-batch size");
  cmd_train->add_option("--lr", train.lr, "Initial learning rate");
  cmd_train->add_option("--lr-drops", train.lr_drops, "Epochs at which lr is divided by gamma")
      ->expected(0, 16);
  cmd_train->add_option("--lr-gamma", train.lr_gamma, "Learning-rate divisor");
  cmd_train->add_option("--beta1", train.beta1, "Adam beta1");
  cmd_train->add_option("--beta2", train.beta2, "Adam beta2");
  cmd_train->add_option("--eps", train.epsilon, "Adam epsilon");
  cmd_train->add_option("--val-fraction", train.val_fraction, "Fraction of pairs held out");
  cmd_train->add_option("--checkpoint-every", train.checkpoint_every, "Epochs between checkpoints");
  cmd_train->add_flag("--augment,!--no-augment", train.augment, "Random horizontal/vertical flips");
  cmd_train->add_flag("--deterministic", train.deterministic, "Single-threaded, bitwise reproducible");
  cmd_train->add_option("--threads", train.threads, "Worker threads per batch");
  cmd_train->add_option("--seed", train.seed, "RNG seed");

  SrArgs sr;
  auto* cmd_sr = app.add_subcommand("sr", "Super-resolve one image");
  cmd_sr->add_option("--model", sr.model, "Checkpoint path")->required();
  cmd_sr->add_option("--input", sr.input, "LR input .pgm")->required();
  cmd_sr->add_option("--output", sr.output, "SR output .pgm")->required();

  EvalArgs eval;
  auto* cmd_eval = app.add_subcommand("eval", "Score a method against HR originals");
  cmd_eval->add_option("--hr-dir", eval.hr_dir, "Directory of HR .pgm images")->required();
  cmd_eval->add_option("--method", eval.method, "nearest | bilinear | bicubic | model")->required();
  cmd_eval->add_option("--model", eval.model, "Checkpoint path (with --method model)");
  cmd_eval->add_option("--scale", eval.scale, "Scale factor");
  cmd_eval->add_option("--eval-patch", eval.eval_patch, "Evaluate on tiles of this side (0 = whole images)");
  cmd_eval->add_option("--threads", eval.threads, "Parallel image workers");
  cmd_eval->add_option("--out", eval.out_prefix, "Output prefix for .rows.csv / .agg.csv")->required();

  ReportArgs report;
  auto* cmd_report = app.add_subcommand("report", "Cross-method delta table from aggregate CSVs");
  cmd_report->add_option("--inputs", report.inputs, "Aggregate CSV files")->required()->expected(1, 64);
  cmd_report->add_option("--out", report.out_csv, "Delta table CSV path")->required();

  auto* cmd_gradcheck = app.add_subcommand("gradcheck", "Finite-difference verification of every op");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e);  // --help / --version
    app.exit(e);
    return 2;
  }

  if (cmd_prepare->parsed()) {
    print_resolved_config(*cmd_prepare);
    return run_prepare(prepare);
  }
  if (cmd_train->parsed()) {
    print_resolved_config(*cmd_train);
    return run_train(train, *cmd_train);
  }
  if (cmd_sr->parsed()) {
    print_resolved_config(*cmd_sr);
    return run_sr(sr);
  }
  if (cmd_eval->parsed()) {
    print_resolved_config(*cmd_eval);
    return run_eval(eval);
  }
  if (cmd_report->parsed()) {
    print_resolved_config(*cmd_report);
    return run_report(report);
  }
  if (cmd_gradcheck->parsed()) {
    print_resolved_config(*cmd_gradcheck);
    return run_gradcheck();
  }
  return 2;
}
