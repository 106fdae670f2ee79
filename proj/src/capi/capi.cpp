#include "densesr/densesr.h"

#include <cmath>
#include <cstring>
#include <string>

#include "core/checkpoint.hpp"
#include "core/dataset.hpp"
#include "core/errors.hpp"
#include "core/evaluate.hpp"
#include "core/gradcheck.hpp"
#include "core/metrics.hpp"
#include "core/network.hpp"
#include "core/resample.hpp"
#include "core/trainer.hpp"
#include "core/version.hpp"

struct dsr_image {
  densesr::GrayImage img;
};

struct dsr_model {
  densesr::Network<float> net;
};

namespace {

thread_local std::string g_last_error;

template <typename F>
dsr_status wrap(F&& fn) noexcept {
  try {
    fn();
    g_last_error.clear();
    return DSR_OK;
  } catch (const densesr::PgmHeaderError& e) {
    g_last_error = e.what();
    return DSR_ERR_PGM_HEADER;
  } catch (const densesr::PgmSizeError& e) {
    g_last_error = e.what();
    return DSR_ERR_PGM_SIZE;
  } catch (const densesr::PgmMaxvalError& e) {
    g_last_error = e.what();
    return DSR_ERR_PGM_MAXVAL;
  } catch (const densesr::CheckpointMagicError& e) {
    g_last_error = e.what();
    return DSR_ERR_CKPT_MAGIC;
  } catch (const densesr::CheckpointVersionError& e) {
    g_last_error = e.what();
    return DSR_ERR_CKPT_VERSION;
  } catch (const densesr::CheckpointTruncatedError& e) {
    g_last_error = e.what();
    return DSR_ERR_CKPT_TRUNCATED;
  } catch (const densesr::CheckpointShapeError& e) {
    g_last_error = e.what();
    return DSR_ERR_CKPT_SHAPE;
  } catch (const densesr::ModelError& e) {
    g_last_error = e.what();
    return DSR_ERR_MODEL;
  } catch (const densesr::VerifyError& e) {
    g_last_error = e.what();
    return DSR_ERR_VERIFY;
  } catch (const densesr::ShapeError& e) {
    g_last_error = e.what();
    return DSR_ERR_SHAPE;
  } catch (const densesr::ConfigError& e) {
    g_last_error = e.what();
    return DSR_ERR_CONFIG;
  } catch (const densesr::ContractError& e) {
    g_last_error = e.what();
    return DSR_ERR_CONTRACT;
  } catch (const densesr::IoError& e) {
    g_last_error = e.what();
    return DSR_ERR_IO;
  } catch (const std::exception& e) {
    g_last_error = e.what();
    return DSR_ERR_INTERNAL;
  } catch (...) {
    g_last_error = "unknown error";
    return DSR_ERR_INTERNAL;
  }
}

dsr_status require(bool cond, const char* message) {
  if (cond) return DSR_OK;
  g_last_error = message;
  return DSR_ERR_CONTRACT;
}

densesr::NetworkConfig to_config(const dsr_model_config& c) {
  densesr::NetworkConfig cfg;
  cfg.scale = c.scale;
  cfg.num_blocks = c.num_blocks;
  cfg.m = c.layers_per_block;
  cfg.k = c.growth;
  cfg.feat0 = c.feat0;
  cfg.feat1 = c.feat1;
  return cfg;
}

densesr::ResampleKind to_kind(dsr_resample_kind kind) {
  switch (kind) {
    case DSR_RESAMPLE_NEAREST:
      return densesr::ResampleKind::kNearest;
    case DSR_RESAMPLE_BILINEAR:
      return densesr::ResampleKind::kBilinear;
    case DSR_RESAMPLE_BICUBIC:
      return densesr::ResampleKind::kBicubic;
  }
  throw densesr::ConfigError("unknown resample kind " + std::to_string(static_cast<int>(kind)));
}

}  // namespace

extern "C" {

const char* dsr_version(void) { return densesr::kVersion; }

const char* dsr_status_name(dsr_status status) {
  switch (status) {
    case DSR_OK: return "ok";
    case DSR_ERR_CONFIG: return "config_error";
    case DSR_ERR_SHAPE: return "shape_error";
    case DSR_ERR_CONTRACT: return "contract_error";
    case DSR_ERR_IO: return "io_error";
    case DSR_ERR_PGM_HEADER: return "pgm_header_error";
    case DSR_ERR_PGM_SIZE: return "pgm_size_error";
    case DSR_ERR_PGM_MAXVAL: return "pgm_maxval_error";
    case DSR_ERR_CKPT_MAGIC: return "checkpoint_magic_error";
    case DSR_ERR_CKPT_VERSION: return "checkpoint_version_error";
    case DSR_ERR_CKPT_TRUNCATED: return "checkpoint_truncated_error";
    case DSR_ERR_CKPT_SHAPE: return "checkpoint_shape_error";
    case DSR_ERR_MODEL: return "model_error";
    case DSR_ERR_VERIFY: return "verify_error";
    case DSR_ERR_INTERNAL: return "internal_error";
  }
  return "unknown";
}

const char* dsr_last_error(void) { return g_last_error.c_str(); }

dsr_status dsr_image_create(int64_t width, int64_t height, const double* pixels, int bit_depth,
                            dsr_image** out) {
  if (auto s = require(out && pixels, "dsr_image_create: null argument")) return s;
  return wrap([&] {
    if (width < 1 || height < 1) throw densesr::ConfigError("image dims must be >= 1");
    if (bit_depth != 8 && bit_depth != 16) throw densesr::ConfigError("bit depth must be 8 or 16");
    densesr::GrayImage img(width, height, 0.0, bit_depth);
    for (size_t i = 0; i < img.pixels.size(); ++i) {
      const double v = pixels[i];
      if (!(v >= 0.0 && v <= 1.0)) throw densesr::ConfigError("pixel values must lie in [0,1]");
      img.pixels[i] = v;
    }
    *out = new dsr_image{std::move(img)};
  });
}

dsr_status dsr_image_load_pgm(const char* path, dsr_image** out) {
  if (auto s = require(out && path, "dsr_image_load_pgm: null argument")) return s;
  return wrap([&] { *out = new dsr_image{densesr::read_pgm(path)}; });
}

dsr_status dsr_image_save_pgm(const dsr_image* img, const char* path) {
  if (auto s = require(img && path, "dsr_image_save_pgm: null argument")) return s;
  return wrap([&] { densesr::write_pgm(img->img, path); });
}

int64_t dsr_image_width(const dsr_image* img) { return img ? img->img.width : 0; }
int64_t dsr_image_height(const dsr_image* img) { return img ? img->img.height : 0; }
int dsr_image_bit_depth(const dsr_image* img) { return img ? img->img.bit_depth : 0; }
const double* dsr_image_pixels(const dsr_image* img) { return img ? img->img.pixels.data() : nullptr; }
void dsr_image_destroy(dsr_image* img) { delete img; }

dsr_status dsr_image_resample(const dsr_image* src, int64_t out_w, int64_t out_h,
                              dsr_resample_kind kind, int antialias, dsr_image** out) {
  if (auto s = require(src && out, "dsr_image_resample: null argument")) return s;
  return wrap([&] {
    densesr::ResampleMethod method{to_kind(kind), -0.5, antialias != 0};
    *out = new dsr_image{densesr::resample(src->img, out_w, out_h, method)};
  });
}

double dsr_retained_fraction(int scale) {
  return scale >= 1 ? densesr::retained_fraction(scale) : 0.0;
}

dsr_status dsr_psnr(const dsr_image* a, const dsr_image* b, double* out) {
  if (auto s = require(a && b && out, "dsr_psnr: null argument")) return s;
  return wrap([&] { *out = densesr::psnr(a->img, b->img); });
}

dsr_status dsr_ssim(const dsr_image* a, const dsr_image* b, double* out) {
  if (auto s = require(a && b && out, "dsr_ssim: null argument")) return s;
  return wrap([&] { *out = densesr::ssim(a->img, b->img); });
}

void dsr_model_config_paper(uint32_t scale, dsr_model_config* out) {
  if (!out) return;
  *out = dsr_model_config{scale, 12, 8, 16, 64, 128};
}

void dsr_model_config_small(uint32_t scale, dsr_model_config* out) {
  if (!out) return;
  *out = dsr_model_config{scale, 3, 4, 8, 16, 32};
}

dsr_status dsr_model_create(const dsr_model_config* config, uint64_t seed, dsr_model** out) {
  if (auto s = require(config && out, "dsr_model_create: null argument")) return s;
  return wrap([&] { *out = new dsr_model{densesr::build_network<float>(to_config(*config), seed)}; });
}

dsr_status dsr_model_load(const char* path, dsr_model** out) {
  if (auto s = require(path && out, "dsr_model_load: null argument")) return s;
  return wrap([&] { *out = new dsr_model{std::move(densesr::load_checkpoint(path).net)}; });
}

dsr_status dsr_model_save(const dsr_model* model, const char* path) {
  if (auto s = require(model && path, "dsr_model_save: null argument")) return s;
  return wrap([&] { densesr::save_checkpoint(model->net, path); });
}

uint32_t dsr_model_scale(const dsr_model* model) {
  return model ? static_cast<uint32_t>(model->net.config().scale) : 0;
}

uint64_t dsr_model_param_count(const dsr_model* model) {
  return model ? static_cast<uint64_t>(model->net.param_count()) : 0;
}

dsr_status dsr_model_forward(const dsr_model* model, const dsr_image* lr, dsr_image** sr) {
  if (auto s = require(model && lr && sr, "dsr_model_forward: null argument")) return s;
  return wrap([&] {
    const auto& img = lr->img;
    auto in = densesr::tensor_create<float>({1, img.height, img.width});
    for (size_t i = 0; i < img.pixels.size(); ++i) in->data[i] = static_cast<float>(img.pixels[i]);
    auto out = model->net.forward(nullptr, in);
    densesr::GrayImage result(out->shape[2], out->shape[1], 0.0, img.bit_depth);
    for (size_t i = 0; i < result.pixels.size(); ++i) result.pixels[i] = static_cast<double>(out->data[i]);
    *sr = new dsr_image{std::move(result)};
  });
}

void dsr_model_destroy(dsr_model* model) { delete model; }

dsr_status dsr_prepare_dataset(const char* hr_dir, const char* out_dir, uint32_t scale,
                               uint32_t patch, dsr_diag_cb diag, void* user, uint64_t* pair_count) {
  if (auto s = require(hr_dir && out_dir, "dsr_prepare_dataset: null argument")) return s;
  return wrap([&] {
    auto forward_diag = [diag, user](const std::string& item, const std::string& message) {
      if (diag) diag(user, item.c_str(), message.c_str());
    };
    const int64_t n = densesr::prepare_dataset(hr_dir, out_dir, scale, patch, forward_diag);
    if (pair_count) *pair_count = static_cast<uint64_t>(n);
  });
}

dsr_status dsr_train(const dsr_train_config* config, dsr_epoch_cb on_epoch, void* user,
                     double* final_mean_loss) {
  if (auto s = require(config && config->cache_dir, "dsr_train: null argument")) return s;
  return wrap([&] {
    const densesr::NetworkConfig net_cfg = to_config(config->model);
    net_cfg.validate();
    auto cache = densesr::load_cache(config->cache_dir);
    if (cache.scale != net_cfg.scale) {
      throw densesr::ConfigError("train: cache was prepared for scale " + std::to_string(cache.scale) +
                                 " but the model uses scale " + std::to_string(net_cfg.scale));
    }

    densesr::TrainConfig tc;
    tc.epochs = config->epochs;
    tc.batch_size = config->batch_size;
    tc.adam = densesr::AdamConfig{config->lr, config->adam_beta1, config->adam_beta2, config->adam_epsilon};
    tc.schedule.base_lr = config->lr;
    tc.schedule.gamma = config->lr_gamma;
    tc.schedule.drop_epochs.clear();
    for (size_t i = 0; i < config->num_lr_drops; ++i) {
      tc.schedule.drop_epochs.push_back(config->lr_drop_epochs[i]);
    }
    tc.seed = config->seed;
    tc.augment = config->augment != 0;
    tc.deterministic = config->deterministic != 0;
    tc.threads = config->threads == 0 ? 1 : config->threads;
    tc.val_fraction = config->val_fraction;
    tc.checkpoint_every = config->checkpoint_every;
    if (config->out_dir) {
      tc.out_dir = config->out_dir;
      tc.log_csv = std::string(config->out_dir) + "/log.csv";
    }

    auto net = densesr::build_network<float>(net_cfg, config->seed);
    auto cb = [on_epoch, user](const densesr::EpochStats& s) {
      if (on_epoch) on_epoch(user, static_cast<uint32_t>(s.epoch), s.mean_loss, s.val_loss, s.lr);
    };
    auto result = densesr::train(net, cache.pairs, tc, cb);
    if (final_mean_loss) *final_mean_loss = result.final_mean_loss;
  });
}

dsr_status dsr_evaluate(const dsr_eval_config* config, dsr_diag_cb diag, void* user,
                        uint64_t* rows_written) {
  if (auto s = require(config && config->hr_dir && config->rows_csv && config->agg_csv,
                       "dsr_evaluate: null argument")) {
    return s;
  }
  return wrap([&] {
    densesr::EvalConfig ec;
    ec.scale = config->scale;
    ec.eval_patch = config->eval_patch;
    ec.threads = config->threads == 0 ? 1 : config->threads;

    std::optional<densesr::LoadedCheckpoint> loaded;
    if (config->model_path) {
      loaded = densesr::load_checkpoint(config->model_path);
      ec.model = &loaded->net;
    } else {
      ec.baseline = to_kind(config->baseline);
    }
    auto forward_diag = [diag, user](const std::string& item, const std::string& message) {
      if (diag) diag(user, item.c_str(), message.c_str());
    };
    auto rows = densesr::evaluate_corpus(config->hr_dir, ec, forward_diag);
    if (rows.empty()) throw densesr::IoError("eval: every image failed");
    densesr::write_rows_csv(rows, config->rows_csv);
    densesr::write_aggregate_csv(densesr::aggregate(rows), config->agg_csv);
    if (rows_written) *rows_written = rows.size();
  });
}

dsr_status dsr_report(const char* const* agg_csv_paths, size_t num_paths, const char* delta_csv) {
  if (auto s = require(agg_csv_paths && delta_csv && num_paths > 0, "dsr_report: null argument")) return s;
  return wrap([&] {
    std::vector<densesr::MethodAggregate> aggs;
    for (size_t i = 0; i < num_paths; ++i) {
      auto file = densesr::read_aggregate_csv(agg_csv_paths[i]);
      aggs.insert(aggs.end(), file.begin(), file.end());
    }
    densesr::write_delta_csv(densesr::cross_deltas(aggs), delta_csv);
  });
}

dsr_status dsr_gradcheck(dsr_gradcheck_cb on_op, void* user) {
  return wrap([&] {
    auto results = densesr::run_gradient_checks();
    bool all_pass = true;
    for (const auto& r : results) {
      if (on_op) on_op(user, r.op.c_str(), r.max_rel_err, r.pass ? 1 : 0);
      all_pass = all_pass && r.pass;
    }
    if (!all_pass) throw densesr::VerifyError("gradient verification failed");
  });
}

}  // extern "C"
