#include "core/evaluate.hpp"

#include <algorithm>
#include <filesystem>
#include <thread>

#include "core/dataset.hpp"

namespace densesr {

namespace fs = std::filesystem;

GrayImage degrade(const GrayImage& hr, int64_t scale) {
  if (scale == 1) return hr;
  return resample(hr, hr.width / scale, hr.height / scale, ResampleMethod::bicubic());
}

GrayImage upscale(const GrayImage& lr, int64_t out_w, int64_t out_h, const EvalConfig& cfg) {
  if (cfg.model != nullptr) {
    auto in = tensor_create<float>({1, lr.height, lr.width});
    for (size_t i = 0; i < lr.pixels.size(); ++i) in->data[i] = static_cast<float>(lr.pixels[i]);
    auto out = cfg.model->forward(nullptr, in);
    GrayImage sr(out->shape[2], out->shape[1], 0.0, lr.bit_depth);
    for (size_t i = 0; i < sr.pixels.size(); ++i) sr.pixels[i] = static_cast<double>(out->data[i]);
    return sr;
  }
  ResampleMethod method{*cfg.baseline, -0.5, true};
  return resample(lr, out_w, out_h, method);
}

namespace {

std::string default_method_name(const EvalConfig& cfg) {
  if (!cfg.method_name.empty()) return cfg.method_name;
  if (cfg.model != nullptr) return "model";
  return resample_kind_name(*cfg.baseline);
}

struct Item {
  std::string id;
  GrayImage hr;
};

EvalRow score_one(const Item& item, const EvalConfig& cfg, const std::string& method) {
  const GrayImage lr = degrade(item.hr, cfg.scale);
  const GrayImage sr = upscale(lr, item.hr.width, item.hr.height, cfg);
  EvalRow row;
  row.image_id = item.id;
  row.method = method;
  row.scale = cfg.scale;
  row.psnr_db = psnr(item.hr, sr);
  row.ssim = ssim(item.hr, sr);
  return row;
}

}  // namespace

std::vector<EvalRow> evaluate_corpus(const std::string& hr_dir, const EvalConfig& cfg,
                                     const EvalDiagnostic& diag) {
  if (cfg.model == nullptr && !cfg.baseline.has_value()) {
    throw ConfigError("eval: either a model or a baseline must be given");
  }
  if (cfg.model != nullptr && cfg.model->config().scale != cfg.scale) {
    throw ModelError("eval: model scale " + std::to_string(cfg.model->config().scale) +
                     " does not match requested scale " + std::to_string(cfg.scale));
  }
  if (cfg.scale < 1) throw ConfigError("eval: scale must be >= 1");

  const std::string method = default_method_name(cfg);
  const auto files = list_pgm_files(hr_dir);
  if (files.empty()) throw ConfigError("eval: no .pgm files in " + hr_dir);

  // Load first (sequential, cheap); evaluation below may fan out.
  std::vector<Item> items;
  for (const auto& path : files) {
    try {
      GrayImage hr = read_pgm(path);
      // Crop right/bottom so dims divide the scale; LR then maps back exactly.
      const int64_t w = hr.width - hr.width % cfg.scale;
      const int64_t h = hr.height - hr.height % cfg.scale;
      if (w < cfg.scale || h < cfg.scale) throw ConfigError("image smaller than scale factor");
      if (w != hr.width || h != hr.height) {
        GrayImage cropped(w, h, 0.0, hr.bit_depth);
        for (int64_t r = 0; r < h; ++r) {
          std::copy(hr.pixels.begin() + r * hr.width, hr.pixels.begin() + r * hr.width + w,
                    cropped.pixels.begin() + r * w);
        }
        hr = std::move(cropped);
      }
      const std::string id = fs::path(path).stem().string();
      if (cfg.eval_patch > 0) {
        auto patches = extract_patches(hr, cfg.eval_patch);
        for (auto& p : patches) {
          items.push_back(Item{id + "_r" + std::to_string(p.grid_row) + "_c" + std::to_string(p.grid_col),
                               std::move(p.image)});
        }
      } else {
        items.push_back(Item{id, std::move(hr)});
      }
    } catch (const Error& e) {
      if (diag) diag(path, e.what());
    }
  }

  std::vector<EvalRow> rows(items.size());
  std::vector<char> ok(items.size(), 0);
  std::vector<std::string> errors(items.size());
  const int64_t threads = std::clamp<int64_t>(cfg.threads, 1, static_cast<int64_t>(items.size()) > 0 ? static_cast<int64_t>(items.size()) : 1);
  auto worker = [&](int64_t t) {
    for (size_t i = static_cast<size_t>(t); i < items.size(); i += static_cast<size_t>(threads)) {
      try {
        rows[i] = score_one(items[i], cfg, method);
        ok[i] = 1;
      } catch (const Error& e) {
        errors[i] = e.what();
      }
    }
  };
  if (threads == 1) {
    worker(0);
  } else {
    std::vector<std::thread> pool;
    for (int64_t t = 0; t < threads; ++t) pool.emplace_back(worker, t);
    for (auto& th : pool) th.join();
  }

  std::vector<EvalRow> out;
  for (size_t i = 0; i < items.size(); ++i) {
    if (ok[i]) {
      out.push_back(std::move(rows[i]));
    } else if (diag) {
      diag(items[i].id, errors[i]);
    }
  }
  return out;
}

}  // namespace densesr
