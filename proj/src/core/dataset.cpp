#include "core/dataset.hpp"

#include <filesystem>
#include <fstream>
#include <sstream>

namespace densesr {

namespace fs = std::filesystem;

std::vector<Patch> extract_patches(const GrayImage& img, int64_t patch) {
  if (patch < 1) throw ConfigError("extract_patches: patch size must be >= 1");
  if (img.width < patch || img.height < patch) {
    throw ConfigError("extract_patches: image " + std::to_string(img.width) + "x" + std::to_string(img.height) +
                      " smaller than patch " + std::to_string(patch));
  }
  const int64_t rows = img.height / patch;
  const int64_t cols = img.width / patch;
  std::vector<Patch> out;
  out.reserve(static_cast<size_t>(rows * cols));
  for (int64_t r = 0; r < rows; ++r) {
    for (int64_t c = 0; c < cols; ++c) {
      Patch p;
      p.grid_row = r;
      p.grid_col = c;
      p.image = GrayImage(patch, patch, 0.0, img.bit_depth);
      for (int64_t i = 0; i < patch; ++i) {
        const double* src = img.pixels.data() + (r * patch + i) * img.width + c * patch;
        std::copy(src, src + patch, p.image.pixels.data() + i * patch);
      }
      out.push_back(std::move(p));
    }
  }
  return out;
}

std::vector<PatchPair> make_pairs(const std::vector<Patch>& patches, const std::string& image_id,
                                  int64_t scale, const ResampleMethod& method) {
  if (scale < 1) throw ConfigError("make_pairs: scale must be >= 1");
  std::vector<PatchPair> out;
  out.reserve(patches.size());
  for (const auto& p : patches) {
    if (p.image.width % scale != 0 || p.image.height % scale != 0) {
      throw ConfigError("make_pairs: patch side " + std::to_string(p.image.width) +
                        " not divisible by scale " + std::to_string(scale));
    }
    PatchPair pair;
    pair.hr = p.image;
    pair.lr = resample(p.image, p.image.width / scale, p.image.height / scale, method);
    pair.image_id = image_id;
    pair.grid_row = p.grid_row;
    pair.grid_col = p.grid_col;
    out.push_back(std::move(pair));
  }
  return out;
}

PatchPair augment_pair(const PatchPair& pair, std::mt19937& rng) {
  const bool fh = uniform_unit(rng) < 0.5;
  const bool fv = uniform_unit(rng) < 0.5;
  if (!fh && !fv) return pair;
  PatchPair out = pair;
  if (fh) {
    out.lr = flip_horizontal(out.lr);
    out.hr = flip_horizontal(out.hr);
  }
  if (fv) {
    out.lr = flip_vertical(out.lr);
    out.hr = flip_vertical(out.hr);
  }
  return out;
}

namespace {

void fill_plane(float* dst, const GrayImage& img) {
  for (size_t i = 0; i < img.pixels.size(); ++i) dst[i] = static_cast<float>(img.pixels[i]);
}

}  // namespace

Batcher::Batcher(const std::vector<PatchPair>& pairs, int64_t batch_size, uint64_t seed, int64_t epoch,
                 bool augment)
    : pairs_(pairs),
      batch_size_(batch_size),
      augment_(augment),
      aug_rng_(static_cast<uint32_t>(mix_seed(seed, 2 * static_cast<uint64_t>(epoch) + 1))) {
  if (pairs.empty()) throw ConfigError("batches: dataset is empty");
  if (batch_size < 1) throw ConfigError("batches: batch size must be >= 1");
  order_.resize(pairs.size());
  for (size_t i = 0; i < order_.size(); ++i) order_[i] = i;
  std::mt19937 shuffle_rng(static_cast<uint32_t>(mix_seed(seed, 2 * static_cast<uint64_t>(epoch))));
  deterministic_shuffle(order_, shuffle_rng);
}

int64_t Batcher::batch_count() const {
  const int64_t n = static_cast<int64_t>(pairs_.size());
  return (n + batch_size_ - 1) / batch_size_;
}

bool Batcher::next(Batch& out) {
  if (cursor_ >= order_.size()) return false;
  const size_t take = std::min(static_cast<size_t>(batch_size_), order_.size() - cursor_);
  const auto& first = pairs_[order_[cursor_]];
  const int64_t s = first.lr.width;
  const int64_t p = first.hr.width;
  out.size = static_cast<int64_t>(take);
  out.lr = tensor_create<float>({static_cast<int64_t>(take), 1, s, s});
  out.hr = tensor_create<float>({static_cast<int64_t>(take), 1, p, p});
  for (size_t b = 0; b < take; ++b) {
    const PatchPair& base = pairs_[order_[cursor_ + b]];
    if (augment_) {
      PatchPair aug = augment_pair(base, aug_rng_);
      fill_plane(out.lr->data.data() + b * s * s, aug.lr);
      fill_plane(out.hr->data.data() + b * p * p, aug.hr);
    } else {
      fill_plane(out.lr->data.data() + b * s * s, base.lr);
      fill_plane(out.hr->data.data() + b * p * p, base.hr);
    }
  }
  cursor_ += take;
  return true;
}

void write_cache(const std::string& dir, const std::vector<PatchPair>& pairs, int64_t scale,
                 int64_t patch, const ResampleMethod& method) {
  fs::create_directories(dir);
  std::ofstream manifest(fs::path(dir) / "manifest.txt");
  if (!manifest) throw IoError("cache: cannot write manifest in " + dir);
  manifest << "# densesr patch cache v1 patch=" << patch << " scale=" << scale
           << " resampler=" << resample_tag(method) << "\n";
  for (const auto& pair : pairs) {
    std::ostringstream name;
    name << pair.image_id << "_r" << pair.grid_row << "_c" << pair.grid_col << ".pgm";
    write_pgm(pair.hr, (fs::path(dir) / name.str()).string());
    manifest << pair.image_id << " " << pair.grid_row << " " << pair.grid_col << " " << scale << " "
             << resample_tag(method) << "\n";
  }
  if (!manifest) throw IoError("cache: manifest write failed in " + dir);
}

DatasetCache load_cache(const std::string& dir) {
  std::ifstream manifest(fs::path(dir) / "manifest.txt");
  if (!manifest) throw IoError("cache: no manifest.txt in " + dir);

  DatasetCache cache;
  std::string line;
  ResampleMethod method = ResampleMethod::bicubic();
  while (std::getline(manifest, line)) {
    if (line.empty()) continue;
    if (line[0] == '#') {
      std::istringstream hs(line);
      std::string tok;
      while (hs >> tok) {
        if (tok.starts_with("patch=")) cache.patch = std::stoll(tok.substr(6));
        if (tok.starts_with("scale=")) cache.scale = std::stoll(tok.substr(6));
        if (tok.starts_with("resampler=")) cache.resampler_tag = tok.substr(10);
      }
      continue;
    }
    std::istringstream ls(line);
    std::string image_id, tag;
    int64_t row, col, scale;
    if (!(ls >> image_id >> row >> col >> scale >> tag)) {
      throw IoError("cache: malformed manifest line: " + line);
    }
    if (cache.scale == 0) cache.scale = scale;
    if (scale != cache.scale) throw ConfigError("cache: mixed scales in manifest");
    if (cache.resampler_tag.empty()) cache.resampler_tag = tag;
    if (!tag.starts_with("bicubic")) {
      throw ConfigError("cache: unsupported resampler tag '" + tag + "'");
    }

    std::ostringstream name;
    name << image_id << "_r" << row << "_c" << col << ".pgm";
    PatchPair pair;
    pair.hr = read_pgm((fs::path(dir) / name.str()).string());
    pair.lr = resample(pair.hr, pair.hr.width / scale, pair.hr.height / scale, method);
    pair.image_id = image_id;
    pair.grid_row = row;
    pair.grid_col = col;
    if (cache.patch == 0) cache.patch = pair.hr.width;
    cache.pairs.push_back(std::move(pair));
  }
  if (cache.pairs.empty()) throw ConfigError("cache: manifest lists no pairs in " + dir);
  return cache;
}

int64_t prepare_dataset(const std::string& hr_dir, const std::string& out_dir, int64_t scale,
                        int64_t patch, const PrepareDiagnostic& diag) {
  if (patch % scale != 0) {
    throw ConfigError("prepare: patch " + std::to_string(patch) + " not divisible by scale " + std::to_string(scale));
  }
  const auto files = list_pgm_files(hr_dir);
  if (files.empty()) throw ConfigError("prepare: no .pgm files in " + hr_dir);

  const ResampleMethod method = ResampleMethod::bicubic();
  std::vector<PatchPair> pairs;
  for (const auto& path : files) {
    try {
      const GrayImage img = read_pgm(path);
      const std::string id = fs::path(path).stem().string();
      auto patches = extract_patches(img, patch);
      auto img_pairs = make_pairs(patches, id, scale, method);
      pairs.insert(pairs.end(), std::make_move_iterator(img_pairs.begin()),
                   std::make_move_iterator(img_pairs.end()));
    } catch (const Error& e) {
      if (diag) diag(path, e.what());
    }
  }
  if (pairs.empty()) throw ConfigError("prepare: no pairs produced from " + hr_dir);
  write_cache(out_dir, pairs, scale, patch, method);
  return static_cast<int64_t>(pairs.size());
}

}  // namespace densesr
