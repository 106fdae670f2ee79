#pragma once

#include <cstdint>
#include <functional>
#include <random>
#include <string>
#include <vector>

#include "core/image.hpp"
#include "core/resample.hpp"
#include "core/tensor.hpp"

namespace densesr {

// One HR patch plus where it came from. The LR side is derived from the HR
// side through the declared resampler, never stored independently, so the
// pair invariant lr == downsample(hr) holds exactly.
struct PatchPair {
  GrayImage lr;
  GrayImage hr;
  std::string image_id;
  int64_t grid_row = 0;
  int64_t grid_col = 0;
};

struct Patch {
  GrayImage image;
  int64_t grid_row = 0;
  int64_t grid_col = 0;
};

// Rigid non-overlapping grid, row-major; right/bottom remainders discarded.
std::vector<Patch> extract_patches(const GrayImage& img, int64_t patch);

std::vector<PatchPair> make_pairs(const std::vector<Patch>& patches, const std::string& image_id,
                                  int64_t scale, const ResampleMethod& method);

// Horizontal and/or vertical flip, each with probability 1/2, applied to LR
// and HR together.
PatchPair augment_pair(const PatchPair& pair, std::mt19937& rng);

// Batch tensors: lr [b,1,s,s], hr [b,1,patch,patch].
struct Batch {
  TensorPtr<float> lr;
  TensorPtr<float> hr;
  int64_t size = 0;
};

// Deterministic epoch-specific shuffle into batches; the final batch may be
// smaller. Augmentation (when enabled) draws from its own stream.
class Batcher {
 public:
  Batcher(const std::vector<PatchPair>& pairs, int64_t batch_size, uint64_t seed, int64_t epoch, bool augment);

  bool next(Batch& out);
  int64_t batch_count() const;
  const std::vector<size_t>& order() const { return order_; }

 private:
  const std::vector<PatchPair>& pairs_;
  int64_t batch_size_;
  bool augment_;
  std::vector<size_t> order_;
  size_t cursor_ = 0;
  std::mt19937 aug_rng_;
};

// On-disk cache: manifest + one PGM per HR patch. The manifest carries one
// line per pair (image id, row, col, scale, resampler tag).
struct DatasetCache {
  std::vector<PatchPair> pairs;
  int64_t scale = 0;
  int64_t patch = 0;
  std::string resampler_tag;
};

void write_cache(const std::string& dir, const std::vector<PatchPair>& pairs, int64_t scale,
                 int64_t patch, const ResampleMethod& method);
DatasetCache load_cache(const std::string& dir);

using PrepareDiagnostic = std::function<void(const std::string& path, const std::string& message)>;

// Reads every .pgm under hr_dir (sorted), extracts the patch grid, builds
// bicubic-downsampled pairs and writes the cache. Unreadable files are
// reported and skipped. Returns the pair count.
int64_t prepare_dataset(const std::string& hr_dir, const std::string& out_dir, int64_t scale,
                        int64_t patch, const PrepareDiagnostic& diag = nullptr);

}  // namespace densesr
