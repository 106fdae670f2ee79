#pragma once

#include <optional>
#include <string>

#include "core/network.hpp"
#include "core/optimizer.hpp"

namespace densesr {

// Optimizer state carried alongside the weights so training can resume
// bit-exactly.
struct OptimizerState {
  int64_t step_count = 0;
  std::vector<std::vector<float>> first_moments;
  std::vector<std::vector<float>> second_moments;
};

// Fixed little-endian layout:
//   magic "DSRC" | u32 version | u32 scale,num_blocks,m,k,feat0,feat1
//   | u32 epoch | u8 has_optimizer | u32 tensor_count
//   | per tensor: u32 name_len, name bytes, u32 rank, u32 extents[rank],
//     f32 values
//   | optional optimizer block: u64 step_count, then first/second moment
//     arrays in parameter order, each prefixed by u64 length.
void save_checkpoint(const Network<float>& net, const std::string& path,
                     int64_t epoch = 0, const Adam<float>* optimizer = nullptr);

struct LoadedCheckpoint {
  Network<float> net;
  int64_t epoch = 0;
  std::optional<OptimizerState> optimizer;
};

LoadedCheckpoint load_checkpoint(const std::string& path);

}  // namespace densesr
