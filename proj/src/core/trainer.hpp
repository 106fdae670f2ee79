#pragma once

#include <cstdint>
#include <functional>
#include <limits>
#include <string>
#include <vector>

#include "core/dataset.hpp"
#include "core/network.hpp"
#include "core/optimizer.hpp"

namespace densesr {

struct TrainConfig {
  int64_t epochs = 300;
  int64_t batch_size = 128;
  AdamConfig adam;
  LrSchedule schedule;
  uint64_t seed = 0;
  bool augment = true;
  bool deterministic = false;  // forces single-threaded batch processing
  int64_t threads = 1;
  double val_fraction = 0.0;       // pairs held out of training
  int64_t checkpoint_every = 0;    // epochs between checkpoints; 0 = final only
  std::string out_dir;             // where checkpoints land; empty = none
  std::string log_csv;             // append-only: epoch,iteration,lr,loss
};

struct EpochStats {
  int64_t epoch = 0;
  double mean_loss = 0.0;
  double val_loss = std::numeric_limits<double>::quiet_NaN();
  double lr = 0.0;
};

struct TrainResult {
  std::vector<double> iteration_losses;
  std::vector<EpochStats> epochs;
  int64_t steps = 0;
  double final_mean_loss = 0.0;
};

using EpochCallback = std::function<void(const EpochStats&)>;

// Epoch-based loop: shuffled mini-batches, forward, L1 loss, backward, Adam.
// Per-batch gradients are the mean over the batch members.
TrainResult train(Network<float>& net, const std::vector<PatchPair>& pairs, const TrainConfig& cfg,
                  const EpochCallback& on_epoch = nullptr, Adam<float>* optimizer = nullptr);

// Mean L1 over all pairs at the current weights, no gradients.
double evaluate_loss(const Network<float>& net, const std::vector<PatchPair>& pairs);

}  // namespace densesr
