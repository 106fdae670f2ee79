#include "core/trainer.hpp"

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <thread>

#include "core/checkpoint.hpp"

namespace densesr {

namespace fs = std::filesystem;

namespace {

TensorPtr<float> slice_sample(const TensorPtr<float>& batch, int64_t index) {
  const int64_t h = batch->shape[2], w = batch->shape[3];
  auto out = tensor_create<float>({1, h, w});
  const float* src = batch->data.data() + index * h * w;
  std::copy(src, src + h * w, out->data.data());
  return out;
}

// Forward + L1 + backward for samples [begin,end); gradients land in the
// given network's parameters, losses are summed into loss_sum.
void run_chunk(const Network<float>& net, const Batch& batch, int64_t begin, int64_t end,
               float grad_seed, double& loss_sum) {
  double acc = 0.0;
  for (int64_t b = begin; b < end; ++b) {
    Tape<float> tape;
    auto lr_in = slice_sample(batch.lr, b);
    auto target = slice_sample(batch.hr, b);
    auto pred = net.forward(&tape, lr_in);
    auto loss = l1_loss(&tape, pred, target);
    acc += loss->data[0];
    tape.backward(loss, grad_seed);
  }
  loss_sum = acc;
}

}  // namespace

TrainResult train(Network<float>& net, const std::vector<PatchPair>& pairs, const TrainConfig& cfg,
                  const EpochCallback& on_epoch, Adam<float>* optimizer) {
  if (pairs.empty()) throw ConfigError("train: dataset is empty");
  if (cfg.epochs < 1) throw ConfigError("train: epochs must be >= 1");
  cfg.adam.validate();

  // Validation split: deterministic over pair indices, taken before any
  // epoch shuffling so it never changes across the run.
  std::vector<PatchPair> train_pairs;
  std::vector<PatchPair> val_pairs;
  if (cfg.val_fraction > 0.0) {
    std::vector<size_t> idx(pairs.size());
    for (size_t i = 0; i < idx.size(); ++i) idx[i] = i;
    std::mt19937 rng(static_cast<uint32_t>(mix_seed(cfg.seed, 0x5eed)));
    deterministic_shuffle(idx, rng);
    const size_t nval = std::min(pairs.size() - 1, static_cast<size_t>(std::ceil(cfg.val_fraction * pairs.size())));
    for (size_t i = 0; i < idx.size(); ++i) {
      (i < nval ? val_pairs : train_pairs).push_back(pairs[idx[i]]);
    }
  } else {
    train_pairs = pairs;
  }
  if (train_pairs.empty()) throw ConfigError("train: validation split leaves no training pairs");

  const int64_t threads = cfg.deterministic ? 1 : std::max<int64_t>(1, cfg.threads);

  net.set_requires_grad(true);
  Adam<float> local_optimizer(cfg.adam);
  Adam<float>& adam = optimizer ? *optimizer : local_optimizer;
  auto params = net.params();

  std::ofstream log;
  if (!cfg.log_csv.empty()) {
    const bool fresh = !fs::exists(cfg.log_csv);
    log.open(cfg.log_csv, std::ios::app);
    if (!log) throw IoError("train: cannot open log: " + cfg.log_csv);
    if (fresh) log << "epoch,iteration,lr,loss\n";
  }
  std::ofstream val_log;
  if (!cfg.log_csv.empty() && !val_pairs.empty()) {
    const std::string path = cfg.log_csv + ".val";
    const bool fresh = !fs::exists(path);
    val_log.open(path, std::ios::app);
    if (fresh) val_log << "epoch,val_loss\n";
  }

  TrainResult result;
  int64_t iteration = 0;
  for (int64_t epoch = 0; epoch < cfg.epochs; ++epoch) {
    const double lr = lr_at(cfg.schedule, epoch);
    Batcher batcher(train_pairs, cfg.batch_size, cfg.seed, epoch, cfg.augment);
    Batch batch;
    double epoch_loss = 0.0;
    int64_t epoch_batches = 0;
    while (batcher.next(batch)) {
      net.zero_grad();
      const float grad_seed = 1.0f / static_cast<float>(batch.size);
      double batch_loss = 0.0;

      if (threads == 1 || batch.size == 1) {
        run_chunk(net, batch, 0, batch.size, grad_seed, batch_loss);
      } else {
        const int64_t nthreads = std::min<int64_t>(threads, batch.size);
        std::vector<Network<float>> replicas;
        replicas.reserve(static_cast<size_t>(nthreads));
        for (int64_t t = 0; t < nthreads; ++t) replicas.push_back(net.clone());
        std::vector<double> partial(static_cast<size_t>(nthreads), 0.0);
        std::vector<std::thread> pool;
        const int64_t chunk = (batch.size + nthreads - 1) / nthreads;
        for (int64_t t = 0; t < nthreads; ++t) {
          const int64_t begin = t * chunk;
          const int64_t end = std::min(batch.size, begin + chunk);
          if (begin >= end) break;
          pool.emplace_back([&, t, begin, end] {
            run_chunk(replicas[static_cast<size_t>(t)], batch, begin, end, grad_seed,
                      partial[static_cast<size_t>(t)]);
          });
        }
        for (auto& th : pool) th.join();
        // Merge replica gradients in thread order so a fixed thread count
        // reproduces bitwise.
        for (int64_t t = 0; t < nthreads; ++t) {
          auto rep_params = replicas[static_cast<size_t>(t)].params();
          for (size_t p = 0; p < params.size(); ++p) {
            if (rep_params[p]->grad.empty()) continue;
            float* dst = params[p]->grad_data();
            const float* src = rep_params[p]->grad.data();
            for (size_t i = 0; i < rep_params[p]->grad.size(); ++i) dst[i] += src[i];
          }
          batch_loss += partial[static_cast<size_t>(t)];
        }
      }

      batch_loss /= static_cast<double>(batch.size);
      adam.step(params, lr);
      ++iteration;
      epoch_loss += batch_loss;
      ++epoch_batches;
      result.iteration_losses.push_back(batch_loss);
      if (log) {
        char row[128];
        std::snprintf(row, sizeof(row), "%lld,%lld,%.10g,%.10g\n", static_cast<long long>(epoch),
                      static_cast<long long>(iteration), lr, batch_loss);
        log << row;
      }
    }

    EpochStats stats;
    stats.epoch = epoch;
    stats.mean_loss = epoch_loss / static_cast<double>(epoch_batches);
    stats.lr = lr;
    if (!val_pairs.empty()) {
      stats.val_loss = evaluate_loss(net, val_pairs);
      if (val_log) val_log << epoch << "," << stats.val_loss << "\n";
    }
    result.epochs.push_back(stats);
    if (on_epoch) on_epoch(stats);

    if (!cfg.out_dir.empty() && cfg.checkpoint_every > 0 && (epoch + 1) % cfg.checkpoint_every == 0 &&
        epoch + 1 < cfg.epochs) {
      fs::create_directories(cfg.out_dir);
      save_checkpoint(net, (fs::path(cfg.out_dir) / ("checkpoint_epoch" + std::to_string(epoch + 1) + ".dsr")).string(),
                      epoch + 1, &adam);
    }
  }

  if (!cfg.out_dir.empty()) {
    fs::create_directories(cfg.out_dir);
    save_checkpoint(net, (fs::path(cfg.out_dir) / "model.dsr").string(), cfg.epochs, &adam);
  }

  result.steps = adam.step_count();
  result.final_mean_loss = result.epochs.empty() ? 0.0 : result.epochs.back().mean_loss;
  return result;
}

double evaluate_loss(const Network<float>& net, const std::vector<PatchPair>& pairs) {
  if (pairs.empty()) throw ConfigError("evaluate_loss: dataset is empty");
  double acc = 0.0;
  for (const auto& pair : pairs) {
    auto lr_in = tensor_create<float>({1, pair.lr.height, pair.lr.width});
    for (size_t i = 0; i < pair.lr.pixels.size(); ++i) lr_in->data[i] = static_cast<float>(pair.lr.pixels[i]);
    auto target = tensor_create<float>({1, pair.hr.height, pair.hr.width});
    for (size_t i = 0; i < pair.hr.pixels.size(); ++i) target->data[i] = static_cast<float>(pair.hr.pixels[i]);
    auto pred = net.forward(nullptr, lr_in);
    auto loss = l1_loss<float>(nullptr, pred, target);
    acc += loss->data[0];
  }
  return acc / static_cast<double>(pairs.size());
}

}  // namespace densesr
