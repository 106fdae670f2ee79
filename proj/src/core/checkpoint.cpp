#include "core/checkpoint.hpp"

#include <bit>
#include <cstring>
#include <fstream>

namespace densesr {

namespace {

constexpr char kMagic[4] = {'D', 'S', 'R', 'C'};
constexpr uint32_t kVersion = 1;

void put_u32(std::ostream& os, uint32_t v) {
  unsigned char b[4] = {static_cast<unsigned char>(v), static_cast<unsigned char>(v >> 8),
                        static_cast<unsigned char>(v >> 16), static_cast<unsigned char>(v >> 24)};
  os.write(reinterpret_cast<const char*>(b), 4);
}

void put_u64(std::ostream& os, uint64_t v) {
  put_u32(os, static_cast<uint32_t>(v));
  put_u32(os, static_cast<uint32_t>(v >> 32));
}

void put_f32(std::ostream& os, float v) {
  uint32_t bits;
  std::memcpy(&bits, &v, 4);
  put_u32(os, bits);
}

uint32_t get_u32(std::istream& is) {
  unsigned char b[4];
  is.read(reinterpret_cast<char*>(b), 4);
  if (!is) throw CheckpointTruncatedError("checkpoint: unexpected end of file");
  return static_cast<uint32_t>(b[0]) | static_cast<uint32_t>(b[1]) << 8 |
         static_cast<uint32_t>(b[2]) << 16 | static_cast<uint32_t>(b[3]) << 24;
}

uint64_t get_u64(std::istream& is) {
  uint64_t lo = get_u32(is);
  uint64_t hi = get_u32(is);
  return lo | hi << 32;
}

void put_f32_array(std::ostream& os, const float* v, size_t n) {
  // Bulk path on little-endian hosts, element-wise otherwise.
  if constexpr (std::endian::native == std::endian::little) {
    os.write(reinterpret_cast<const char*>(v), static_cast<std::streamsize>(n * 4));
  } else {
    for (size_t i = 0; i < n; ++i) put_f32(os, v[i]);
  }
}

void get_f32_array(std::istream& is, float* v, size_t n) {
  if constexpr (std::endian::native == std::endian::little) {
    is.read(reinterpret_cast<char*>(v), static_cast<std::streamsize>(n * 4));
    if (!is) throw CheckpointTruncatedError("checkpoint: truncated tensor data");
  } else {
    for (size_t i = 0; i < n; ++i) {
      uint32_t bits = get_u32(is);
      std::memcpy(&v[i], &bits, 4);
    }
  }
}

}  // namespace

void save_checkpoint(const Network<float>& net, const std::string& path, int64_t epoch,
                     const Adam<float>* optimizer) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw IoError("checkpoint: cannot open for writing: " + path);
  os.write(kMagic, 4);
  put_u32(os, kVersion);
  const auto& cfg = net.config();
  put_u32(os, static_cast<uint32_t>(cfg.scale));
  put_u32(os, static_cast<uint32_t>(cfg.num_blocks));
  put_u32(os, static_cast<uint32_t>(cfg.m));
  put_u32(os, static_cast<uint32_t>(cfg.k));
  put_u32(os, static_cast<uint32_t>(cfg.feat0));
  put_u32(os, static_cast<uint32_t>(cfg.feat1));
  put_u32(os, static_cast<uint32_t>(epoch));
  const bool with_opt = optimizer != nullptr && optimizer->step_count() > 0;
  os.put(with_opt ? 1 : 0);

  auto named = net.named_params();
  put_u32(os, static_cast<uint32_t>(named.size()));
  for (const auto& [name, p] : named) {
    put_u32(os, static_cast<uint32_t>(name.size()));
    os.write(name.data(), static_cast<std::streamsize>(name.size()));
    put_u32(os, static_cast<uint32_t>(p->shape.size()));
    for (int64_t d : p->shape) put_u32(os, static_cast<uint32_t>(d));
    put_f32_array(os, p->data.data(), p->data.size());
  }

  if (with_opt) {
    put_u64(os, static_cast<uint64_t>(optimizer->step_count()));
    auto dump = [&os](const std::vector<std::vector<float>>& moments) {
      put_u32(os, static_cast<uint32_t>(moments.size()));
      for (const auto& m : moments) {
        put_u64(os, m.size());
        put_f32_array(os, m.data(), m.size());
      }
    };
    dump(optimizer->first_moments());
    dump(optimizer->second_moments());
  }
  os.flush();
  if (!os) throw IoError("checkpoint: write failed: " + path);
}

LoadedCheckpoint load_checkpoint(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw IoError("checkpoint: cannot open: " + path);
  char magic[4];
  is.read(magic, 4);
  if (!is || std::memcmp(magic, kMagic, 4) != 0) {
    throw CheckpointMagicError("checkpoint: bad magic in " + path);
  }
  const uint32_t version = get_u32(is);
  if (version != kVersion) {
    throw CheckpointVersionError("checkpoint: version " + std::to_string(version) +
                                 " unsupported (expected " + std::to_string(kVersion) + ")");
  }
  NetworkConfig cfg;
  cfg.scale = get_u32(is);
  cfg.num_blocks = get_u32(is);
  cfg.m = get_u32(is);
  cfg.k = get_u32(is);
  cfg.feat0 = get_u32(is);
  cfg.feat1 = get_u32(is);
  const int64_t epoch = get_u32(is);
  int has_opt = is.get();
  if (has_opt == std::char_traits<char>::eof()) {
    throw CheckpointTruncatedError("checkpoint: unexpected end of file");
  }

  try {
    cfg.validate();
  } catch (const ConfigError& e) {
    throw CheckpointShapeError(std::string("checkpoint: invalid config: ") + e.what());
  }
  Network<float> net(cfg);
  auto named = net.named_params();

  const uint32_t count = get_u32(is);
  if (count != named.size()) {
    throw CheckpointShapeError("checkpoint: " + std::to_string(count) + " tensors, config expects " +
                               std::to_string(named.size()));
  }
  for (auto& [expected_name, p] : named) {
    const uint32_t name_len = get_u32(is);
    if (name_len > 4096) throw CheckpointShapeError("checkpoint: implausible tensor name length");
    std::string name(name_len, '\0');
    is.read(name.data(), name_len);
    if (!is) throw CheckpointTruncatedError("checkpoint: truncated tensor name");
    if (name != expected_name) {
      throw CheckpointShapeError("checkpoint: tensor '" + name + "' where '" + expected_name + "' expected");
    }
    const uint32_t rank = get_u32(is);
    if (rank != p->shape.size()) {
      throw CheckpointShapeError("checkpoint: tensor '" + name + "' rank mismatch");
    }
    for (size_t d = 0; d < rank; ++d) {
      const uint32_t extent = get_u32(is);
      if (static_cast<int64_t>(extent) != p->shape[d]) {
        throw CheckpointShapeError("checkpoint: tensor '" + name + "' extent mismatch against config");
      }
    }
    get_f32_array(is, p->data.data(), p->data.size());
  }

  LoadedCheckpoint out{std::move(net), epoch, std::nullopt};
  if (has_opt == 1) {
    OptimizerState state;
    state.step_count = static_cast<int64_t>(get_u64(is));
    auto slurp = [&is, &named](std::vector<std::vector<float>>& moments) {
      const uint32_t n = get_u32(is);
      if (n != named.size()) throw CheckpointShapeError("checkpoint: optimizer moment count mismatch");
      moments.resize(n);
      for (uint32_t i = 0; i < n; ++i) {
        const uint64_t len = get_u64(is);
        if (len != named[i].second->data.size()) {
          throw CheckpointShapeError("checkpoint: optimizer moment size mismatch");
        }
        moments[i].resize(len);
        get_f32_array(is, moments[i].data(), len);
      }
    };
    slurp(state.first_moments);
    slurp(state.second_moments);
    out.optimizer = std::move(state);
  }
  return out;
}

}  // namespace densesr
