#include "core/image.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <filesystem>
#include <fstream>

namespace densesr {

namespace {

// Reads one whitespace-delimited header token, skipping '#' comments.
std::string next_token(std::istream& is) {
  std::string tok;
  int c;
  while ((c = is.get()) != EOF) {
    if (c == '#') {
      while ((c = is.get()) != EOF && c != '\n') {
      }
      continue;
    }
    if (!std::isspace(c)) break;
  }
  if (c == EOF) throw PgmHeaderError("pgm: truncated header");
  while (c != EOF && !std::isspace(c)) {
    tok.push_back(static_cast<char>(c));
    c = is.get();
  }
  return tok;
}

int64_t parse_dim(const std::string& tok, const char* what) {
  if (tok.empty() || tok.find_first_not_of("0123456789") != std::string::npos) {
    throw PgmHeaderError(std::string("pgm: malformed ") + what + " '" + tok + "'");
  }
  int64_t v = std::stoll(tok);
  if (v < 1) throw PgmHeaderError(std::string("pgm: ") + what + " must be >= 1");
  return v;
}

}  // namespace

GrayImage read_pgm(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw IoError("pgm: cannot open: " + path);

  char m0 = 0, m1 = 0;
  is.get(m0);
  is.get(m1);
  if (!is || m0 != 'P' || m1 != '5') throw PgmHeaderError("pgm: not a binary P5 file: " + path);

  const int64_t width = parse_dim(next_token(is), "width");
  const int64_t height = parse_dim(next_token(is), "height");
  const int64_t maxval = parse_dim(next_token(is), "maxval");
  if (maxval != 255 && maxval != 65535) {
    throw PgmMaxvalError("pgm: unsupported maxval " + std::to_string(maxval) + " (expected 255 or 65535)");
  }
  // next_token consumed exactly one whitespace byte after maxval; raster follows.

  GrayImage img(width, height, 0.0, maxval == 255 ? 8 : 16);
  const size_t count = static_cast<size_t>(width * height);
  const double inv = 1.0 / static_cast<double>(maxval);
  if (maxval == 255) {
    std::vector<unsigned char> raw(count);
    is.read(reinterpret_cast<char*>(raw.data()), static_cast<std::streamsize>(count));
    if (static_cast<size_t>(is.gcount()) != count) throw PgmSizeError("pgm: truncated pixel data: " + path);
    for (size_t i = 0; i < count; ++i) img.pixels[i] = raw[i] * inv;
  } else {
    std::vector<unsigned char> raw(count * 2);  // 16-bit samples are big-endian
    is.read(reinterpret_cast<char*>(raw.data()), static_cast<std::streamsize>(count * 2));
    if (static_cast<size_t>(is.gcount()) != count * 2) throw PgmSizeError("pgm: truncated pixel data: " + path);
    for (size_t i = 0; i < count; ++i) {
      img.pixels[i] = (static_cast<unsigned>(raw[2 * i]) << 8 | raw[2 * i + 1]) * inv;
    }
  }
  return img;
}

void write_pgm(const GrayImage& img, const std::string& path) {
  if (img.bit_depth != 8 && img.bit_depth != 16) {
    throw PgmMaxvalError("pgm: bit depth must be 8 or 16");
  }
  std::ofstream os(path, std::ios::binary);
  if (!os) throw IoError("pgm: cannot open for writing: " + path);
  const int64_t maxval = img.bit_depth == 8 ? 255 : 65535;
  os << "P5\n" << img.width << " " << img.height << "\n" << maxval << "\n";
  const size_t count = img.pixels.size();
  auto quantize = [maxval](double v) {
    // round half up onto the source grid
    int64_t q = static_cast<int64_t>(std::floor(v * static_cast<double>(maxval) + 0.5));
    return std::clamp<int64_t>(q, 0, maxval);
  };
  if (img.bit_depth == 8) {
    std::vector<unsigned char> raw(count);
    for (size_t i = 0; i < count; ++i) raw[i] = static_cast<unsigned char>(quantize(img.pixels[i]));
    os.write(reinterpret_cast<const char*>(raw.data()), static_cast<std::streamsize>(count));
  } else {
    std::vector<unsigned char> raw(count * 2);
    for (size_t i = 0; i < count; ++i) {
      const int64_t q = quantize(img.pixels[i]);
      raw[2 * i] = static_cast<unsigned char>(q >> 8);
      raw[2 * i + 1] = static_cast<unsigned char>(q & 0xff);
    }
    os.write(reinterpret_cast<const char*>(raw.data()), static_cast<std::streamsize>(count * 2));
  }
  if (!os) throw IoError("pgm: write failed: " + path);
}

GrayImage flip_horizontal(const GrayImage& img) {
  GrayImage out(img.width, img.height, 0.0, img.bit_depth);
  for (int64_t r = 0; r < img.height; ++r) {
    for (int64_t c = 0; c < img.width; ++c) out.at(r, c) = img.at(r, img.width - 1 - c);
  }
  return out;
}

GrayImage flip_vertical(const GrayImage& img) {
  GrayImage out(img.width, img.height, 0.0, img.bit_depth);
  for (int64_t r = 0; r < img.height; ++r) {
    for (int64_t c = 0; c < img.width; ++c) out.at(r, c) = img.at(img.height - 1 - r, c);
  }
  return out;
}

std::vector<std::string> list_pgm_files(const std::string& dir) {
  namespace fs = std::filesystem;
  if (!fs::is_directory(dir)) throw IoError("not a directory: " + dir);
  std::vector<std::string> files;
  for (const auto& entry : fs::directory_iterator(dir)) {
    if (entry.is_regular_file() && entry.path().extension() == ".pgm") {
      files.push_back(entry.path().string());
    }
  }
  std::sort(files.begin(), files.end());
  return files;
}

}  // namespace densesr
