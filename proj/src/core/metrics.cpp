#include "core/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <map>
#include <sstream>

namespace densesr {

namespace {

void check_dims(const GrayImage& x, const GrayImage& y, const char* op) {
  if (x.width != y.width || x.height != y.height) {
    throw ShapeError(std::string(op) + ": image dims differ, " + std::to_string(x.width) + "x" +
                     std::to_string(x.height) + " vs " + std::to_string(y.width) + "x" + std::to_string(y.height));
  }
}

}  // namespace

double psnr(const GrayImage& x, const GrayImage& y, const MetricConfig& cfg) {
  check_dims(x, y, "psnr");
  double mse = 0.0;
  for (size_t i = 0; i < x.pixels.size(); ++i) {
    const double d = x.pixels[i] - y.pixels[i];
    mse += d * d;
  }
  mse /= static_cast<double>(x.pixels.size());
  if (mse == 0.0) return std::numeric_limits<double>::infinity();
  return 10.0 * std::log10(cfg.dynamic_range * cfg.dynamic_range / mse);
}

double ssim(const GrayImage& x, const GrayImage& y, const MetricConfig& cfg) {
  check_dims(x, y, "ssim");
  const int w = cfg.window;
  if (x.width < w || x.height < w) {
    throw ConfigError("ssim: image smaller than the " + std::to_string(w) + "x" + std::to_string(w) + " window");
  }

  // Normalized 1-D Gaussian; the separable outer product equals the
  // normalized 2-D window.
  std::vector<double> g(static_cast<size_t>(w));
  const double half = (w - 1) / 2.0;
  double gsum = 0.0;
  for (int i = 0; i < w; ++i) {
    g[static_cast<size_t>(i)] = std::exp(-((i - half) * (i - half)) / (2.0 * cfg.sigma * cfg.sigma));
    gsum += g[static_cast<size_t>(i)];
  }
  for (double& v : g) v /= gsum;

  const int64_t out_h = x.height - w + 1;
  const int64_t out_w = x.width - w + 1;

  // Horizontal then vertical weighted sums for the five moment maps.
  auto blur = [&](const std::vector<double>& src, int64_t height, int64_t width) {
    std::vector<double> mid(static_cast<size_t>(height * out_w));
    for (int64_t r = 0; r < height; ++r) {
      for (int64_t c = 0; c < out_w; ++c) {
        double acc = 0.0;
        const double* row = src.data() + r * width;
        for (int k = 0; k < w; ++k) acc += g[static_cast<size_t>(k)] * row[c + k];
        mid[static_cast<size_t>(r * out_w + c)] = acc;
      }
    }
    std::vector<double> out(static_cast<size_t>(out_h * out_w));
    for (int64_t r = 0; r < out_h; ++r) {
      for (int64_t c = 0; c < out_w; ++c) {
        double acc = 0.0;
        for (int k = 0; k < w; ++k) acc += g[static_cast<size_t>(k)] * mid[static_cast<size_t>((r + k) * out_w + c)];
        out[static_cast<size_t>(r * out_w + c)] = acc;
      }
    }
    return out;
  };

  const size_t n = x.pixels.size();
  std::vector<double> xx(n), yy(n), xy(n);
  for (size_t i = 0; i < n; ++i) {
    xx[i] = x.pixels[i] * x.pixels[i];
    yy[i] = y.pixels[i] * y.pixels[i];
    xy[i] = x.pixels[i] * y.pixels[i];
  }
  const auto mu_x = blur(x.pixels, x.height, x.width);
  const auto mu_y = blur(y.pixels, x.height, x.width);
  const auto m_xx = blur(xx, x.height, x.width);
  const auto m_yy = blur(yy, x.height, x.width);
  const auto m_xy = blur(xy, x.height, x.width);

  const double c1 = cfg.k1 * cfg.dynamic_range * cfg.k1 * cfg.dynamic_range;
  const double c2 = cfg.k2 * cfg.dynamic_range * cfg.k2 * cfg.dynamic_range;

  double total = 0.0;
  for (size_t i = 0; i < mu_x.size(); ++i) {
    const double mx = mu_x[i], my = mu_y[i];
    const double var_x = m_xx[i] - mx * mx;
    const double var_y = m_yy[i] - my * my;
    const double cov = m_xy[i] - mx * my;
    total += ((2.0 * mx * my + c1) * (2.0 * cov + c2)) / ((mx * mx + my * my + c1) * (var_x + var_y + c2));
  }
  return total / static_cast<double>(mu_x.size());
}

std::vector<MethodAggregate> aggregate(const std::vector<EvalRow>& rows) {
  if (rows.empty()) throw ConfigError("aggregate: no rows");
  std::vector<MethodAggregate> out;
  auto find = [&out](const std::string& method, int64_t scale) -> MethodAggregate& {
    for (auto& a : out) {
      if (a.method == method && a.scale == scale) return a;
    }
    out.push_back(MethodAggregate{method, scale, 0.0, 0.0, 0});
    return out.back();
  };
  for (const auto& r : rows) {
    auto& a = find(r.method, r.scale);
    a.mean_psnr += r.psnr_db;
    a.mean_ssim += r.ssim;
    a.count += 1;
  }
  for (auto& a : out) {
    a.mean_psnr /= static_cast<double>(a.count);
    a.mean_ssim /= static_cast<double>(a.count);
  }
  return out;
}

std::vector<MethodDelta> cross_deltas(const std::vector<MethodAggregate>& aggregates) {
  std::vector<std::string> methods;
  std::map<std::string, std::vector<int64_t>> scales;
  std::map<std::string, double> psnr_sum, ssim_sum;
  for (const auto& a : aggregates) {
    if (std::find(methods.begin(), methods.end(), a.method) == methods.end()) methods.push_back(a.method);
    scales[a.method].push_back(a.scale);
    psnr_sum[a.method] += a.mean_psnr;
    ssim_sum[a.method] += a.mean_ssim;
  }
  for (auto& [method, s] : scales) std::sort(s.begin(), s.end());
  for (size_t i = 1; i < methods.size(); ++i) {
    if (scales[methods[i]] != scales[methods[0]]) {
      throw ConfigError("report: methods '" + methods[0] + "' and '" + methods[i] + "' cover different scale sets");
    }
  }
  std::vector<MethodDelta> out;
  if (methods.size() < 2) return out;
  const double nscales = static_cast<double>(scales[methods[0]].size());
  for (const auto& a : methods) {
    for (const auto& b : methods) {
      if (a == b) continue;
      out.push_back(MethodDelta{a, b, (psnr_sum[a] - psnr_sum[b]) / nscales, (ssim_sum[a] - ssim_sum[b]) / nscales});
    }
  }
  return out;
}

namespace {

std::string full(double v) {
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

double parse_double(const std::string& s) {
  if (s == "inf") return std::numeric_limits<double>::infinity();
  if (s == "-inf") return -std::numeric_limits<double>::infinity();
  return std::stod(s);
}

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::istringstream is(line);
  std::string field;
  while (std::getline(is, field, ',')) out.push_back(field);
  return out;
}

}  // namespace

void write_rows_csv(const std::vector<EvalRow>& rows, const std::string& path) {
  std::ofstream os(path);
  if (!os) throw IoError("csv: cannot write " + path);
  os << "image_id,method,scale,psnr_db,ssim\n";
  for (const auto& r : rows) {
    os << r.image_id << "," << r.method << "," << r.scale << "," << full(r.psnr_db) << "," << full(r.ssim) << "\n";
  }
  if (!os) throw IoError("csv: write failed: " + path);
}

void write_aggregate_csv(const std::vector<MethodAggregate>& aggs, const std::string& path) {
  std::ofstream os(path);
  if (!os) throw IoError("csv: cannot write " + path);
  os << "method,scale,mean_psnr,mean_ssim\n";
  for (const auto& a : aggs) {
    os << a.method << "," << a.scale << "," << full(a.mean_psnr) << "," << full(a.mean_ssim) << "\n";
  }
  if (!os) throw IoError("csv: write failed: " + path);
}

std::vector<MethodAggregate> read_aggregate_csv(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw IoError("csv: cannot open " + path);
  std::string line;
  if (!std::getline(is, line) || !line.starts_with("method,scale,mean_psnr,mean_ssim")) {
    throw IoError("csv: " + path + " is not an aggregate file");
  }
  std::vector<MethodAggregate> out;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    auto fields = split_csv_line(line);
    if (fields.size() != 4) throw IoError("csv: malformed aggregate row: " + line);
    MethodAggregate a;
    a.method = fields[0];
    a.scale = std::stoll(fields[1]);
    a.mean_psnr = parse_double(fields[2]);
    a.mean_ssim = parse_double(fields[3]);
    out.push_back(std::move(a));
  }
  return out;
}

void write_delta_csv(const std::vector<MethodDelta>& deltas, const std::string& path) {
  std::ofstream os(path);
  if (!os) throw IoError("csv: cannot write " + path);
  os << "method_a,method_b,mean_psnr_delta,mean_ssim_delta\n";
  for (const auto& d : deltas) {
    char buf[128];
    std::snprintf(buf, sizeof(buf), "%.2f,%.3f", d.mean_psnr_delta, d.mean_ssim_delta);
    os << d.method_a << "," << d.method_b << "," << buf << "\n";
  }
  if (!os) throw IoError("csv: write failed: " + path);
}

}  // namespace densesr
