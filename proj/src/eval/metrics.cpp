#include "relight/eval/metrics.hpp"

#include <array>
#include <cmath>

namespace relight::eval {

namespace {

void require_match(const Raster<float>& a, const Raster<float>& b, const char* op) {
  if (!a.same_size(b) || a.channels() != b.channels()) {
    throw ValidationError(std::string(op) + ": " + shape_string(a.width(), a.height(), a.channels()) +
                          " vs " + shape_string(b.width(), b.height(), b.channels()));
  }
}

constexpr int kWin = 11;

std::array<double, kWin> gaussian_window() {
  std::array<double, kWin> g{};
  double s = 0.0;
  for (int i = 0; i < kWin; ++i) {
    const double d = i - kWin / 2;
    g[static_cast<std::size_t>(i)] = std::exp(-d * d / (2.0 * 1.5 * 1.5));
    s += g[static_cast<std::size_t>(i)];
  }
  for (double& v : g) v /= s;
  return g;
}

}  // namespace

double mse(const Raster<float>& a, const Raster<float>& b) {
  require_match(a, b, "mse");
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double d = static_cast<double>(a.data()[i]) - b.data()[i];
    s += d * d;
  }
  return s / static_cast<double>(a.size());
}

double mse(const ColorImage& a, const ColorImage& b) { return mse(a.raster(), b.raster()); }
double mse(const ShadowImage& a, const ShadowImage& b) { return mse(a.raster(), b.raster()); }

double ssim(const Raster<float>& a, const Raster<float>& b) {
  require_match(a, b, "ssim");
  const int w = a.width(), h = a.height();
  if (w < kWin || h < kWin) throw ValidationError("ssim needs images of at least 11x11");
  const auto g = gaussian_window();
  constexpr double c1 = 0.01 * 0.01, c2 = 0.03 * 0.03;
  const int ow = w - kWin + 1, oh = h - kWin + 1;
  double total = 0.0;
  for (int c = 0; c < a.channels(); ++c) {
    for (int y0 = 0; y0 < oh; ++y0) {
      for (int x0 = 0; x0 < ow; ++x0) {
        double ma = 0, mb = 0, saa = 0, sbb = 0, sab = 0;
        for (int j = 0; j < kWin; ++j) {
          for (int i = 0; i < kWin; ++i) {
            const double wt = g[static_cast<std::size_t>(j)] * g[static_cast<std::size_t>(i)];
            const double va = a.at(x0 + i, y0 + j, c), vb = b.at(x0 + i, y0 + j, c);
            ma += wt * va;
            mb += wt * vb;
            saa += wt * va * va;
            sbb += wt * vb * vb;
            sab += wt * va * vb;
          }
        }
        const double va = saa - ma * ma, vb = sbb - mb * mb, cov = sab - ma * mb;
        total += ((2 * ma * mb + c1) * (2 * cov + c2)) / ((ma * ma + mb * mb + c1) * (va + vb + c2));
      }
    }
  }
  return total / (static_cast<double>(ow) * oh * a.channels());
}

double dssim(const Raster<float>& a, const Raster<float>& b) { return (1.0 - ssim(a, b)) / 2.0; }
double dssim(const ColorImage& a, const ColorImage& b) { return dssim(a.raster(), b.raster()); }

double iou(const Raster<float>& a, const Raster<float>& b) {
  require_match(a, b, "iou");
  std::size_t inter = 0, uni = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const bool x = a.data()[i] > 0.5f, y = b.data()[i] > 0.5f;
    inter += x && y;
    uni += x || y;
  }
  return uni == 0 ? 1.0 : static_cast<double>(inter) / static_cast<double>(uni);
}

Raster<float> unlit_mask(const ShadowImage& s) {
  Raster<float> m(s.width(), s.height(), 1);
  for (std::size_t i = 0; i < m.size(); ++i) m.data()[i] = s.raster().data()[i] == 0.0f ? 1.0f : 0.0f;
  return m;
}

}  // namespace relight::eval
