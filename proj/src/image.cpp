#include "se3track/image.hpp"

#include <algorithm>
#include <cmath>

namespace se3track {

double median_valid_depth(const DepthImage& d) {
  std::vector<double> vals;
  vals.reserve(d.data.size());
  for (double v : d.data)
    if (v > 0.0) vals.push_back(v);
  if (vals.empty()) return 0.0;
  // Lower median; deterministic regardless of tie order.
  const size_t k = (vals.size() - 1) / 2;
  std::nth_element(vals.begin(), vals.begin() + k, vals.end());
  return vals[k];
}

namespace detail {

// Pixel centers sit at integer coordinates; samples outside the source count
// as black / invalid.
double sample_bilinear(const RgbdImage& img, double u, double v, int ch) {
  const int c0 = static_cast<int>(std::floor(u));
  const int r0 = static_cast<int>(std::floor(v));
  const double fu = u - c0, fv = v - r0;
  double acc = 0.0;
  for (int dr = 0; dr <= 1; ++dr)
    for (int dc = 0; dc <= 1; ++dc) {
      const int r = r0 + dr, c = c0 + dc;
      if (r < 0 || r >= img.height || c < 0 || c >= img.width) continue;
      const double w = (dr ? fv : 1.0 - fv) * (dc ? fu : 1.0 - fu);
      acc += w * img.rgb_at(r, c, ch);
    }
  return acc;
}

double sample_nearest_depth(const DepthImage& d, double u, double v) {
  const int c = static_cast<int>(std::lround(u));
  const int r = static_cast<int>(std::lround(v));
  if (!d.in_bounds(r, c)) return 0.0;
  return d.at(r, c);
}

// Resamples the square/rectangular source window [u0-su/2, u0+su/2) x
// [v0-sv/2, v0+sv/2) into an out_w x out_h image.
RgbdImage resample_window(const RgbdImage& img, double u0, double v0, double su, double sv,
                          int out_w, int out_h) {
  RgbdImage out(out_w, out_h);
  for (int i = 0; i < out_h; ++i) {
    const double v = v0 - sv / 2.0 + (i + 0.5) * (sv / out_h);
    for (int j = 0; j < out_w; ++j) {
      const double u = u0 - su / 2.0 + (j + 0.5) * (su / out_w);
      for (int ch = 0; ch < 3; ++ch) out.rgb_at(i, j, ch) = sample_bilinear(img, u, v, ch);
      out.depth.at(i, j) = sample_nearest_depth(img.depth, u, v);
    }
  }
  return out;
}

}  // namespace detail

RgbdImage resize_rgbd(const RgbdImage& img, int out_width, int out_height) {
  if (out_width < 1 || out_height < 1)
    throw std::invalid_argument("resize_rgbd: output size must be positive");
  return detail::resample_window(img, (img.width - 1) / 2.0, (img.height - 1) / 2.0,
                                 img.width, img.height, out_width, out_height);
}

}  // namespace se3track
