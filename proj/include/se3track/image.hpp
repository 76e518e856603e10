#pragma once

// Image containers shared by the renderer, augmentation and network code.
// Depth is metric (meters) with 0.0 meaning invalid/missing.

#include <cstddef>
#include <stdexcept>
#include <vector>

namespace se3track {

struct DepthImage {
  int width = 0, height = 0;
  std::vector<double> data;  // row-major, meters, 0 = invalid

  DepthImage() = default;
  DepthImage(int w, int h) : width(w), height(h), data(static_cast<size_t>(w) * h, 0.0) {}

  double& at(int row, int col) { return data[static_cast<size_t>(row) * width + col]; }
  double at(int row, int col) const { return data[static_cast<size_t>(row) * width + col]; }
  bool valid(int row, int col) const { return at(row, col) > 0.0; }
  bool in_bounds(int row, int col) const {
    return row >= 0 && row < height && col >= 0 && col < width;
  }
  size_t valid_count() const {
    size_t n = 0;
    for (double d : data) n += d > 0.0;
    return n;
  }
};

struct RgbdImage {
  int width = 0, height = 0;
  std::vector<double> rgb;  // row-major, 3 channels interleaved, values in [0,1]
  DepthImage depth;

  RgbdImage() = default;
  RgbdImage(int w, int h)
      : width(w), height(h), rgb(static_cast<size_t>(w) * h * 3, 0.0), depth(w, h) {}

  double& rgb_at(int row, int col, int ch) {
    return rgb[(static_cast<size_t>(row) * width + col) * 3 + ch];
  }
  double rgb_at(int row, int col, int ch) const {
    return rgb[(static_cast<size_t>(row) * width + col) * 3 + ch];
  }
};

// Median of the valid (> 0) depths; 0.0 when the image has none.
double median_valid_depth(const DepthImage& d);

// Plain full-image resize: bilinear (zero-padded) for RGB, nearest neighbor
// for depth so no surface points are fabricated across discontinuities.
RgbdImage resize_rgbd(const RgbdImage& img, int out_width, int out_height);

namespace detail {
// Pixel centers at integer coordinates; outside the source is black/invalid.
double sample_bilinear(const RgbdImage& img, double u, double v, int ch);
double sample_nearest_depth(const DepthImage& d, double u, double v);
RgbdImage resample_window(const RgbdImage& img, double u0, double v0, double su, double sv,
                          int out_w, int out_h);
}  // namespace detail

}  // namespace se3track
