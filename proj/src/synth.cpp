#include "se3track/synth.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace se3track {

Vec3 sample_unit_vector(Rng& rng) {
  // z uniform in [-1,1], azimuth uniform: uniform on the sphere, no rejection.
  const double z = rng.uniform(-1.0, 1.0);
  const double phi = rng.uniform(0.0, 2.0 * M_PI);
  const double r = std::sqrt(std::max(0.0, 1.0 - z * z));
  return {r * std::cos(phi), r * std::sin(phi), z};
}

Twist sample_perturbation(const PerturbationParams& p, Rng& rng) {
  if (p.sigma_t <= 0.0 || p.sigma_w <= 0.0)
    throw std::invalid_argument("sample_perturbation: sigmas must be positive");
  const Vec3 dir_t = sample_unit_vector(rng);
  const double mag_t = std::abs(rng.normal(0.0, p.sigma_t));
  const Vec3 dir_w = sample_unit_vector(rng);
  const double mag_w = std::abs(rng.normal(0.0, p.sigma_w));
  return Twist{mag_t * dir_t, mag_w * dir_w};
}

Pose sample_camera_pose(Rng& rng) { return sample_camera_pose(rng, CameraSampling{}); }

Pose sample_camera_pose(Rng& rng, const CameraSampling& range) {
  const Vec3 dir = sample_unit_vector(rng);
  // Uniform over the shell volume: r^2-weighted radius.
  const double r3_min = std::pow(range.radius_min, 3.0);
  const double r3_max = std::pow(range.radius_max, 3.0);
  const double radius = std::cbrt(rng.uniform() * (r3_max - r3_min) + r3_min);
  const Vec3 position = radius * dir;

  // Look-at: camera +z is the optical axis, pointing at the origin.
  const Vec3 forward = normalized(-position);
  Vec3 up_hint{0, 0, 1};
  if (norm(cross(up_hint, forward)) < 1e-9) up_hint = {1, 0, 0};
  const Vec3 x_axis = normalized(cross(up_hint, forward));
  const Vec3 y_axis = cross(forward, x_axis);

  Mat3 r_wc;
  for (int i = 0; i < 3; ++i) {
    r_wc(i, 0) = x_axis[i];
    r_wc(i, 1) = y_axis[i];
    r_wc(i, 2) = forward[i];
  }

  // Roll about the camera z-axis; keeps the origin on the optical axis.
  const double roll = rng.uniform(0.0, 2.0 * M_PI);
  return compose(Pose{r_wc, position}, Pose{exp_so3({0, 0, roll}), {}});
}

namespace {

constexpr double kGravityStep = 0.05;  // meters per settle step
constexpr double kSeparationSlack = 1e-12;

// One sweep of symmetric push-apart; returns true if anything moved.
bool separate_pairs(std::vector<SceneObject>& objs, Rng& rng) {
  bool moved = false;
  for (size_t i = 0; i < objs.size(); ++i)
    for (size_t j = i + 1; j < objs.size(); ++j) {
      const double min_dist = objs[i].bounding_radius + objs[j].bounding_radius;
      Vec3 delta = objs[j].pose.translation - objs[i].pose.translation;
      double dist = norm(delta);
      if (dist >= min_dist) continue;
      Vec3 dir = dist > 1e-12 ? delta / dist : sample_unit_vector(rng);
      const double push = (min_dist - dist) / 2.0 + kSeparationSlack;
      objs[i].pose.translation -= push * dir;
      objs[j].pose.translation += push * dir;
      moved = true;
    }
  return moved;
}

// Raise spheres whose bottoms dipped below the table; returns true if moved.
bool clamp_to_table(std::vector<SceneObject>& objs, double table_z) {
  bool moved = false;
  for (auto& o : objs) {
    const double bottom = o.pose.translation.z - o.bounding_radius;
    if (bottom < table_z) {
      o.pose.translation.z = table_z + o.bounding_radius;
      moved = true;
    }
  }
  return moved;
}

bool penetration_free(const std::vector<SceneObject>& objs) {
  for (size_t i = 0; i < objs.size(); ++i)
    for (size_t j = i + 1; j < objs.size(); ++j) {
      const double min_dist = objs[i].bounding_radius + objs[j].bounding_radius;
      if (norm(objs[i].pose.translation - objs[j].pose.translation) < min_dist) return false;
    }
  return true;
}

}  // namespace

std::vector<SceneObject> settle_scene(std::vector<SceneObject> objects, double table_z,
                                      Rng& rng) {
  if (objects.empty()) throw std::invalid_argument("settle_scene: empty scene");
  for (const auto& o : objects)
    if (o.bounding_radius <= 0.0)
      throw std::invalid_argument("settle_scene: non-positive bounding radius");

  for (int step = 0; step < 50; ++step) {
    bool moved = false;
    for (auto& o : objects) {
      const double gap = o.pose.translation.z - o.bounding_radius - table_z;
      if (gap > 0.0) {
        o.pose.translation.z -= std::min(kGravityStep, gap);
        moved = true;
      }
    }
    moved |= separate_pairs(objects, rng);
    moved |= clamp_to_table(objects, table_z);
    if (!moved) break;
  }

  // Mandatory projection pass: the postcondition must hold exactly.
  for (int sweep = 0; sweep < 500; ++sweep) {
    bool moved = separate_pairs(objects, rng);
    moved |= clamp_to_table(objects, table_z);
    if (!moved) break;
  }
  if (!penetration_free(objects)) {
    // Deterministic spiral re-layout; push-apart failed to converge.
    double angle = 0.0, radius = 0.0;
    for (auto& o : objects) {
      o.pose.translation = {radius * std::cos(angle), radius * std::sin(angle),
                            table_z + o.bounding_radius};
      angle += 2.1;
      radius += 2.0 * o.bounding_radius + 1e-6;
    }
  }
  return objects;
}

DepthImage augment_depth_noise(const DepthImage& d, double sigma, Rng& rng) {
  if (sigma < 0.0) throw std::invalid_argument("augment_depth_noise: sigma must be >= 0");
  DepthImage out = d;
  if (sigma == 0.0) return out;
  for (double& v : out.data) {
    if (v > 0.0) v = std::max(v + rng.normal(0.0, sigma), 1e-6);
  }
  return out;
}

DepthImage corrupt_depth_missing(const DepthImage& d, double fraction, Rng& rng) {
  if (fraction < 0.0 || fraction > 1.0)
    throw std::invalid_argument("corrupt_depth_missing: fraction must be in [0,1]");
  DepthImage out = d;
  std::vector<size_t> valid;
  valid.reserve(out.data.size());
  for (size_t i = 0; i < out.data.size(); ++i)
    if (out.data[i] > 0.0) valid.push_back(i);
  const size_t kill = static_cast<size_t>(std::llround(fraction * valid.size()));
  // Partial Fisher-Yates: the first `kill` entries are a uniform subset.
  for (size_t i = 0; i < kill; ++i) {
    const size_t j = i + rng.next_below(valid.size() - i);
    std::swap(valid[i], valid[j]);
    out.data[valid[i]] = 0.0;
  }
  return out;
}

DepthImage bilateral_filter(const DepthImage& d, double sigma_space, double sigma_range,
                            int radius) {
  if (sigma_space <= 0.0 || sigma_range <= 0.0)
    throw std::invalid_argument("bilateral_filter: sigmas must be positive");
  DepthImage out(d.width, d.height);
  const double inv_2ss = 1.0 / (2.0 * sigma_space * sigma_space);
  const double inv_2sr = 1.0 / (2.0 * sigma_range * sigma_range);

  std::vector<double> window_vals;
  for (int r = 0; r < d.height; ++r) {
    for (int c = 0; c < d.width; ++c) {
      const double center = d.at(r, c);

      double reference;
      if (center > 0.0) {
        reference = center;
      } else {
        // Hole filling: reference is the median of the valid neighbors, and
        // the fill only happens when >= 25% of the window neighbors are valid.
        window_vals.clear();
        int window_pixels = 0;
        for (int dr = -radius; dr <= radius; ++dr)
          for (int dc = -radius; dc <= radius; ++dc) {
            if (dr == 0 && dc == 0) continue;
            const int rr = r + dr, cc = c + dc;
            if (!d.in_bounds(rr, cc)) continue;
            ++window_pixels;
            if (d.valid(rr, cc)) window_vals.push_back(d.at(rr, cc));
          }
        if (window_pixels == 0 ||
            static_cast<double>(window_vals.size()) < 0.25 * window_pixels) {
          out.at(r, c) = 0.0;
          continue;
        }
        const size_t mid = (window_vals.size() - 1) / 2;
        std::nth_element(window_vals.begin(), window_vals.begin() + mid, window_vals.end());
        reference = window_vals[mid];
      }

      double wsum = 0.0, vsum = 0.0;
      for (int dr = -radius; dr <= radius; ++dr)
        for (int dc = -radius; dc <= radius; ++dc) {
          const int rr = r + dr, cc = c + dc;
          if (!d.in_bounds(rr, cc) || !d.valid(rr, cc)) continue;
          const double v = d.at(rr, cc);
          const double w = std::exp(-(dr * dr + dc * dc) * inv_2ss) *
                           std::exp(-(v - reference) * (v - reference) * inv_2sr);
          wsum += w;
          vsum += w * v;
        }
      out.at(r, c) = wsum > 0.0 ? vsum / wsum : 0.0;
    }
  }
  return out;
}

namespace {

void rgb_to_hsv(double r, double g, double b, double& h, double& s, double& v) {
  const double mx = std::max({r, g, b}), mn = std::min({r, g, b});
  const double delta = mx - mn;
  v = mx;
  s = mx > 0.0 ? delta / mx : 0.0;
  if (delta == 0.0) {
    h = 0.0;
  } else if (mx == r) {
    h = std::fmod((g - b) / delta / 6.0 + 1.0, 1.0);
  } else if (mx == g) {
    h = ((b - r) / delta + 2.0) / 6.0;
  } else {
    h = ((r - g) / delta + 4.0) / 6.0;
  }
}

void hsv_to_rgb(double h, double s, double v, double& r, double& g, double& b) {
  const double hh = std::fmod(std::fmod(h, 1.0) + 1.0, 1.0) * 6.0;
  const int i = std::min(5, static_cast<int>(hh));
  const double f = hh - i;
  const double p = v * (1.0 - s);
  const double q = v * (1.0 - s * f);
  const double t = v * (1.0 - s * (1.0 - f));
  switch (i) {
    case 0: r = v; g = t; b = p; break;
    case 1: r = q; g = v; b = p; break;
    case 2: r = p; g = v; b = t; break;
    case 3: r = p; g = q; b = v; break;
    case 4: r = t; g = p; b = v; break;
    default: r = v; g = p; b = q; break;
  }
}

std::vector<double> gaussian_kernel(double sigma) {
  const int radius = std::max(1, static_cast<int>(std::ceil(3.0 * sigma)));
  std::vector<double> k(2 * radius + 1);
  double sum = 0.0;
  for (int i = -radius; i <= radius; ++i) {
    k[i + radius] = std::exp(-(i * i) / (2.0 * sigma * sigma));
    sum += k[i + radius];
  }
  for (double& v : k) v /= sum;
  return k;
}

// Separable blur; partial kernels at the borders are renormalized so a
// constant image stays constant.
void blur_inplace(RgbdImage& img, double sigma) {
  const std::vector<double> kernel = gaussian_kernel(sigma);
  const int radius = static_cast<int>(kernel.size() / 2);
  std::vector<double> tmp(img.rgb.size());

  for (int r = 0; r < img.height; ++r)
    for (int c = 0; c < img.width; ++c)
      for (int ch = 0; ch < 3; ++ch) {
        double acc = 0.0, wsum = 0.0;
        for (int o = -radius; o <= radius; ++o) {
          const int cc = c + o;
          if (cc < 0 || cc >= img.width) continue;
          acc += kernel[o + radius] * img.rgb_at(r, cc, ch);
          wsum += kernel[o + radius];
        }
        tmp[(static_cast<size_t>(r) * img.width + c) * 3 + ch] = acc / wsum;
      }

  for (int r = 0; r < img.height; ++r)
    for (int c = 0; c < img.width; ++c)
      for (int ch = 0; ch < 3; ++ch) {
        double acc = 0.0, wsum = 0.0;
        for (int o = -radius; o <= radius; ++o) {
          const int rr = r + o;
          if (rr < 0 || rr >= img.height) continue;
          acc += kernel[o + radius] * tmp[(static_cast<size_t>(rr) * img.width + c) * 3 + ch];
          wsum += kernel[o + radius];
        }
        img.rgb_at(r, c, ch) = acc / wsum;
      }
}

}  // namespace

RgbAugmentParams sample_rgb_augment(const RgbAugmentConfig& cfg, Rng& rng) {
  RgbAugmentParams p;
  p.hue_shift = rng.uniform(-cfg.hue_shift_max, cfg.hue_shift_max);
  p.sat_scale = rng.uniform(cfg.sv_scale_min, cfg.sv_scale_max);
  p.val_scale = rng.uniform(cfg.sv_scale_min, cfg.sv_scale_max);
  p.noise_sigma = rng.uniform(0.0, cfg.noise_sigma_max);
  p.blur_sigma = rng.uniform() < cfg.blur_prob
                     ? 0.0
                     : rng.uniform(cfg.blur_sigma_min, cfg.blur_sigma_max);
  return p;
}

RgbdImage apply_rgb_augment(const RgbdImage& img, const RgbAugmentParams& p, Rng& rng) {
  RgbdImage out = img;

  if (p.hue_shift != 0.0 || p.sat_scale != 1.0 || p.val_scale != 1.0) {
    for (int r = 0; r < out.height; ++r)
      for (int c = 0; c < out.width; ++c) {
        double h, s, v;
        rgb_to_hsv(out.rgb_at(r, c, 0), out.rgb_at(r, c, 1), out.rgb_at(r, c, 2), h, s, v);
        h = std::fmod(std::fmod(h + p.hue_shift, 1.0) + 1.0, 1.0);
        s = std::clamp(s * p.sat_scale, 0.0, 1.0);
        v = std::clamp(v * p.val_scale, 0.0, 1.0);
        hsv_to_rgb(h, s, v, out.rgb_at(r, c, 0), out.rgb_at(r, c, 1), out.rgb_at(r, c, 2));
      }
  }

  if (p.noise_sigma > 0.0) {
    for (double& v : out.rgb) v += rng.normal(0.0, p.noise_sigma);
  }

  if (p.blur_sigma > 0.0) blur_inplace(out, p.blur_sigma);

  for (double& v : out.rgb) v = std::clamp(v, 0.0, 1.0);
  return out;
}

RgbdImage augment_rgb(const RgbdImage& img, const RgbAugmentConfig& cfg, Rng& rng) {
  return apply_rgb_augment(img, sample_rgb_augment(cfg, rng), rng);
}

namespace {

// The object's projected bounding circle must lie inside the image.
bool object_visible(const Pose& T_obj_cam, double bounding_radius, const CameraIntrinsics& k) {
  const Vec3& c = T_obj_cam.translation;
  if (c.z < 2.0 * bounding_radius || c.z < 0.05) return false;
  const double u = k.fx * c.x / c.z + k.cx;
  const double v = k.fy * c.y / c.z + k.cy;
  const double pix_radius = std::max(k.fx, k.fy) * bounding_radius / c.z;
  return u - pix_radius >= 0 && u + pix_radius <= k.width - 1 && v - pix_radius >= 0 &&
         v + pix_radius <= k.height - 1;
}

}  // namespace

TrainingPair generate_pair_at(const TriangleMesh& mesh, const CameraIntrinsics& k,
                              const Pose& T_true, const Twist& gt_twist,
                              const SynthConfig& cfg, Rng& rng) {
  const double diameter = model_diameter(mesh);
  const Pose T_prev = compose(inverse(exp_se3(gt_twist)), T_true);
  if (T_prev.translation.z <= 0.0 || T_true.translation.z <= 0.0)
    throw std::domain_error("generate_pair_at: object behind the camera");

  const RgbdImage prev_full = render_rgbd(mesh, T_prev, k);

  RgbdImage cur_full = render_rgbd(mesh, T_true, k);
  if (cfg.augment) {
    const double brightness = rng.uniform(cfg.brightness_min, cfg.brightness_max);
    for (double& v : cur_full.rgb) v = std::clamp(v * brightness, 0.0, 1.0);
    cur_full = augment_rgb(cur_full, cfg.rgb_augment, rng);
    cur_full.depth = augment_depth_noise(cur_full.depth, cfg.depth_noise_sigma, rng);
    cur_full.depth =
        corrupt_depth_missing(cur_full.depth, rng.uniform(0.0, cfg.depth_missing_max), rng);
  }

  TrainingPair pair;
  // Both crops centered on the previous pose: that is all the tracker knows.
  pair.img_prev = crop_and_zoom(prev_full, T_prev, diameter, k, cfg.out_size, cfg.crop_pad);
  pair.img_cur = crop_and_zoom(cur_full, T_prev, diameter, k, cfg.out_size, cfg.crop_pad);
  pair.gt_twist = gt_twist;
  return pair;
}

TrainingPair generate_pair(const TriangleMesh& mesh, const CameraIntrinsics& k,
                           const SynthConfig& cfg, Rng& rng) {
  const double radius = model_diameter(mesh) / 2.0;

  for (int attempt = 0; attempt < cfg.max_attempts; ++attempt) {
    const Pose camera = sample_camera_pose(rng);

    // Random orientation, dropped onto the table near the origin.
    SceneObject obj;
    obj.mesh = &mesh;
    obj.bounding_radius = radius;
    UnitQuaternion q;
    {
      const double a = rng.normal(), b = rng.normal(), c = rng.normal(), d = rng.normal();
      const double n = std::sqrt(a * a + b * b + c * c + d * d);
      q = UnitQuaternion{a / n, b / n, c / n, std::abs(d) / n};
    }
    obj.pose.rotation = quat_to_mat(q);
    obj.pose.translation = {rng.uniform(-0.05, 0.05), rng.uniform(-0.05, 0.05), 0.3};
    const Pose settled = settle_scene({obj}, cfg.table_z, rng)[0].pose;

    const Pose T_true = compose(inverse(camera), settled);
    const Twist gt_twist = sample_perturbation(cfg.perturb, rng);
    const Pose T_prev = compose(inverse(exp_se3(gt_twist)), T_true);

    if (!object_visible(T_true, radius, k) || !object_visible(T_prev, radius, k)) continue;
    return generate_pair_at(mesh, k, T_true, gt_twist, cfg, rng);
  }
  throw std::runtime_error("generate_pair: no visible configuration found");
}

}  // namespace se3track
