#pragma once

// Synthetic training-data generation: perturbation and camera-pose sampling,
// bounding-sphere scene settling, and the depth/RGB domain-alignment
// augmentations applied to the observation branch.

#include <vector>

#include "se3track/camera.hpp"
#include "se3track/geometry.hpp"
#include "se3track/image.hpp"
#include "se3track/mesh.hpp"
#include "se3track/renderer.hpp"
#include "se3track/rng.hpp"

namespace se3track {

struct PerturbationParams {
  double sigma_t = 0.02;   // meters
  double sigma_w = 0.262;  // radians
};

struct SceneObject {
  const TriangleMesh* mesh = nullptr;
  Pose pose;                     // world frame
  double bounding_radius = 0.0;  // meters, model_diameter / 2
};

struct TrainingPair {
  RgbdImage img_prev;  // render at the perturbed pose, clean
  RgbdImage img_cur;   // render at the true pose, augmented
  Twist gt_twist;      // relative transform: apply_update(T_prev, gt_twist) = T_true
};

// Uniformly distributed unit vector.
Vec3 sample_unit_vector(Rng& rng);

// Half-normal magnitudes along independent uniform directions for t and w.
Twist sample_perturbation(const PerturbationParams& p, Rng& rng);

// Camera-to-world pose: position uniform over the spherical shell
// [0.6, 1.3] m around the origin, optical axis through the origin, then a
// uniform roll about the camera z-axis.
Pose sample_camera_pose(Rng& rng);

struct CameraSampling {
  double radius_min = 0.6;
  double radius_max = 1.3;
};
Pose sample_camera_pose(Rng& rng, const CameraSampling& range);

// Bounding-sphere gravity settling: at most 50 fixed steps of drop +
// push-apart, then a mandatory projection pass. The result has zero pairwise
// sphere penetration and every sphere bottom at or above table_z.
std::vector<SceneObject> settle_scene(std::vector<SceneObject> objects, double table_z,
                                      Rng& rng);

// Per-valid-pixel N(0, sigma) noise; values clamped at 1e-6 so valid pixels
// never become invalid. Invalid pixels are untouched.
DepthImage augment_depth_noise(const DepthImage& d, double sigma, Rng& rng);

// Exactly round(fraction * valid_count) uniformly chosen valid pixels set to 0.
DepthImage corrupt_depth_missing(const DepthImage& d, double fraction, Rng& rng);

// Bilateral filter with hole filling: a center-invalid pixel is filled when
// at least 25% of its window neighbors are valid (range term against the
// valid-neighbor median), otherwise it stays invalid.
DepthImage bilateral_filter(const DepthImage& d, double sigma_space, double sigma_range,
                            int radius);

struct RgbAugmentParams {
  double hue_shift = 0.0;      // additive, wraps in [0,1)
  double sat_scale = 1.0;
  double val_scale = 1.0;
  double noise_sigma = 0.0;    // per-channel Gaussian
  double blur_sigma = 0.0;     // 0 = no blur
};

struct RgbAugmentConfig {
  double hue_shift_max = 0.05;
  double sv_scale_min = 0.8;
  double sv_scale_max = 1.2;
  double noise_sigma_max = 0.02;
  double blur_prob = 0.5;
  double blur_sigma_min = 0.5;
  double blur_sigma_max = 1.5;
};

RgbAugmentParams sample_rgb_augment(const RgbAugmentConfig& cfg, Rng& rng);

// In order: HSV shift, per-channel Gaussian noise, Gaussian blur; output
// clamped to [0,1]. Depth is untouched.
RgbdImage apply_rgb_augment(const RgbdImage& img, const RgbAugmentParams& p, Rng& rng);
RgbdImage augment_rgb(const RgbdImage& img, const RgbAugmentConfig& cfg, Rng& rng);

// Full pair-generation configuration (everything the paper leaves unstated is
// exposed here).
struct SynthConfig {
  PerturbationParams perturb;
  RgbAugmentConfig rgb_augment;
  int out_size = 176;
  double crop_pad = kDefaultCropPad;
  double depth_noise_sigma = 0.002;  // meters
  double depth_missing_max = 0.4;    // missing fraction sampled in [0, max]
  double brightness_min = 0.7;       // global scene brightness on the observation
  double brightness_max = 1.3;
  double table_z = 0.0;
  bool augment = true;
  int max_attempts = 100;
};

// Deterministic core: renders and crops a pair for a given true pose and
// relative twist. Throws std::domain_error when the object leaves the image.
TrainingPair generate_pair_at(const TriangleMesh& mesh, const CameraIntrinsics& k,
                              const Pose& T_true, const Twist& gt_twist,
                              const SynthConfig& cfg, Rng& rng);

// Samples a settled scene, camera pose and perturbation, then renders the
// pair. Resamples on off-image configurations, up to cfg.max_attempts.
TrainingPair generate_pair(const TriangleMesh& mesh, const CameraIntrinsics& k,
                           const SynthConfig& cfg, Rng& rng);

}  // namespace se3track
