#pragma once

// Frame-to-frame tracking loop: render the model at the previous pose, crop
// both images around it, ask an estimator for the relative twist, apply the
// manifold update T^t = exp(dxi) * T^(t-1).

#include <memory>
#include <vector>

#include "se3track/camera.hpp"
#include "se3track/geometry.hpp"
#include "se3track/icp.hpp"
#include "se3track/image.hpp"
#include "se3track/mesh.hpp"
#include "se3track/renderer.hpp"

namespace se3track {

struct TrackContext {
  Pose pose_prev;             // object pose the crops are centered on
  const TriangleMesh* mesh = nullptr;
  CameraIntrinsics crop_K;    // intrinsics of the cropped images
};

// Abstract relative-pose estimator; both the Gauss-Newton solver and the
// neural network implement this.
class ResidualEstimator {
 public:
  virtual ~ResidualEstimator() = default;
  virtual Twist estimate(const RgbdImage& rendered_prev, const RgbdImage& observed_cur,
                         const TrackContext& ctx) = 0;
  // Diagnostic from the last estimate() call; 0 when not applicable.
  virtual double last_residual_rms() const { return 0.0; }
};

class IcpEstimator : public ResidualEstimator {
 public:
  explicit IcpEstimator(const TriangleMesh& mesh, GaussNewtonConfig cfg = {},
                        int model_samples = 1000, std::uint64_t sample_seed = 12345);

  Twist estimate(const RgbdImage& rendered_prev, const RgbdImage& observed_cur,
                 const TrackContext& ctx) override;
  double last_residual_rms() const override { return last_rms_; }

 private:
  GaussNewtonConfig cfg_;
  std::vector<Vec3> points_;   // object frame
  std::vector<Vec3> normals_;  // object frame
  double last_rms_ = 0.0;
};

struct TrackState {
  Pose pose;
  int frame_index = 0;
  Twist last_twist;
  double residual_rms = 0.0;
  bool lost = false;
};

struct TrackerSetup {
  const TriangleMesh* mesh = nullptr;
  CameraIntrinsics K;
  double diameter = 0.0;  // model_diameter(mesh); cached
  int crop_size = 176;
  double crop_pad = kDefaultCropPad;

  static TrackerSetup create(const TriangleMesh& mesh, const CameraIntrinsics& k,
                             int crop_size = 176, double crop_pad = kDefaultCropPad);
};

// One tracking step. Estimator failure leaves the pose unchanged and flags
// the frame as lost.
TrackState track_frame(const TrackState& state, const RgbdImage& observation,
                       ResidualEstimator& estimator, const TrackerSetup& setup);

// Folds track_frame over the sequence; one state per frame, no
// re-initialization.
std::vector<TrackState> track_sequence(const Pose& init_pose,
                                       const std::vector<RgbdImage>& frames,
                                       ResidualEstimator& estimator,
                                       const TrackerSetup& setup);

}  // namespace se3track
