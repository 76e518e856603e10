#include "se3track/tracker.hpp"

#include <cmath>
#include <stdexcept>

namespace se3track {

IcpEstimator::IcpEstimator(const TriangleMesh& mesh, GaussNewtonConfig cfg, int model_samples,
                           std::uint64_t sample_seed)
    : cfg_(cfg) {
  const auto samples = sample_surface_points(mesh, model_samples, sample_seed);
  points_.reserve(samples.size());
  normals_.reserve(samples.size());
  for (const auto& s : samples) {
    points_.push_back(s.point);
    normals_.push_back(s.normal);
  }
}

Twist IcpEstimator::estimate(const RgbdImage& /*rendered_prev*/, const RgbdImage& observed_cur,
                             const TrackContext& ctx) {
  const IcpResult res =
      icp_register(points_, normals_, ctx.pose_prev, observed_cur.depth, ctx.crop_K, cfg_);
  last_rms_ = res.residual_rms;
  return res.twist;
}

TrackerSetup TrackerSetup::create(const TriangleMesh& mesh, const CameraIntrinsics& k,
                                  int crop_size, double crop_pad) {
  TrackerSetup s;
  s.mesh = &mesh;
  s.K = k;
  s.diameter = model_diameter(mesh);
  s.crop_size = crop_size;
  s.crop_pad = crop_pad;
  return s;
}

TrackState track_frame(const TrackState& state, const RgbdImage& observation,
                       ResidualEstimator& estimator, const TrackerSetup& setup) {
  TrackState next = state;
  next.frame_index = state.frame_index + 1;

  try {
    const RgbdImage rendered = render_rgbd(*setup.mesh, state.pose, setup.K);
    const RgbdImage rendered_crop = crop_and_zoom(rendered, state.pose, setup.diameter,
                                                  setup.K, setup.crop_size, setup.crop_pad);
    const RgbdImage observed_crop = crop_and_zoom(observation, state.pose, setup.diameter,
                                                  setup.K, setup.crop_size, setup.crop_pad);

    TrackContext ctx;
    ctx.pose_prev = state.pose;
    ctx.mesh = setup.mesh;
    ctx.crop_K = crop_intrinsics(state.pose, setup.diameter, setup.K, setup.crop_size,
                                 setup.crop_pad);

    const Twist dxi = estimator.estimate(rendered_crop, observed_crop, ctx);
    if (!finite(dxi.t) || !finite(dxi.w))
      throw std::runtime_error("estimator produced a non-finite twist");

    next.pose = apply_update(state.pose, dxi);
    next.pose.rotation = orthonormalized(next.pose.rotation);
    next.last_twist = dxi;
    next.residual_rms = estimator.last_residual_rms();
    next.lost = false;
  } catch (const std::exception&) {
    // Keep the previous pose; the frame is recorded as lost.
    next.pose = state.pose;
    next.last_twist = Twist{};
    next.residual_rms = 0.0;
    next.lost = true;
  }
  return next;
}

std::vector<TrackState> track_sequence(const Pose& init_pose,
                                       const std::vector<RgbdImage>& frames,
                                       ResidualEstimator& estimator,
                                       const TrackerSetup& setup) {
  if (frames.empty()) throw std::invalid_argument("track_sequence: no frames");
  std::vector<TrackState> out;
  out.reserve(frames.size());
  TrackState state;
  state.pose = init_pose;
  for (const RgbdImage& frame : frames) {
    state = track_frame(state, frame, estimator, setup);
    out.push_back(state);
  }
  return out;
}

}  // namespace se3track
