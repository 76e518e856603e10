#pragma once

// Toy-scale two-branch pose-residual network: two non-shared conv encoders
// (one per input image), concatenated features, and decoupled fully-connected
// heads for translation and rotation. Training, gradient verification and a
// binary weight format live here too. All math is double precision and
// single-threaded, so results are bit-reproducible for a fixed seed.

#include <cstdint>
#include <string>
#include <vector>

#include "se3track/geometry.hpp"
#include "se3track/image.hpp"
#include "se3track/rng.hpp"
#include "se3track/tracker.hpp"

namespace se3track {

struct Tensor {
  std::vector<int> shape;
  std::vector<double> data;

  Tensor() = default;
  explicit Tensor(std::vector<int> s);
  size_t numel() const { return data.size(); }
};

struct NetworkSpec {
  int input_size = 44;
  int channels_in = 4;
  std::vector<int> encoder_channels = {8, 16, 32};  // 3x3 conv, stride 2, pad 1, ReLU
  int fc_hidden = 64;
  bool shared_encoders = false;

  bool operator==(const NetworkSpec&) const = default;
};

namespace nn {

struct Conv2d {
  int in_ch = 0, out_ch = 0;
  Tensor weight;  // [out, in, 3, 3]
  Tensor bias;    // [out]
  Tensor dweight, dbias;

  // Forward caches (per sample; the network runs one sample at a time).
  Tensor input;   // [in, H, W]
  Tensor cols;    // im2col buffer [in*9, outH*outW]
  int in_h = 0, in_w = 0, out_h = 0, out_w = 0;

  void init(int in_channels, int out_channels, Rng& rng);
  Tensor forward(const Tensor& x);
  Tensor backward(const Tensor& dy);  // accumulates dweight/dbias, returns dx
};

struct ReLU {
  Tensor output;
  Tensor forward(const Tensor& x);
  Tensor backward(const Tensor& dy);
};

struct Linear {
  int in_f = 0, out_f = 0;
  Tensor weight;  // [out, in]
  Tensor bias;    // [out]
  Tensor dweight, dbias;
  Tensor input;

  void init(int in_features, int out_features, Rng& rng);
  Tensor forward(const Tensor& x);
  Tensor backward(const Tensor& dy);
};

struct Encoder {
  std::vector<Conv2d> convs;
  std::vector<ReLU> relus;
  Tensor forward(const Tensor& x);
  Tensor backward(const Tensor& dy);
};

struct Head {
  Linear fc1, fc2;
  ReLU relu;
  Tensor forward(const Tensor& x);
  Tensor backward(const Tensor& dy);
};

}  // namespace nn

struct NamedParam {
  std::string name;
  Tensor* value = nullptr;
  Tensor* grad = nullptr;
};

struct ForwardResult {
  Vec3 t_pred;
  Vec3 w_pred;
};

class Network {
 public:
  explicit Network(const NetworkSpec& spec, std::uint64_t init_seed = 0);

  const NetworkSpec& spec() const { return spec_; }

  // prev -> encoder A, cur -> encoder B (A when encoders are shared).
  ForwardResult forward(const Tensor& img_prev, const Tensor& img_cur);

  // Backpropagates dL/dt_pred and dL/dw_pred through the last forward call,
  // accumulating into the parameter gradients.
  void backward(const Vec3& dt, const Vec3& dw);

  void zero_grad();
  std::vector<NamedParam> parameters();

  // Feature maps from the last forward; used by the disentanglement tests.
  const Tensor& features_a() const { return feat_a_; }
  const Tensor& features_b() const { return feat_b_; }

  // ReLU activation-sign signature of the last forward (kink detection).
  std::vector<std::uint8_t> relu_signature() const;

  int feature_size() const { return feature_size_; }

 private:
  NetworkSpec spec_;
  nn::Encoder enc_a_, enc_b_;
  nn::Head head_t_, head_w_;
  Tensor feat_a_, feat_b_, concat_;
  Tensor input_a_cache_;  // shared-encoder mode: branch A input for backward
  int feature_size_ = 0;
};

// lambda1 |w - w_gt|^2 + lambda2 |t - t_gt|^2 (squared L2 norms).
double loss_value(const Vec3& t_pred, const Vec3& w_pred, const Vec3& t_gt, const Vec3& w_gt,
                  double lambda1 = 1.0, double lambda2 = 1.0);

struct TrainSample {
  Tensor prev;  // [4, S, S]
  Tensor cur;   // [4, S, S]
  Vec3 t_gt;
  Vec3 w_gt;
};

// Depth channel encoding: (depth - z_ref)/0.1 clamped to [-1, 1], invalid
// pixels 0; z_ref is the median valid depth of the rendered previous image.
// Channel order R, G, B, depth.
Tensor make_input_tensor(const RgbdImage& img, int input_size, double z_ref);
double depth_reference(const RgbdImage& rendered_prev, int input_size);
TrainSample make_train_sample(const RgbdImage& img_prev, const RgbdImage& img_cur,
                              const Twist& gt, int input_size);

struct TrainConfig {
  double lambda1 = 1.0;
  double lambda2 = 1.0;
  double lr = 1e-3;
  int epochs = 300;
  int batch_size = 200;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  std::uint64_t seed = 0;
  std::vector<int> lr_milestones = {100, 200};  // lr *= 0.1 at these epochs
  double stop_loss = 0.0;                       // > 0: stop once mean epoch loss dips below
  std::vector<std::string> frozen_params;       // name prefixes excluded from updates
};

struct TrainResult {
  std::vector<double> loss_history;  // mean loss per epoch
  std::vector<double> best_so_far;   // running minimum of loss_history
  double final_loss = 0.0;
  int epochs_run = 0;
};

// Adam training; deterministic for identical (seed, config, data). Throws
// std::runtime_error with a diagnostic when the loss turns non-finite.
TrainResult train(Network& net, const std::vector<TrainSample>& dataset,
                  const TrainConfig& cfg);

struct GradCheckResult {
  double max_relative_error = 0.0;
  int checked = 0;
  int excluded = 0;  // weights whose +-eps evaluations straddle a ReLU kink
};

// Central finite differences over every weight of a tiny network.
GradCheckResult grad_check(Network& net, const TrainSample& sample, double epsilon,
                           double lambda1 = 1.0, double lambda2 = 1.0);

// Binary weight file: magic "SE3TNETW", version, per-layer name/shape/f32
// data, trailing CRC32. Round trips are byte-identical.
void save_weights(Network& net, const std::string& path);
// Throws std::runtime_error on magic/version/CRC mismatch or when the file's
// layers do not match the network's parameters.
void load_weights(Network& net, const std::string& path);

// ResidualEstimator backed by the network.
class NetEstimator : public ResidualEstimator {
 public:
  explicit NetEstimator(Network net) : net_(std::move(net)) {}
  Twist estimate(const RgbdImage& rendered_prev, const RgbdImage& observed_cur,
                 const TrackContext& ctx) override;
  Network& network() { return net_; }

 private:
  Network net_;
};

}  // namespace se3track
