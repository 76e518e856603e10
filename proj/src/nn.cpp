#include "se3track/nn.hpp"

#include <zlib.h>

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <numeric>
#include <stdexcept>

namespace se3track {

using RowMat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using MapMat = Eigen::Map<RowMat>;
using ConstMapMat = Eigen::Map<const RowMat>;

Tensor::Tensor(std::vector<int> s) : shape(std::move(s)) {
  size_t n = 1;
  for (int d : shape) n *= static_cast<size_t>(d);
  data.assign(n, 0.0);
}

namespace {

// Kaiming-uniform fan-in initialization.
void init_uniform(Tensor& t, int fan_in, Rng& rng) {
  const double bound = std::sqrt(6.0 / fan_in);
  for (double& v : t.data) v = rng.uniform(-bound, bound);
}

int conv_out_dim(int in) { return (in + 2 - 3) / 2 + 1; }  // k=3, stride=2, pad=1

}  // namespace

namespace nn {

void Conv2d::init(int in_channels, int out_channels, Rng& rng) {
  in_ch = in_channels;
  out_ch = out_channels;
  weight = Tensor({out_ch, in_ch, 3, 3});
  bias = Tensor({out_ch});
  dweight = Tensor({out_ch, in_ch, 3, 3});
  dbias = Tensor({out_ch});
  init_uniform(weight, in_ch * 9, rng);
}

Tensor Conv2d::forward(const Tensor& x) {
  in_h = x.shape[1];
  in_w = x.shape[2];
  out_h = conv_out_dim(in_h);
  out_w = conv_out_dim(in_w);
  input = x;

  const int k_area = in_ch * 9;
  const int n_pix = out_h * out_w;
  cols = Tensor({k_area, n_pix});

  // im2col, stride 2, pad 1; out-of-bounds taps stay zero.
  for (int c = 0; c < in_ch; ++c)
    for (int ky = 0; ky < 3; ++ky)
      for (int kx = 0; kx < 3; ++kx) {
        double* dst = &cols.data[static_cast<size_t>((c * 9 + ky * 3 + kx)) * n_pix];
        const double* src = &x.data[static_cast<size_t>(c) * in_h * in_w];
        for (int oy = 0; oy < out_h; ++oy) {
          const int iy = oy * 2 + ky - 1;
          for (int ox = 0; ox < out_w; ++ox) {
            const int ix = ox * 2 + kx - 1;
            dst[oy * out_w + ox] =
                (iy >= 0 && iy < in_h && ix >= 0 && ix < in_w) ? src[iy * in_w + ix] : 0.0;
          }
        }
      }

  Tensor y({out_ch, out_h, out_w});
  MapMat ym(y.data.data(), out_ch, n_pix);
  ConstMapMat wm(weight.data.data(), out_ch, k_area);
  ConstMapMat cm(cols.data.data(), k_area, n_pix);
  ym.noalias() = wm * cm;
  for (int oc = 0; oc < out_ch; ++oc) ym.row(oc).array() += bias.data[oc];
  return y;
}

Tensor Conv2d::backward(const Tensor& dy) {
  const int k_area = in_ch * 9;
  const int n_pix = out_h * out_w;

  ConstMapMat dym(dy.data.data(), out_ch, n_pix);
  ConstMapMat cm(cols.data.data(), k_area, n_pix);
  MapMat dwm(dweight.data.data(), out_ch, k_area);
  dwm.noalias() += dym * cm.transpose();
  for (int oc = 0; oc < out_ch; ++oc) dbias.data[oc] += dym.row(oc).sum();

  Tensor dcols({k_area, n_pix});
  MapMat dcm(dcols.data.data(), k_area, n_pix);
  ConstMapMat wm(weight.data.data(), out_ch, k_area);
  dcm.noalias() = wm.transpose() * dym;

  // col2im scatter-add.
  Tensor dx({in_ch, in_h, in_w});
  for (int c = 0; c < in_ch; ++c)
    for (int ky = 0; ky < 3; ++ky)
      for (int kx = 0; kx < 3; ++kx) {
        const double* src = &dcols.data[static_cast<size_t>((c * 9 + ky * 3 + kx)) * n_pix];
        double* dst = &dx.data[static_cast<size_t>(c) * in_h * in_w];
        for (int oy = 0; oy < out_h; ++oy) {
          const int iy = oy * 2 + ky - 1;
          if (iy < 0 || iy >= in_h) continue;
          for (int ox = 0; ox < out_w; ++ox) {
            const int ix = ox * 2 + kx - 1;
            if (ix < 0 || ix >= in_w) continue;
            dst[iy * in_w + ix] += src[oy * out_w + ox];
          }
        }
      }
  return dx;
}

Tensor ReLU::forward(const Tensor& x) {
  output = x;
  for (double& v : output.data) v = std::max(0.0, v);
  return output;
}

Tensor ReLU::backward(const Tensor& dy) {
  Tensor dx = dy;
  for (size_t i = 0; i < dx.data.size(); ++i)
    if (output.data[i] <= 0.0) dx.data[i] = 0.0;
  return dx;
}

void Linear::init(int in_features, int out_features, Rng& rng) {
  in_f = in_features;
  out_f = out_features;
  weight = Tensor({out_f, in_f});
  bias = Tensor({out_f});
  dweight = Tensor({out_f, in_f});
  dbias = Tensor({out_f});
  init_uniform(weight, in_f, rng);
}

Tensor Linear::forward(const Tensor& x) {
  input = x;
  Tensor y({out_f});
  ConstMapMat wm(weight.data.data(), out_f, in_f);
  Eigen::Map<Eigen::VectorXd> ym(y.data.data(), out_f);
  Eigen::Map<const Eigen::VectorXd> xm(x.data.data(), in_f);
  ym.noalias() = wm * xm;
  for (int i = 0; i < out_f; ++i) y.data[i] += bias.data[i];
  return y;
}

Tensor Linear::backward(const Tensor& dy) {
  MapMat dwm(dweight.data.data(), out_f, in_f);
  Eigen::Map<const Eigen::VectorXd> dym(dy.data.data(), out_f);
  Eigen::Map<const Eigen::VectorXd> xm(input.data.data(), in_f);
  dwm.noalias() += dym * xm.transpose();
  for (int i = 0; i < out_f; ++i) dbias.data[i] += dy.data[i];

  Tensor dx({in_f});
  ConstMapMat wm(weight.data.data(), out_f, in_f);
  Eigen::Map<Eigen::VectorXd> dxm(dx.data.data(), in_f);
  dxm.noalias() = wm.transpose() * dym;
  return dx;
}

Tensor Encoder::forward(const Tensor& x) {
  Tensor h = x;
  for (size_t i = 0; i < convs.size(); ++i) {
    h = convs[i].forward(h);
    h = relus[i].forward(h);
  }
  return h;
}

Tensor Encoder::backward(const Tensor& dy) {
  Tensor d = dy;
  for (size_t i = convs.size(); i-- > 0;) {
    d = relus[i].backward(d);
    d = convs[i].backward(d);
  }
  return d;
}

Tensor Head::forward(const Tensor& x) {
  return fc2.forward(relu.forward(fc1.forward(x)));
}

Tensor Head::backward(const Tensor& dy) {
  return fc1.backward(relu.backward(fc2.backward(dy)));
}

}  // namespace nn

Network::Network(const NetworkSpec& spec, std::uint64_t init_seed) : spec_(spec) {
  if (spec_.input_size < 4 || spec_.channels_in < 1 || spec_.fc_hidden < 1)
    throw std::invalid_argument("Network: bad spec");

  Rng rng(Rng(init_seed).split(0x6e657477ULL).next_u64());

  auto build_encoder = [&](nn::Encoder& enc) {
    int ch = spec_.channels_in;
    for (int out_ch : spec_.encoder_channels) {
      nn::Conv2d conv;
      conv.init(ch, out_ch, rng);
      enc.convs.push_back(std::move(conv));
      enc.relus.emplace_back();
      ch = out_ch;
    }
  };
  build_encoder(enc_a_);
  if (!spec_.shared_encoders) build_encoder(enc_b_);

  int side = spec_.input_size;
  for (size_t i = 0; i < spec_.encoder_channels.size(); ++i) side = (side + 2 - 3) / 2 + 1;
  const int ch_out =
      spec_.encoder_channels.empty() ? spec_.channels_in : spec_.encoder_channels.back();
  feature_size_ = ch_out * side * side;

  head_t_.fc1.init(2 * feature_size_, spec_.fc_hidden, rng);
  head_t_.fc2.init(spec_.fc_hidden, 3, rng);
  head_w_.fc1.init(2 * feature_size_, spec_.fc_hidden, rng);
  head_w_.fc2.init(spec_.fc_hidden, 3, rng);
}

ForwardResult Network::forward(const Tensor& img_prev, const Tensor& img_cur) {
  const size_t expected = static_cast<size_t>(spec_.channels_in) * spec_.input_size *
                          spec_.input_size;
  if (img_prev.numel() != expected || img_cur.numel() != expected)
    throw std::invalid_argument("Network::forward: input shape mismatch");

  feat_a_ = enc_a_.forward(img_prev);
  if (spec_.shared_encoders) input_a_cache_ = img_prev;
  nn::Encoder& enc_b = spec_.shared_encoders ? enc_a_ : enc_b_;
  feat_b_ = enc_b.forward(img_cur);
  // Sharing reuses encoder A's layer caches, so branch A's activations must
  // be re-established before the backward pass; that is handled in backward().

  concat_ = Tensor({2 * feature_size_});
  std::copy(feat_a_.data.begin(), feat_a_.data.end(), concat_.data.begin());
  std::copy(feat_b_.data.begin(), feat_b_.data.end(), concat_.data.begin() + feature_size_);

  const Tensor t_out = head_t_.forward(concat_);
  const Tensor w_out = head_w_.forward(concat_);
  return {{t_out.data[0], t_out.data[1], t_out.data[2]},
          {w_out.data[0], w_out.data[1], w_out.data[2]}};
}

void Network::backward(const Vec3& dt, const Vec3& dw) {
  Tensor dt_t({3}), dw_t({3});
  for (int i = 0; i < 3; ++i) {
    dt_t.data[i] = dt[i];
    dw_t.data[i] = dw[i];
  }
  const Tensor d_concat_t = head_t_.backward(dt_t);
  const Tensor d_concat_w = head_w_.backward(dw_t);

  Tensor d_feat_a({feature_size_}), d_feat_b({feature_size_});
  for (int i = 0; i < feature_size_; ++i) {
    d_feat_a.data[i] = d_concat_t.data[i] + d_concat_w.data[i];
    d_feat_b.data[i] = d_concat_t.data[i + feature_size_] + d_concat_w.data[i + feature_size_];
  }

  if (spec_.shared_encoders) {
    // Caches currently hold branch B's activations (B ran last).
    enc_a_.backward(d_feat_b);
    // Re-run branch A's forward to restore its caches, then backprop.
    enc_a_.forward(input_a_cache_);
    enc_a_.backward(d_feat_a);
  } else {
    enc_b_.backward(d_feat_b);
    enc_a_.backward(d_feat_a);
  }
}

void Network::zero_grad() {
  for (NamedParam& p : parameters())
    std::fill(p.grad->data.begin(), p.grad->data.end(), 0.0);
}

std::vector<NamedParam> Network::parameters() {
  std::vector<NamedParam> out;
  auto add_encoder = [&](nn::Encoder& enc, const std::string& prefix) {
    for (size_t i = 0; i < enc.convs.size(); ++i) {
      const std::string base = prefix + ".conv" + std::to_string(i);
      out.push_back({base + ".weight", &enc.convs[i].weight, &enc.convs[i].dweight});
      out.push_back({base + ".bias", &enc.convs[i].bias, &enc.convs[i].dbias});
    }
  };
  auto add_head = [&](nn::Head& head, const std::string& prefix) {
    out.push_back({prefix + ".fc1.weight", &head.fc1.weight, &head.fc1.dweight});
    out.push_back({prefix + ".fc1.bias", &head.fc1.bias, &head.fc1.dbias});
    out.push_back({prefix + ".fc2.weight", &head.fc2.weight, &head.fc2.dweight});
    out.push_back({prefix + ".fc2.bias", &head.fc2.bias, &head.fc2.dbias});
  };
  add_encoder(enc_a_, "encA");
  if (!spec_.shared_encoders) add_encoder(enc_b_, "encB");
  add_head(head_t_, "headT");
  add_head(head_w_, "headW");
  return out;
}

std::vector<std::uint8_t> Network::relu_signature() const {
  std::vector<std::uint8_t> sig;
  auto add = [&](const nn::ReLU& r) {
    for (double v : r.output.data) sig.push_back(v > 0.0 ? 1 : 0);
  };
  for (const auto& r : enc_a_.relus) add(r);
  if (!spec_.shared_encoders)
    for (const auto& r : enc_b_.relus) add(r);
  add(head_t_.relu);
  add(head_w_.relu);
  return sig;
}

double loss_value(const Vec3& t_pred, const Vec3& w_pred, const Vec3& t_gt, const Vec3& w_gt,
                  double lambda1, double lambda2) {
  const Vec3 dw = w_pred - w_gt, dt = t_pred - t_gt;
  return lambda1 * dot(dw, dw) + lambda2 * dot(dt, dt);
}

double depth_reference(const RgbdImage& rendered_prev, int input_size) {
  const RgbdImage resized = resize_rgbd(rendered_prev, input_size, input_size);
  return median_valid_depth(resized.depth);
}

Tensor make_input_tensor(const RgbdImage& img, int input_size, double z_ref) {
  const RgbdImage resized = (img.width == input_size && img.height == input_size)
                                ? img
                                : resize_rgbd(img, input_size, input_size);
  Tensor t({4, input_size, input_size});
  const size_t plane = static_cast<size_t>(input_size) * input_size;
  for (int r = 0; r < input_size; ++r)
    for (int c = 0; c < input_size; ++c) {
      const size_t i = static_cast<size_t>(r) * input_size + c;
      for (int ch = 0; ch < 3; ++ch) t.data[ch * plane + i] = resized.rgb_at(r, c, ch);
      const double d = resized.depth.at(r, c);
      t.data[3 * plane + i] =
          d > 0.0 ? std::clamp((d - z_ref) / 0.1, -1.0, 1.0) : 0.0;
    }
  return t;
}

TrainSample make_train_sample(const RgbdImage& img_prev, const RgbdImage& img_cur,
                              const Twist& gt, int input_size) {
  const double z_ref = depth_reference(img_prev, input_size);
  TrainSample s;
  s.prev = make_input_tensor(img_prev, input_size, z_ref);
  s.cur = make_input_tensor(img_cur, input_size, z_ref);
  s.t_gt = gt.t;
  s.w_gt = gt.w;
  return s;
}

TrainResult train(Network& net, const std::vector<TrainSample>& dataset,
                  const TrainConfig& cfg) {
  if (dataset.empty()) throw std::invalid_argument("train: empty dataset");
  if (cfg.batch_size < 1 || cfg.lr < 0.0) throw std::invalid_argument("train: bad config");

  auto params = net.parameters();
  std::vector<Tensor> m(params.size()), v(params.size());
  for (size_t i = 0; i < params.size(); ++i) {
    m[i] = Tensor(params[i].value->shape);
    v[i] = Tensor(params[i].value->shape);
  }
  std::vector<bool> frozen(params.size(), false);
  for (size_t i = 0; i < params.size(); ++i)
    for (const std::string& prefix : cfg.frozen_params)
      if (params[i].name.rfind(prefix, 0) == 0) frozen[i] = true;

  Rng rng(Rng(cfg.seed).split(0x747261696eULL).next_u64());
  std::vector<size_t> order(dataset.size());
  std::iota(order.begin(), order.end(), 0);

  TrainResult result;
  double lr = cfg.lr;
  long step = 0;

  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    for (int milestone : cfg.lr_milestones)
      if (epoch == milestone) lr *= 0.1;

    // Deterministic Fisher-Yates shuffle.
    for (size_t i = order.size(); i > 1; --i)
      std::swap(order[i - 1], order[rng.next_below(i)]);

    double epoch_loss = 0.0;
    for (size_t start = 0; start < order.size(); start += cfg.batch_size) {
      const size_t end = std::min(order.size(), start + cfg.batch_size);
      const double inv_n = 1.0 / static_cast<double>(end - start);

      net.zero_grad();
      double batch_loss = 0.0;
      for (size_t bi = start; bi < end; ++bi) {
        const TrainSample& s = dataset[order[bi]];
        const ForwardResult out = net.forward(s.prev, s.cur);
        batch_loss += loss_value(out.t_pred, out.w_pred, s.t_gt, s.w_gt, cfg.lambda1,
                                 cfg.lambda2) * inv_n;
        const Vec3 dt = (2.0 * cfg.lambda2 * inv_n) * (out.t_pred - s.t_gt);
        const Vec3 dw = (2.0 * cfg.lambda1 * inv_n) * (out.w_pred - s.w_gt);
        net.backward(dt, dw);
      }
      if (!std::isfinite(batch_loss))
        throw std::runtime_error("train: non-finite loss at epoch " + std::to_string(epoch) +
                                 ", batch starting at sample " + std::to_string(start));
      epoch_loss += batch_loss * (end - start);

      ++step;
      const double bc1 = 1.0 - std::pow(cfg.beta1, step);
      const double bc2 = 1.0 - std::pow(cfg.beta2, step);
      for (size_t i = 0; i < params.size(); ++i) {
        if (frozen[i]) continue;
        double* w = params[i].value->data.data();
        const double* g = params[i].grad->data.data();
        double* mi = m[i].data.data();
        double* vi = v[i].data.data();
        const size_t n = params[i].value->numel();
        for (size_t j = 0; j < n; ++j) {
          mi[j] = cfg.beta1 * mi[j] + (1.0 - cfg.beta1) * g[j];
          vi[j] = cfg.beta2 * vi[j] + (1.0 - cfg.beta2) * g[j] * g[j];
          w[j] -= lr * (mi[j] / bc1) / (std::sqrt(vi[j] / bc2) + cfg.eps);
        }
      }
    }

    epoch_loss /= static_cast<double>(dataset.size());
    result.loss_history.push_back(epoch_loss);
    result.best_so_far.push_back(result.best_so_far.empty()
                                     ? epoch_loss
                                     : std::min(result.best_so_far.back(), epoch_loss));
    result.epochs_run = epoch + 1;
    if (cfg.stop_loss > 0.0 && epoch_loss < cfg.stop_loss) break;
  }

  result.final_loss = result.loss_history.empty() ? 0.0 : result.loss_history.back();
  return result;
}

GradCheckResult grad_check(Network& net, const TrainSample& sample, double epsilon,
                           double lambda1, double lambda2) {
  GradCheckResult res;

  auto eval = [&](std::vector<std::uint8_t>* sig) {
    const ForwardResult out = net.forward(sample.prev, sample.cur);
    if (sig) *sig = net.relu_signature();
    return loss_value(out.t_pred, out.w_pred, sample.t_gt, sample.w_gt, lambda1, lambda2);
  };

  // Analytic gradients.
  net.zero_grad();
  const ForwardResult out = net.forward(sample.prev, sample.cur);
  net.backward(2.0 * lambda2 * (out.t_pred - sample.t_gt),
               2.0 * lambda1 * (out.w_pred - sample.w_gt));
  auto params = net.parameters();

  std::vector<std::uint8_t> sig_plus, sig_minus;
  for (auto& p : params) {
    for (size_t j = 0; j < p.value->numel(); ++j) {
      const double saved = p.value->data[j];
      p.value->data[j] = saved + epsilon;
      const double lp = eval(&sig_plus);
      p.value->data[j] = saved - epsilon;
      const double lm = eval(&sig_minus);
      p.value->data[j] = saved;

      if (sig_plus != sig_minus) {
        // The +-eps points straddle a ReLU kink; the finite difference is
        // meaningless there.
        ++res.excluded;
        continue;
      }
      const double numeric = (lp - lm) / (2.0 * epsilon);
      const double analytic = p.grad->data[j];
      const double rel = std::abs(analytic - numeric) /
                         std::max({std::abs(analytic), std::abs(numeric), 1e-8});
      res.max_relative_error = std::max(res.max_relative_error, rel);
      ++res.checked;
    }
  }
  return res;
}

namespace {

void put_u16(std::string& out, std::uint16_t v) {
  out.push_back(static_cast<char>(v & 0xff));
  out.push_back(static_cast<char>((v >> 8) & 0xff));
}

void put_u32(std::string& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}

void put_f32(std::string& out, float v) {
  std::uint32_t bits;
  std::memcpy(&bits, &v, 4);
  put_u32(out, bits);
}

struct Reader {
  const std::string& buf;
  size_t pos = 0;
  explicit Reader(const std::string& b) : buf(b) {}

  void need(size_t n) const {
    if (pos + n > buf.size()) throw std::runtime_error("weight file truncated or corrupt");
  }
  std::uint16_t u16() {
    need(2);
    const auto v = static_cast<std::uint16_t>(static_cast<unsigned char>(buf[pos]) |
                                              (static_cast<unsigned char>(buf[pos + 1]) << 8));
    pos += 2;
    return v;
  }
  std::uint32_t u32() {
    need(4);
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(static_cast<unsigned char>(buf[pos + i])) << (8 * i);
    pos += 4;
    return v;
  }
  float f32() {
    const std::uint32_t bits = u32();
    float v;
    std::memcpy(&v, &bits, 4);
    return v;
  }
  std::string bytes(size_t n) {
    need(n);
    std::string s = buf.substr(pos, n);
    pos += n;
    return s;
  }
};

constexpr char kMagic[9] = "SE3TNETW";
constexpr std::uint32_t kVersion = 1;

}  // namespace

void save_weights(Network& net, const std::string& path) {
  std::string out;
  out.append(kMagic, 8);
  put_u32(out, kVersion);

  auto params = net.parameters();
  put_u32(out, static_cast<std::uint32_t>(params.size()));
  for (const NamedParam& p : params) {
    put_u16(out, static_cast<std::uint16_t>(p.name.size()));
    out.append(p.name);
    out.push_back(static_cast<char>(p.value->shape.size()));
    for (int d : p.value->shape) put_u32(out, static_cast<std::uint32_t>(d));
    for (double v : p.value->data) put_f32(out, static_cast<float>(v));
  }
  const std::uint32_t crc = static_cast<std::uint32_t>(
      crc32(0L, reinterpret_cast<const Bytef*>(out.data()), static_cast<uInt>(out.size())));
  put_u32(out, crc);

  // Atomic write: temp file + rename.
  const std::string tmp = path + ".tmp";
  {
    std::ofstream f(tmp, std::ios::binary | std::ios::trunc);
    if (!f) throw std::runtime_error("save_weights: cannot open " + tmp);
    f.write(out.data(), static_cast<std::streamsize>(out.size()));
    if (!f) throw std::runtime_error("save_weights: write failed for " + tmp);
  }
  if (std::rename(tmp.c_str(), path.c_str()) != 0)
    throw std::runtime_error("save_weights: rename failed for " + path);
}

void load_weights(Network& net, const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("load_weights: cannot open " + path);
  std::string buf((std::istreambuf_iterator<char>(f)), std::istreambuf_iterator<char>());

  if (buf.size() < 16) throw std::runtime_error("weight file truncated or corrupt");
  const std::uint32_t stored_crc =
      static_cast<std::uint32_t>(static_cast<unsigned char>(buf[buf.size() - 4])) |
      (static_cast<std::uint32_t>(static_cast<unsigned char>(buf[buf.size() - 3])) << 8) |
      (static_cast<std::uint32_t>(static_cast<unsigned char>(buf[buf.size() - 2])) << 16) |
      (static_cast<std::uint32_t>(static_cast<unsigned char>(buf[buf.size() - 1])) << 24);
  const std::uint32_t computed_crc = static_cast<std::uint32_t>(crc32(
      0L, reinterpret_cast<const Bytef*>(buf.data()), static_cast<uInt>(buf.size() - 4)));
  if (stored_crc != computed_crc)
    throw std::runtime_error("load_weights: CRC mismatch, file corrupt");

  Reader r(buf);
  if (r.bytes(8) != std::string(kMagic, 8))
    throw std::runtime_error("load_weights: bad magic");
  if (r.u32() != kVersion) throw std::runtime_error("load_weights: unsupported version");

  auto params = net.parameters();
  const std::uint32_t count = r.u32();
  if (count != params.size())
    throw std::runtime_error("load_weights: layer count mismatch against network spec");

  for (NamedParam& p : params) {
    const std::uint16_t name_len = r.u16();
    const std::string name = r.bytes(name_len);
    if (name != p.name)
      throw std::runtime_error("load_weights: layer name mismatch: expected " + p.name +
                               ", file has " + name);
    r.need(1);
    const int rank = static_cast<unsigned char>(r.bytes(1)[0]);
    if (rank != static_cast<int>(p.value->shape.size()))
      throw std::runtime_error("load_weights: rank mismatch for " + name);
    for (int d = 0; d < rank; ++d) {
      if (r.u32() != static_cast<std::uint32_t>(p.value->shape[d]))
        throw std::runtime_error("load_weights: shape mismatch for " + name);
    }
    for (size_t j = 0; j < p.value->numel(); ++j) p.value->data[j] = r.f32();
  }
}

Twist NetEstimator::estimate(const RgbdImage& rendered_prev, const RgbdImage& observed_cur,
                             const TrackContext& /*ctx*/) {
  const int s = net_.spec().input_size;
  const double z_ref = depth_reference(rendered_prev, s);
  const Tensor prev = make_input_tensor(rendered_prev, s, z_ref);
  const Tensor cur = make_input_tensor(observed_cur, s, z_ref);
  const ForwardResult out = net_.forward(prev, cur);
  return Twist{out.t_pred, out.w_pred};
}

}  // namespace se3track
