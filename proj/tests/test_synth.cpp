#include <doctest.h>

#include <cmath>

#include "helpers.hpp"
#include "se3track/synth.hpp"

using namespace se3track;
using namespace se3track::testing;

TEST_CASE("rng streams are deterministic and splittable") {
  Rng a(42), b(42);
  for (int i = 0; i < 100; ++i) CHECK(a.next_u64() == b.next_u64());

  // Child streams depend only on (state, index), not on sibling order.
  Rng parent(7);
  Rng c0 = parent.split(0), c1 = parent.split(1);
  Rng c0_again = parent.split(0);
  CHECK(c0.next_u64() == c0_again.next_u64());
  CHECK(c0.next_u64() != c1.next_u64());
}

TEST_CASE("rng next_below is in range") {
  Rng rng(3);
  for (int i = 0; i < 10000; ++i) CHECK(rng.next_below(7) < 7);
}

TEST_CASE("sample_unit_vector is unit and uniform") {
  Rng rng(11);
  Vec3 mean{};
  int upper = 0;
  const int n = 1000000;
  for (int i = 0; i < n; ++i) {
    const Vec3 v = sample_unit_vector(rng);
    CHECK(std::abs(norm(v) - 1.0) <= 1e-12);
    mean += v;
    upper += v.z > 0;
  }
  mean = mean / n;
  CHECK(norm(mean) < 0.01);
  CHECK(std::abs(static_cast<double>(upper) / n - 0.5) <= 0.005);
}

TEST_CASE("sample_perturbation half-normal magnitudes") {
  Rng rng(13);
  PerturbationParams p;  // sigma_t = 0.02, sigma_w = 0.262
  double sum_t = 0, sum_w = 0;
  const int n = 1000000;
  for (int i = 0; i < n; ++i) {
    const Twist xi = sample_perturbation(p, rng);
    sum_t += norm(xi.t);
    sum_w += norm(xi.w);
  }
  const double half_normal = std::sqrt(2.0 / M_PI);
  CHECK(sum_t / n == doctest::Approx(0.02 * half_normal).epsilon(0.01));
  CHECK(sum_w / n == doctest::Approx(0.262 * half_normal).epsilon(0.01));
}

TEST_CASE("sample_perturbation collapses as sigma -> 0") {
  Rng rng(17);
  PerturbationParams p;
  p.sigma_t = 1e-300;
  p.sigma_w = 1e-300;
  for (int i = 0; i < 100; ++i) {
    const Twist xi = sample_perturbation(p, rng);
    CHECK(norm(xi.t) <= 1e-290);
    CHECK(norm(xi.w) <= 1e-290);
  }
  p.sigma_t = 0.0;
  CHECK_THROWS_AS(sample_perturbation(p, rng), std::invalid_argument);
}

TEST_CASE("sample_camera_pose geometry") {
  Rng rng(19);
  for (int i = 0; i < 10000; ++i) {
    const Pose cam = sample_camera_pose(rng);
    const double radius = norm(cam.translation);
    CHECK(radius >= 0.6);
    CHECK(radius <= 1.3);
    // The world origin lies on the optical axis, in front of the camera.
    const Vec3 origin_cam = transform_point(inverse(cam), Vec3{0, 0, 0});
    CHECK(std::abs(origin_cam.x) <= 1e-9);
    CHECK(std::abs(origin_cam.y) <= 1e-9);
    CHECK(origin_cam.z > 0.0);
    CHECK(is_rotation(cam.rotation, 1e-9));
  }
}

TEST_CASE("sample_camera_pose radius matches the uniform-shell mean") {
  Rng rng(23);
  double sum = 0;
  const int n = 1000000;
  for (int i = 0; i < n; ++i) sum += norm(sample_camera_pose(rng).translation);
  // Uniform over the shell volume: E[r] = 3(R^4 - r^4) / (4(R^3 - r^3)).
  const double rmin = 0.6, rmax = 1.3;
  const double expected = 3.0 * (std::pow(rmax, 4) - std::pow(rmin, 4)) /
                          (4.0 * (std::pow(rmax, 3) - std::pow(rmin, 3)));
  CHECK(sum / n == doctest::Approx(expected).epsilon(0.01));
}

TEST_CASE("settle_scene: single object drops exactly onto the table") {
  Rng rng(29);
  SceneObject obj;
  obj.bounding_radius = 0.05;
  obj.pose.translation = {0.1, -0.2, 0.55};  // bottom at 0.5
  const auto settled = settle_scene({obj}, 0.0, rng);
  CHECK(settled[0].pose.translation.z - settled[0].bounding_radius == 0.0);
  CHECK(settled[0].pose.translation.x == 0.1);
  CHECK(settled[0].pose.translation.y == -0.2);
}

TEST_CASE("settle_scene: coincident objects separate") {
  Rng rng(31);
  SceneObject a, b;
  a.bounding_radius = 0.04;
  b.bounding_radius = 0.03;
  a.pose.translation = b.pose.translation = {0, 0, 0.2};
  const auto settled = settle_scene({a, b}, 0.0, rng);
  const double dist = norm(settled[0].pose.translation - settled[1].pose.translation);
  CHECK(dist >= settled[0].bounding_radius + settled[1].bounding_radius);
}

TEST_CASE("settle_scene: six random objects end penetration-free and supported") {
  Rng rng(37);
  for (int scene = 0; scene < 20; ++scene) {
    std::vector<SceneObject> objs(6);
    for (auto& o : objs) {
      o.bounding_radius = rng.uniform(0.02, 0.08);
      o.pose.translation = {rng.uniform(-0.1, 0.1), rng.uniform(-0.1, 0.1),
                            rng.uniform(0.05, 0.6)};
    }
    const auto settled = settle_scene(objs, 0.0, rng);
    for (size_t i = 0; i < settled.size(); ++i) {
      CHECK(settled[i].pose.translation.z - settled[i].bounding_radius >= -1e-9);
      for (size_t j = i + 1; j < settled.size(); ++j) {
        const double dist = norm(settled[i].pose.translation - settled[j].pose.translation);
        CHECK(dist >= settled[i].bounding_radius + settled[j].bounding_radius - 1e-12);
      }
    }
  }
}

TEST_CASE("augment_depth_noise") {
  DepthImage d(50, 40);
  for (int r = 10; r < 30; ++r)
    for (int c = 5; c < 45; ++c) d.at(r, c) = 1.0;

  Rng rng(41);
  SUBCASE("sigma 0 is the identity") {
    const DepthImage out = augment_depth_noise(d, 0.0, rng);
    CHECK(out.data == d.data);
  }

  SUBCASE("invalid pixels stay invalid, valid stay valid") {
    const DepthImage out = augment_depth_noise(d, 0.01, rng);
    for (size_t i = 0; i < d.data.size(); ++i) {
      if (d.data[i] == 0.0) CHECK(out.data[i] == 0.0);
      else CHECK(out.data[i] > 0.0);
    }
  }

  SUBCASE("empirical noise std matches sigma") {
    DepthImage constant(320, 313);  // ~1e5 pixels
    for (double& v : constant.data) v = 2.0;
    const double sigma = 0.005;
    const DepthImage out = augment_depth_noise(constant, sigma, rng);
    double sum = 0, sq = 0;
    for (double v : out.data) {
      sum += v - 2.0;
      sq += (v - 2.0) * (v - 2.0);
    }
    const double n = static_cast<double>(out.data.size());
    const double var = sq / n - (sum / n) * (sum / n);
    CHECK(std::sqrt(var) == doctest::Approx(sigma).epsilon(0.02));
  }
}

TEST_CASE("corrupt_depth_missing") {
  DepthImage d(100, 100);
  for (double& v : d.data) v = 1.5;

  Rng rng(43);
  SUBCASE("fraction 0 is the identity") {
    CHECK(corrupt_depth_missing(d, 0.0, rng).data == d.data);
  }
  SUBCASE("fraction 1 kills everything") {
    const DepthImage out = corrupt_depth_missing(d, 1.0, rng);
    CHECK(out.valid_count() == 0);
  }
  SUBCASE("exact count at fraction 0.4") {
    const DepthImage out = corrupt_depth_missing(d, 0.4, rng);
    CHECK(out.valid_count() == 6000);
  }
  SUBCASE("only valid pixels are affected; count stays exact with holes") {
    DepthImage holey = d;
    for (size_t i = 0; i < holey.data.size(); i += 3) holey.data[i] = 0.0;
    const size_t valid_before = holey.valid_count();
    const DepthImage out = corrupt_depth_missing(holey, 0.25, rng);
    CHECK(out.valid_count() ==
          valid_before - static_cast<size_t>(std::llround(0.25 * valid_before)));
  }
}

TEST_CASE("bilateral filter") {
  SUBCASE("constant image is unchanged") {
    DepthImage d(20, 20);
    for (double& v : d.data) v = 1.25;
    const DepthImage out = bilateral_filter(d, 2.0, 0.05, 3);
    for (double v : out.data) CHECK(v == doctest::Approx(1.25).epsilon(1e-12));
  }

  SUBCASE("isolated hole inside a constant region is filled") {
    DepthImage d(21, 21);
    for (double& v : d.data) v = 0.8;
    d.at(10, 10) = 0.0;
    const DepthImage out = bilateral_filter(d, 2.0, 0.05, 3);
    CHECK(out.at(10, 10) == doctest::Approx(0.8).epsilon(1e-12));
  }

  SUBCASE("mostly-invalid neighborhood stays invalid") {
    DepthImage d(21, 21);  // all invalid except a lone corner patch
    d.at(0, 0) = 1.0;
    const DepthImage out = bilateral_filter(d, 2.0, 0.05, 3);
    CHECK(out.at(10, 10) == 0.0);
  }

  SUBCASE("step edge moves less than 1 mm") {
    DepthImage d(20, 20);
    for (int r = 0; r < 20; ++r)
      for (int c = 0; c < 20; ++c) d.at(r, c) = c < 10 ? 1.0 : 2.0;
    const DepthImage out = bilateral_filter(d, 2.0, 0.05, 2);
    for (int r = 0; r < 20; ++r)
      for (int c = 0; c < 20; ++c) CHECK(std::abs(out.at(r, c) - d.at(r, c)) <= 1e-3);
  }

  SUBCASE("matches a direct weighted-sum oracle on a 5x5 window") {
    Rng rng(47);
    DepthImage d(12, 12);
    for (double& v : d.data) v = rng.uniform(0.9, 1.1);
    const double ss = 1.5, sr = 0.08;
    const int radius = 2;
    const DepthImage out = bilateral_filter(d, ss, sr, radius);
    for (int r = 0; r < 12; ++r)
      for (int c = 0; c < 12; ++c) {
        double wsum = 0, vsum = 0;
        for (int dr = -radius; dr <= radius; ++dr)
          for (int dc = -radius; dc <= radius; ++dc) {
            const int rr = r + dr, cc = c + dc;
            if (rr < 0 || rr >= 12 || cc < 0 || cc >= 12) continue;
            const double w = std::exp(-(dr * dr + dc * dc) / (2 * ss * ss)) *
                             std::exp(-std::pow(d.at(rr, cc) - d.at(r, c), 2) / (2 * sr * sr));
            wsum += w;
            vsum += w * d.at(rr, cc);
          }
        CHECK(out.at(r, c) == doctest::Approx(vsum / wsum).epsilon(1e-12));
      }
  }
}

TEST_CASE("rgb augmentation") {
  Rng rng(53);
  RgbdImage img(16, 16);
  for (double& v : img.rgb) v = rng.uniform(0.1, 0.9);

  SUBCASE("all magnitudes zeroed gives the identity") {
    RgbAugmentParams p;  // defaults: no-op
    Rng r2(1);
    const RgbdImage out = apply_rgb_augment(img, p, r2);
    CHECK(out.rgb == img.rgb);
  }

  SUBCASE("output stays in [0,1]") {
    for (int i = 0; i < 20; ++i) {
      const RgbdImage out = augment_rgb(img, RgbAugmentConfig{}, rng);
      for (double v : out.rgb) {
        CHECK(v >= 0.0);
        CHECK(v <= 1.0);
      }
    }
  }

  SUBCASE("hsv round trip with zero shift is exact") {
    RgbAugmentParams p;
    p.hue_shift = 1e-18;  // forces the HSV path with a negligible shift
    Rng r2(1);
    const RgbdImage out = apply_rgb_augment(img, p, r2);
    for (size_t i = 0; i < img.rgb.size(); ++i)
      CHECK(out.rgb[i] == doctest::Approx(img.rgb[i]).epsilon(1e-9));
  }

  SUBCASE("impulse blur matches a dense convolution oracle") {
    RgbdImage impulse(33, 33);
    impulse.rgb_at(16, 16, 0) = 1.0;
    impulse.rgb_at(16, 16, 1) = 1.0;
    impulse.rgb_at(16, 16, 2) = 1.0;
    RgbAugmentParams p;
    p.blur_sigma = 1.0;
    Rng r2(1);
    const RgbdImage out = apply_rgb_augment(impulse, p, r2);

    // Dense 2D Gaussian kernel, radius 3 sigma, normalized.
    const int radius = 3;
    double kernel[7][7], sum = 0;
    for (int a = -radius; a <= radius; ++a)
      for (int b = -radius; b <= radius; ++b) {
        kernel[a + radius][b + radius] = std::exp(-(a * a + b * b) / 2.0);
        sum += kernel[a + radius][b + radius];
      }
    for (auto& row : kernel)
      for (double& v : row) v /= sum;

    for (int r = 10; r <= 22; ++r)
      for (int c = 10; c <= 22; ++c) {
        const int dr = r - 16, dc = c - 16;
        const double expect =
            (std::abs(dr) <= radius && std::abs(dc) <= radius) ? kernel[dr + radius][dc + radius]
                                                               : 0.0;
        CHECK(std::abs(out.rgb_at(r, c, 0) - expect) <= 1e-6);
      }
  }
}

TEST_CASE("generate_pair") {
  const TriangleMesh mesh = make_box(0.08, 0.1, 0.06);
  const CameraIntrinsics k{300, 300, 128, 96, 256, 192};
  SynthConfig cfg;
  cfg.out_size = 44;

  SUBCASE("zero twist with augmentation off yields identical crops") {
    Rng rng(59);
    Pose t_true;
    t_true.rotation = exp_so3({0.2, 0.1, -0.3});
    t_true.translation = {0.02, -0.01, 0.8};
    SynthConfig clean = cfg;
    clean.augment = false;
    const TrainingPair pair = generate_pair_at(mesh, k, t_true, Twist{}, clean, rng);
    CHECK(norm(pair.gt_twist) == 0.0);
    CHECK(pair.img_prev.rgb == pair.img_cur.rgb);
    CHECK(pair.img_prev.depth.data == pair.img_cur.depth.data);
  }

  SUBCASE("emitted pairs satisfy the pose-composition invariant") {
    Rng rng(61);
    for (int i = 0; i < 50; ++i) {
      Rng pair_rng = rng.split(i);
      // Reconstruct the sampled poses through the library path.
      const TrainingPair pair = generate_pair(mesh, k, cfg, pair_rng);
      CHECK(finite(pair.gt_twist.t));
      CHECK(finite(pair.gt_twist.w));
      CHECK(pair.img_prev.width == 44);
      CHECK(pair.img_cur.width == 44);
      // The previous-frame render is clean: every valid depth pixel of the
      // crop belongs to the object, so its median sits near the pose depth.
      const double med = median_valid_depth(pair.img_prev.depth);
      CHECK(med > 0.3);
      CHECK(med < 1.5);
    }
  }

  SUBCASE("pose composition closure holds by construction") {
    Rng rng(67);
    Pose t_true;
    t_true.rotation = exp_so3({-0.1, 0.25, 0.05});
    t_true.translation = {0.01, 0.015, 0.75};
    for (int i = 0; i < 100; ++i) {
      const Twist gt = sample_perturbation(cfg.perturb, rng);
      const Pose t_prev = compose(inverse(exp_se3(gt)), t_true);
      CHECK(pose_distance(apply_update(t_prev, gt), t_true) <= 1e-9);
    }
  }

  SUBCASE("mean twist magnitude matches the half-normal expectation") {
    Rng rng(71);
    double sum_t = 0;
    const int n = 1000;
    for (int i = 0; i < n; ++i) {
      Rng pair_rng = rng.split(i);
      const TrainingPair pair = generate_pair(mesh, k, cfg, pair_rng);
      sum_t += norm(pair.gt_twist.t);
    }
    CHECK(sum_t / n == doctest::Approx(0.02 * std::sqrt(2.0 / M_PI)).epsilon(0.05));
  }

  SUBCASE("deterministic for a fixed stream") {
    Rng r1(73), r2(73);
    const TrainingPair a = generate_pair(mesh, k, cfg, r1);
    const TrainingPair b = generate_pair(mesh, k, cfg, r2);
    CHECK(a.img_prev.rgb == b.img_prev.rgb);
    CHECK(a.img_cur.rgb == b.img_cur.rgb);
    CHECK(a.img_cur.depth.data == b.img_cur.depth.data);
    CHECK(norm(a.gt_twist.t - b.gt_twist.t) == 0.0);
  }

  SUBCASE("impossible configurations raise after bounded attempts") {
    Rng rng(79);
    CameraIntrinsics tiny{3000, 3000, 8, 8, 16, 16};  // object never fits
    CHECK_THROWS_AS(generate_pair(mesh, tiny, cfg, rng), std::runtime_error);
  }
}
