#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <numeric>

#include "roiqubo/classical.hpp"
#include "roiqubo/phantom.hpp"

using namespace roiqubo;

namespace {

// Pixel-center sampled disk of radius `radius` and value `mu`.
Image disk_image(std::size_t n, double radius, double mu) {
  Image img(n, n);
  const double h = 0.5 * static_cast<double>(n);
  for (std::size_t r = 0; r < n; ++r)
    for (std::size_t c = 0; c < n; ++c) {
      const double x = c + 0.5 - h, y = r + 0.5 - h;
      if (x * x + y * y <= radius * radius) img(r, c) = mu;
    }
  return img;
}

// Closed-form parallel projection of a centered disk: 2 mu sqrt(R^2 - s^2).
Sinogram disk_sinogram(const ProjectionGeometry& g, double radius, double mu) {
  Sinogram s(g.n_angles(), g.n_detectors);
  for (std::size_t a = 0; a < g.n_angles(); ++a)
    for (std::size_t d = 0; d < g.n_detectors; ++d) {
      const double off = g.detector_offset(d);
      s(a, d) = std::abs(off) < radius ? 2.0 * mu * std::sqrt(radius * radius - off * off) : 0.0;
    }
  return s;
}

double rmse(const Image& a, const Image& b) {
  double acc = 0;
  for (std::size_t k = 0; k < a.size(); ++k) acc += std::pow(a.values()[k] - b.values()[k], 2);
  return std::sqrt(acc / static_cast<double>(a.size()));
}

double norm(const Sinogram& s) {
  double acc = 0;
  for (double v : s.values()) acc += v * v;
  return std::sqrt(acc);
}

Sinogram minus(const Sinogram& a, const Sinogram& b) {
  Sinogram out = a;
  for (std::size_t k = 0; k < out.size(); ++k) out.values()[k] -= b.values()[k];
  return out;
}

}  // namespace

TEST(Fbp, ZeroSinogramGivesZeroImage) {
  auto g = build_geometry(30, std::nullopt, 16);
  auto img = fbp(Sinogram(30, g.n_detectors), g, 16, 16);
  for (double v : img.values()) EXPECT_EQ(v, 0.0);
}

TEST(Fbp, UniformDiskInteriorMean) {
  const std::size_t n = 64;
  const double radius = 20.0, mu = 1.0;
  auto g = build_geometry(180, std::nullopt, n);
  auto img = fbp(disk_sinogram(g, radius, mu), g, n, n);
  double acc = 0;
  std::size_t count = 0;
  for (std::size_t r = 0; r < n; ++r)
    for (std::size_t c = 0; c < n; ++c) {
      const double x = c + 0.5 - 32.0, y = r + 0.5 - 32.0;
      if (std::hypot(x, y) < 0.8 * radius) {
        acc += img(r, c);
        ++count;
      }
    }
  const double mean = acc / static_cast<double>(count);
  EXPECT_LE(std::abs(mean - mu) / mu, 0.05) << "interior mean " << mean;
}

TEST(Fbp, FewerViewsAreNoBetter) {
  const std::size_t n = 64;
  const auto truth = disk_image(n, 20.0, 1.0);
  auto g60 = build_geometry(60, std::nullopt, n), g180 = build_geometry(180, std::nullopt, n);
  const double e60 = rmse(fbp(disk_sinogram(g60, 20.0, 1.0), g60, n, n), truth);
  const double e180 = rmse(fbp(disk_sinogram(g180, 20.0, 1.0), g180, n, n), truth);
  EXPECT_GE(e60, e180);
}

TEST(Fbp, KeepsNegativeOvershoot) {
  PhantomSpec spec;
  spec.seed = 3;
  auto truth = generate_phantom(spec);
  auto g = build_geometry(30, std::nullopt, spec.size);
  auto img = fbp(forward_project(truth, build_system_matrix(g, spec.size, spec.size)), g, spec.size, spec.size);
  double lo = 0;
  for (double v : img.values()) lo = std::min(lo, v);
  EXPECT_LT(lo, 0.0);
}

TEST(Fbp, DimensionMismatchRejected) {
  auto g = build_geometry(10, std::nullopt, 8);
  EXPECT_THROW(fbp(Sinogram(9, g.n_detectors), g, 8, 8), invalid_argument);
}

TEST(Sart, ZeroSinogramGivesZeroImage) {
  auto g = build_geometry(12, std::nullopt, 8);
  auto m = build_system_matrix(g, 8, 8);
  auto img = sart(Sinogram(12, g.n_detectors), m);
  for (double v : img.values()) EXPECT_EQ(v, 0.0);
}

TEST(Sart, MoreIterationsReduceResidual) {
  PhantomSpec spec;
  spec.seed = 10;
  auto truth = generate_phantom(spec);
  auto g = build_geometry(30, std::nullopt, spec.size);
  auto m = build_system_matrix(g, spec.size, spec.size);
  auto p = forward_project(truth, m);
  auto r1 = norm(minus(p, forward_project(sart(p, m, {1, 1.0}), m)));
  auto r10 = norm(minus(p, forward_project(sart(p, m, {10, 1.0}), m)));
  EXPECT_LT(r10, r1);
}

TEST(Sart, InterleavedOrderExamples) {
  EXPECT_EQ(interleaved_order(1), (std::vector<std::size_t>{0}));
  EXPECT_EQ(interleaved_order(5), (std::vector<std::size_t>{0, 4, 2, 1, 3}));
  EXPECT_EQ(interleaved_order(8), (std::vector<std::size_t>{0, 4, 2, 6, 1, 5, 3, 7}));
  for (std::size_t n = 1; n <= 200; ++n) {
    auto o = interleaved_order(n);
    std::sort(o.begin(), o.end());
    std::vector<std::size_t> expected(n);
    std::iota(expected.begin(), expected.end(), std::size_t{0});
    EXPECT_EQ(o, expected) << n;
  }
}

TEST(Sart, ViewOrderChangesIteratesNotFixedPoint) {
  PhantomSpec spec;
  spec.size = 16;
  spec.roi = {6, 6, 4, 4};
  auto truth = generate_phantom(spec);
  auto g = build_geometry(12, std::nullopt, spec.size);
  auto m = build_system_matrix(g, spec.size, spec.size);
  auto p = forward_project(truth, m);
  auto a = sart(p, m, {3, 1.0, SartOrder::interleaved});
  auto b = sart(p, m, {3, 1.0, SartOrder::sequential});
  EXPECT_NE(a, b);
  // a single view has one order, so both agree exactly
  auto g1 = build_geometry(1, std::nullopt, spec.size);
  auto m1 = build_system_matrix(g1, spec.size, spec.size);
  auto p1 = forward_project(truth, m1);
  EXPECT_EQ(sart(p1, m1, {2, 1.0, SartOrder::interleaved}), sart(p1, m1, {2, 1.0, SartOrder::sequential}));
}

TEST(Classical, MoreViewsLowerMeanRmse) {
  double fbp60 = 0, fbp180 = 0, sart60 = 0, sart180 = 0;
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    PhantomSpec spec;
    spec.seed = seed;
    auto truth = generate_phantom(spec);
    for (std::size_t views : {60u, 180u}) {
      auto g = build_geometry(views, std::nullopt, spec.size);
      auto m = build_system_matrix(g, spec.size, spec.size);
      auto p = forward_project(truth, m);
      (views == 60 ? fbp60 : fbp180) += rmse(fbp(p, g, spec.size, spec.size), truth);
      (views == 60 ? sart60 : sart180) += rmse(sart(p, m), truth);
    }
  }
  EXPECT_GE(fbp60, fbp180);
  EXPECT_GE(sart60, sart180);
}

TEST(Sart, ResidualNonIncreasingOverFirstSweeps) {
  for (std::uint64_t seed : {1u, 2u, 3u}) {
    PhantomSpec spec;
    spec.seed = seed;
    auto truth = generate_phantom(spec);
    auto g = build_geometry(30, std::nullopt, spec.size);
    auto m = build_system_matrix(g, spec.size, spec.size);
    auto p = forward_project(truth, m);
    for (auto order : {SartOrder::interleaved, SartOrder::sequential}) {
      double prev = norm(p);
      for (std::size_t it = 1; it <= 5; ++it) {
        const double cur = norm(minus(p, forward_project(sart(p, m, {it, 1.0, order}), m)));
        EXPECT_LE(cur, prev + 1e-9) << "sweep " << it << " order " << to_string(order);
        prev = cur;
      }
    }
  }
}

TEST(Sart, SinglePixelPeak) {
  const std::size_t n = 16;
  Image truth(n, n);
  truth(7, 9) = 1.0;
  auto g = build_geometry(30, std::nullopt, n);
  auto m = build_system_matrix(g, n, n);
  auto img = sart(forward_project(truth, m), m, {20, 1.0});
  EXPECT_NEAR(img(7, 9), 1.0, 0.1);
}

TEST(Sart, InvalidConfigRejected) {
  auto g = build_geometry(4, std::nullopt, 4);
  auto m = build_system_matrix(g, 4, 4);
  Sinogram s(4, g.n_detectors);
  EXPECT_THROW(sart(s, m, {0, 1.0}), invalid_argument);
  EXPECT_THROW(sart(s, m, {5, 2.5}), invalid_argument);
  EXPECT_THROW(sart(s, m, {5, 0.0}), invalid_argument);
}

TEST(UpsampleSmooth, IdentityWhenSameSizeAndNoSmoothing) {
  auto img = generate_phantom(PhantomSpec{});
  EXPECT_EQ(upsample_and_smooth(img, img.width(), img.height(), 0.0), img);
}

TEST(UpsampleSmooth, ConstantPreserved) {
  Image img(5, 3, 0.7);
  for (double sigma : {0.0, 0.5, 1.0, 2.5}) {
    auto out = upsample_and_smooth(img, 11, 8, sigma);
    for (double v : out.values()) EXPECT_NEAR(v, 0.7, 1e-15);
  }
}

TEST(UpsampleSmooth, BilinearCornerPattern) {
  // Destination pixel centers map to source coordinates -0.25, 0.25, 0.75,
  // 1.25 (clamped to [0, 1]); the top-left weight per axis is 1, .75, .25, 0.
  Image img(2, 2);
  img(0, 0) = 1.0;
  auto out = upsample_and_smooth(img, 4, 4, 0.0);
  const double w[4] = {1.0, 0.75, 0.25, 0.0};
  for (std::size_t r = 0; r < 4; ++r)
    for (std::size_t c = 0; c < 4; ++c) EXPECT_DOUBLE_EQ(out(r, c), w[r] * w[c]);
}

TEST(UpsampleSmooth, SmoothingSpreadsMassSymmetrically) {
  // every kernel touching the impulse fits inside 15x15, so mass is kept
  Image img(15, 15);
  img(7, 7) = 1.0;
  auto out = upsample_and_smooth(img, 15, 15, 1.0);
  EXPECT_LT(out(7, 7), 1.0);
  EXPECT_NEAR(out(6, 7), out(8, 7), 1e-15);
  EXPECT_NEAR(out(7, 6), out(6, 7), 1e-15);
  double sum = 0;
  for (double v : out.values()) sum += v;
  EXPECT_NEAR(sum, 1.0, 1e-12);
}

TEST(UpsampleSmooth, SmallerTargetRejected) {
  EXPECT_THROW(upsample_and_smooth(Image(4, 4), 3, 4, 0.0), invalid_argument);
  EXPECT_THROW(upsample_and_smooth(Image(4, 4), 4, 4, -1.0), invalid_argument);
}

TEST(ClipNegative, ZeroesOnlyNegatives) {
  Image img(3, 1, std::vector<double>{-0.4, 0.0, 0.3});
  EXPECT_EQ(clip_negative(img), Image(3, 1, std::vector<double>{0.0, 0.0, 0.3}));
}
