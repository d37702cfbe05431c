#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "infervar/error.hpp"
#include "infervar/metrics.hpp"
#include "oracles.hpp"

namespace infervar {
namespace {

UncertaintyMap umap(const ImageTensor& v) { return UncertaintyMap{v, ImageTensor(v.shape()), 8}; }
ErrorMap emap(const ImageTensor& e) { return ErrorMap{e, LossKind::l1}; }
ImageTensor grid(std::size_t h, std::size_t w, std::vector<double> v) { return ImageTensor(Shape{h, w, 1}, std::move(v)); }

TEST(ErrorMap, L1L2AndChannelAverage) {
  ImageTensor pred(Shape{1, 1, 2}, std::vector<double>{1.0, 0.0});
  ImageTensor y(Shape{1, 1, 2}, std::vector<double>{0.0, 3.0});
  EXPECT_EQ(error_map(pred, y, LossKind::l1).values.at(0, 0), 2.0);
  EXPECT_EQ(error_map(pred, y, LossKind::l2).values.at(0, 0), 5.0);
  EXPECT_THROW(error_map(pred, ImageTensor(Shape{1, 1, 1}), LossKind::l1), ValidationError);
  EXPECT_EQ(parse_loss("L2"), LossKind::l2);
  EXPECT_THROW(parse_loss("huber"), ValidationError);
}

TEST(Pearson, HandValue) {
  const std::vector<double> x{1, 2, 3, 4}, y{1, 3, 2, 4};
  EXPECT_NEAR(*pearson(x, y), 0.8, 1e-15);
}

TEST(Pearson, PerfectAndUndefinedAndErrors) {
  const std::vector<double> x{1, 2, 3}, neg{3, 2, 1}, flat{5, 5, 5};
  EXPECT_DOUBLE_EQ(*pearson(x, x), 1.0);
  EXPECT_DOUBLE_EQ(*pearson(x, neg), -1.0);
  EXPECT_FALSE(pearson(x, flat).has_value());
  EXPECT_THROW(pearson(x, std::vector<double>{1, 2}), ValidationError);
  EXPECT_THROW(pearson(std::vector<double>{1}, std::vector<double>{1}), ValidationError);
}

TEST(Pearson, AffineInvarianceAndDirectOracle) {
  for (std::uint64_t s = 0; s < 20; ++s) {
    const ImageTensor a = oracle::random_tensor(Shape{10, 10, 1}, s);
    const ImageTensor b = oracle::random_tensor(Shape{10, 10, 1}, s + 1000);
    std::vector<double> x(a.values().begin(), a.values().end()), y(b.values().begin(), b.values().end());
    const double r = *pearson(x, y);
    EXPECT_NEAR(r, oracle::direct_pearson(x, y), 1e-12);
    std::vector<double> x2 = x;
    for (double& v : x2) v = 4.0 * v - 7.0;
    EXPECT_NEAR(*pearson(x2, y), r, 1e-12);
    for (double& v : x2) v = -v;
    EXPECT_NEAR(*pearson(x2, y), -r, 1e-12);
    EXPECT_NEAR(*pearson(y, x), r, 1e-15);
  }
}

TEST(Correlation, BlockHandExample) {
  const ImageTensor v = grid(2, 2, {1, 3, 5, 7}), l = grid(2, 2, {8, 6, 1, 3});
  SegmentationLabels labels{2, 2, {0, 0, 1, 1}, 2};
  EXPECT_NEAR(*block_correlation(umap(v), emap(l), labels), -1.0, 1e-15);
  EXPECT_FALSE(block_correlation(umap(v), emap(l), single_cluster_labels(2, 2)).has_value());
}

TEST(Correlation, PixelEqualsBlockWithSingletons) {
  for (std::uint64_t s = 0; s < 10; ++s) {
    const ImageTensor v = oracle::random_tensor(Shape{7, 9, 1}, s), e = oracle::random_tensor(Shape{7, 9, 1}, s + 50);
    const double px = *pixel_correlation(umap(v), emap(e));
    EXPECT_NEAR(*block_correlation(umap(v), emap(e), singleton_labels(7, 9)), px, 1e-12);
    EXPECT_NEAR(*patch_correlation(umap(v), emap(e), 7, 9), px, 1e-12);
  }
}

TEST(Correlation, PatchMatchesBruteForceOracle) {
  const std::size_t h = 25, w = 25, rows = 10, cols = 10;
  const ImageTensor v = oracle::random_tensor(Shape{h, w, 1}, 3), e = oracle::random_tensor(Shape{h, w, 1}, 4);
  // Patch (pr, pc) spans rows [2 pr, 2 pr + 2) except the last, which runs to the end.
  std::vector<double> vs(h * w), es(h * w);
  for (std::size_t i = 0; i < h; ++i)
    for (std::size_t j = 0; j < w; ++j) {
      const std::size_t r0 = std::min<std::size_t>(i / 2, rows - 1) * 2, c0 = std::min<std::size_t>(j / 2, cols - 1) * 2;
      const std::size_t r1 = r0 == 18 ? h : r0 + 2, c1 = c0 == 18 ? w : c0 + 2;
      double sv = 0, se = 0, n = 0;
      for (std::size_t a = r0; a < r1; ++a)
        for (std::size_t b = c0; b < c1; ++b) {
          sv += v.at(a, b);
          se += e.at(a, b);
          n += 1;
        }
      vs[i * w + j] = sv / n;
      es[i * w + j] = se / n;
    }
  EXPECT_NEAR(*patch_correlation(umap(v), emap(e), rows, cols), oracle::direct_pearson(vs, es), 1e-12);
  EXPECT_THROW(patch_correlation(umap(grid(2, 2, {1, 2, 3, 4})), emap(grid(2, 2, {1, 2, 3, 4}))), ValidationError);
}

TEST(Correlation, MeanAcrossImages) {
  std::vector<ImageMeans> m{{1.0, 2.0}, {2.0, 4.0}, {3.0, 5.0}};
  EXPECT_NEAR(*mean_correlation(m), oracle::direct_pearson({1, 2, 3}, {2, 4, 5}), 1e-15);
  EXPECT_THROW(mean_correlation(std::span<const ImageMeans>(m.data(), 1)), ValidationError);
  const ImageMeans im = image_means(umap(grid(1, 2, {1, 3})), emap(grid(1, 2, {0, 1})));
  EXPECT_EQ(im.mean_variance, 2.0);
  EXPECT_EQ(im.mean_error, 0.5);
}

TEST(Sparsification, HandCurveAndAuse) {
  const std::vector<double> err{4, 3, 2, 1}, u{1, 2, 3, 4}, f{0.0, 0.25, 0.5, 0.75};
  const auto c = sparsification(u, err, std::span<const double>(f));
  ASSERT_TRUE(c.has_value());
  const double method[] = {1.0, 1.2, 1.4, 1.6}, best[] = {1.0, 0.8, 0.6, 0.4};
  for (std::size_t i = 0; i < 4; ++i) {
    EXPECT_NEAR(c->method[i], method[i], 1e-15);
    EXPECT_NEAR(c->oracle[i], best[i], 1e-15);
  }
  EXPECT_NEAR(ause(*c), 0.45, 1e-15);
}

TEST(Sparsification, UniformUncertaintyRemovesInIndexOrder) {
  const std::vector<double> err{1, 2, 3, 4}, u{5, 5, 5, 5}, f{0.0, 0.25, 0.5, 0.75};
  const auto c = sparsification(u, err, std::span<const double>(f));
  const double method[] = {1.0, 1.2, 1.4, 1.6};
  for (std::size_t i = 0; i < 4; ++i) EXPECT_NEAR(c->method[i], method[i], 1e-15);
}

TEST(Sparsification, PerfectOrderingGivesZeroAuse) {
  const ImageTensor e = oracle::random_tensor(Shape{9, 9, 1}, 12);
  const auto c = sparsification(umap(e), emap(e));
  ASSERT_TRUE(c.has_value());
  EXPECT_EQ(c->fractions.size(), 50u);
  EXPECT_EQ(c->fractions.back(), 0.99);
  EXPECT_EQ(ause(*c), 0.0);
}

TEST(Sparsification, UndefinedAndInvalidInputs) {
  const std::vector<double> zero{0, 0, 0}, u{1, 2, 3};
  EXPECT_FALSE(sparsification(u, zero).has_value());
  EXPECT_THROW(sparsification(u, std::vector<double>{1, 2}), ValidationError);
  EXPECT_THROW(sparsification(u, std::vector<double>{1, -2, 3}), ValidationError);
  const std::vector<double> bad{0.0, 1.0};
  EXPECT_THROW(sparsification(u, u, std::span<const double>(bad)), ValidationError);
}

TEST(Sparsification, RemovalCount) {
  EXPECT_EQ(removal_count(0.0, 10), 0u);
  EXPECT_EQ(removal_count(0.25, 4), 1u);
  EXPECT_EQ(removal_count(0.26, 4), 2u);
  EXPECT_EQ(removal_count(0.99, 10), 9u);
  EXPECT_EQ(removal_count(0.99, 1000), 990u);
}

TEST(Sparsification, AuseNonNegativeAndMatchesBruteForce) {
  const std::vector<double> fr = oracle::default_fractions();
  for (std::uint64_t s = 0; s < 1000; ++s) {
    const ImageTensor u = oracle::random_tensor(Shape{1, 10, 1}, 2 * s), e = oracle::random_tensor(Shape{1, 10, 1}, 2 * s + 1);
    const auto c = sparsification(u.values(), e.values());
    ASSERT_TRUE(c.has_value());
    const double a = ause(*c);
    EXPECT_GE(a, -1e-15);
    if (s < 50) {
      std::vector<double> uv(u.values().begin(), u.values().end()), ev(e.values().begin(), e.values().end());
      EXPECT_NEAR(a, oracle::brute_force_ause(uv, ev, fr), 1e-12);
    }
  }
}

TEST(Nll, ClosedForms) {
  const ImageTensor y = oracle::random_tensor(Shape{3, 3, 1}, 1);
  UncertaintyMap u{ImageTensor(y.shape(), 1.0 / (2.0 * std::numbers::pi)), y, 8};
  EXPECT_NEAR(nll(u, y), 0.0, 1e-12);
  u.variance = ImageTensor(y.shape(), 1.0);
  EXPECT_NEAR(nll(u, y), 0.5 * std::log(2.0 * std::numbers::pi), 1e-12);
}

TEST(Nll, FloorAndDirectOracle) {
  const ImageTensor y = oracle::random_tensor(Shape{4, 5, 1}, 2), mu = oracle::random_tensor(Shape{4, 5, 1}, 3);
  ImageTensor var = oracle::random_tensor(Shape{4, 5, 1}, 4, 0.0, 0.1);
  var.values()[0] = 0.0;
  const UncertaintyMap u{var, mu, 8};
  auto vec = [](const ImageTensor& t) { return std::vector<double>(t.values().begin(), t.values().end()); };
  EXPECT_NEAR(nll(u, y, 1e-3), oracle::direct_nll(vec(mu), vec(var), vec(y), 1e-3), 1e-12);
  EXPECT_TRUE(std::isfinite(nll(u, y)));
  EXPECT_THROW(nll(u, y, 0.0), ValidationError);
  EXPECT_THROW(nll(u, ImageTensor(Shape{5, 4, 1})), ValidationError);
}

}  // namespace
}  // namespace infervar
