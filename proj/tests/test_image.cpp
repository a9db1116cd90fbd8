#include <random>

#include "doctest.h"
#include "gecm/image.hpp"
#include "oracles.hpp"

using namespace gecm;

TEST_CASE("quantile matches the sort oracle for sizes 1..1000") {
  std::mt19937 rng(11);
  std::normal_distribution<double> x(0.0, 3.0);
  const double ps[] = {0.0, 0.01, 0.02, 0.1, 0.25, 0.5, 0.9, 0.97, 0.98, 0.99, 1.0};
  for (int n = 1; n <= 1000; ++n) {
    std::vector<double> v(n);
    for (auto& e : v) e = n % 3 == 0 ? std::round(x(rng)) : x(rng);
    for (double p : ps) REQUIRE(quantile(v, p) == oracle::quantile(v, p));
  }
}

TEST_CASE("quantile closed forms") {
  CHECK(quantile({5.0}, 0.3) == 5.0);
  CHECK(quantile({0, 1, 2, 3, 4}, 0.5) == 2.0);
  CHECK(quantile({0, 10}, 0.25) == 2.5);
  CHECK(quantile({3, 1, 2}, 1.0) == 3.0);
  CHECK_THROWS(quantile({}, 0.5));
}

TEST_CASE("Otsu matches exhaustive search on random histograms") {
  std::mt19937 rng(3);
  std::uniform_int_distribution<int> levels(1, 12), val(0, 255), cnt(0, 40);
  for (int trial = 0; trial < 2000; ++trial) {
    Histogram256 h{};
    const int k = levels(rng);
    for (int i = 0; i < k; ++i) h[val(rng)] += cnt(rng);
    if (trial % 5 == 0) {  // symmetric layouts produce exact ties
      const int a = val(rng) % 100, c = cnt(rng) + 1;
      h = {};
      h[a] = c;
      h[a + 50] = c;
      h[a + 100] = c;
    }
    REQUIRE(otsu_threshold(h) == oracle::otsu(h));
  }
}

TEST_CASE("Otsu on images and degenerate histograms") {
  ByteImage img = ByteImage::Constant(16, 16, 10);
  CHECK_FALSE(otsu_threshold(histogram(img)).has_value());
  img.block(4, 4, 8, 8) = 200;
  const auto t = otsu_threshold(histogram(img));
  REQUIRE(t.has_value());
  CHECK(*t >= 10);
  CHECK(*t < 200);
  CHECK(otsu_threshold(histogram(img)) == oracle::otsu(histogram(img)));
  Histogram256 empty{};
  CHECK_FALSE(otsu_threshold(empty).has_value());
}

TEST_CASE("Gaussian blur preserves constants and mass") {
  GrayImage c = GrayImage::Constant(20, 30, 0.25);
  CHECK((gaussian_blur(c, 1.5) - 0.25).abs().maxCoeff() < 1e-14);
  GrayImage d = GrayImage::Zero(41, 41);
  d(20, 20) = 1.0;
  const GrayImage b = gaussian_blur(d, 2.0);
  CHECK(b.sum() == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(b(20, 20) == b.maxCoeff());
  CHECK(b(20, 17) == doctest::Approx(b(20, 23)).epsilon(1e-14));
  CHECK(b(17, 20) == doctest::Approx(b(20, 17)).epsilon(1e-14));
}

TEST_CASE("grey dilation is a 3x3 max") {
  GrayImage g = GrayImage::Zero(5, 5);
  g(0, 0) = 2.0;
  g(2, 3) = 1.0;
  const GrayImage d = grey_dilate3x3(g);
  CHECK(d(1, 1) == 2.0);
  CHECK(d(0, 1) == 2.0);
  CHECK(d(2, 2) == 1.0);
  CHECK(d(3, 4) == 1.0);
  CHECK(d(4, 0) == 0.0);
}

TEST_CASE("to_bytes rounds half up") {
  GrayImage g(1, 4);
  g << 0.0, 0.5 / 255.0, 1.0, 0.999;
  const ByteImage b = to_bytes(g);
  CHECK(b(0, 0) == 0);
  CHECK(b(0, 1) == 1);
  CHECK(b(0, 2) == 255);
  CHECK(b(0, 3) == 255);
}

TEST_CASE("CLAHE keeps a flat image flat and stretches a ramp") {
  const ByteImage flat = ByteImage::Constant(64, 64, 77);
  const ByteImage f = clahe(flat);
  CHECK(f.minCoeff() == f.maxCoeff());
  ByteImage ramp(64, 64);
  for (int y = 0; y < 64; ++y)
    for (int x = 0; x < 64; ++x) ramp(y, x) = static_cast<std::uint8_t>(100 + x / 4);
  const ByteImage r = clahe(ramp);
  CHECK(int(r.maxCoeff()) - int(r.minCoeff()) > int(ramp.maxCoeff()) - int(ramp.minCoeff()));
  for (int y = 0; y < 64; ++y)
    for (int x = 1; x < 64; ++x) CHECK(r(y, x) >= r(y, x - 1) - 1);
}

TEST_CASE("structuring elements and morphology") {
  CHECK(cross3().size() == 5);
  CHECK(disc(2).size() == 21);
  BinaryMask m = BinaryMask::Zero(9, 9);
  m(4, 4) = 1;
  CHECK(dilate(m, cross3()).cast<int>().sum() == 5);
  CHECK(dilate(m, disc(2)).cast<int>().sum() == 21);
  CHECK(erode(dilate(m, cross3()), cross3()).cast<int>().sum() == 1);
  CHECK(open(m, cross3()).cast<int>().sum() == 0);
  BinaryMask sq = BinaryMask::Zero(9, 9);
  sq.block(2, 2, 5, 5) = 1;
  CHECK(open(sq, cross3()).cast<int>().sum() == 21);  // corners are shaved
}

TEST_CASE("8-connected components in raster order") {
  BinaryMask m = BinaryMask::Zero(6, 6);
  m(0, 0) = 1;
  m(1, 1) = 1;  // diagonal neighbour joins
  m(4, 4) = 1;
  m(4, 5) = 1;
  m(5, 4) = 1;
  const Components c = connected_components(m);
  REQUIRE(c.components.size() == 2);
  CHECK(c.components[0].area == 2);
  CHECK(c.components[0].centroid.isApprox(Vec2(0.5, 0.5)));
  CHECK(c.components[1].area == 3);
  CHECK(c.labels(0, 0) == 1);
  CHECK(c.labels(5, 4) == 2);
  CHECK(c.labels(3, 3) == 0);
}
