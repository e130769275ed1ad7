#include <doctest.h>

#include <cmath>
#include <cstring>
#include <random>
#include <vector>

#include "moranifs/kernels.hpp"

using namespace moran;

namespace {

std::vector<double> random_doubles(std::size_t n, double lo, double hi,
                                   unsigned seed) {
  std::mt19937_64 gen(seed);
  std::uniform_real_distribution<double> d(lo, hi);
  std::vector<double> v(n);
  for (auto& x : v) x = d(gen);
  return v;
}

}  // namespace

TEST_CASE("scale_offset: avx2 matches scalar bitwise") {
  if (!kernels::avx2_available()) return;
  auto x = random_doubles(1011, -5.0, 5.0, 42);
  std::vector<double> a(x.size()), b(x.size());
  kernels::scalar::scale_offset(x.data(), x.size(), 0.37, -1.25, a.data());
  kernels::avx2::scale_offset(x.data(), x.size(), 0.37, -1.25, b.data());
  CHECK(std::memcmp(a.data(), b.data(), a.size() * sizeof(double)) == 0);
}

TEST_CASE("scale_anchor_offset: avx2 matches scalar bitwise") {
  if (!kernels::avx2_available()) return;
  auto s = random_doubles(777, 0.0, 1.0, 1);
  auto t = random_doubles(777, -2.0, 2.0, 2);
  std::vector<double> a(s.size()), b(s.size());
  kernels::scalar::scale_anchor_offset(s.data(), t.data(), s.size(), 0.5,
                                       a.data());
  kernels::avx2::scale_anchor_offset(s.data(), t.data(), s.size(), 0.5,
                                     b.data());
  CHECK(std::memcmp(a.data(), b.data(), a.size() * sizeof(double)) == 0);
}

TEST_CASE("cell_keys: avx2 matches scalar bitwise") {
  if (!kernels::avx2_available()) return;
  auto x = random_doubles(2049, -100.0, 100.0, 7);
  std::vector<std::int64_t> a(x.size()), b(x.size());
  for (double inv : {1.0, 3.0, 1024.0, 1.0 / 3.0}) {
    kernels::scalar::cell_keys(x.data(), x.size(), -0.25, inv, a.data());
    kernels::avx2::cell_keys(x.data(), x.size(), -0.25, inv, b.data());
    CHECK(std::memcmp(a.data(), b.data(),
                      a.size() * sizeof(std::int64_t)) == 0);
  }
}

TEST_CASE("moran_mixed_sum: avx2 agrees with scalar to 1e-12 relative") {
  if (!kernels::avx2_available()) return;
  std::mt19937_64 gen(99);
  std::uniform_real_distribution<double> lr_d(-12.0, -0.05);
  std::uniform_int_distribution<int> n_d(1, 23);
  std::vector<double> lr, mult;
  std::vector<std::size_t> offsets{0};
  for (int layer = 0; layer < 300; ++layer) {
    int n = n_d(gen);
    for (int j = 0; j < n; ++j) {
      lr.push_back(lr_d(gen));
      mult.push_back(1.0 + (j % 5) * 100.0);
    }
    offsets.push_back(lr.size());
  }
  for (double s : {0.0, 0.3, 0.63, 1.0, 1.9}) {
    double a = kernels::scalar::moran_mixed_sum(s, lr.data(), mult.data(),
                                                offsets.data(),
                                                offsets.size() - 1);
    double b = kernels::avx2::moran_mixed_sum(s, lr.data(), mult.data(),
                                              offsets.data(),
                                              offsets.size() - 1);
    CHECK(std::abs(a - b) <= 1e-12 * (1.0 + std::abs(a)));
  }
}

TEST_CASE("moran_mixed_sum: deep ratios do not underflow") {
  // One layer with log-ratios around -2000: the raw powers underflow doubles
  // but the max-subtracted reduction must survive.
  std::vector<double> lr{-2000.0, -2000.5};
  std::vector<double> mult{1.0, 1.0};
  std::vector<std::size_t> offsets{0, 2};
  double want = -2000.0 + std::log(1.0 + std::exp(-0.5));
  double got = kernels::scalar::moran_mixed_sum(1.0, lr.data(), mult.data(),
                                                offsets.data(), 1);
  CHECK(got == doctest::Approx(want).epsilon(1e-14));
}

TEST_CASE("vector exp accuracy across the full negative range") {
  if (!kernels::avx2_available()) return;
  std::mt19937_64 gen(3);
  std::uniform_real_distribution<double> d(-700.0, 0.0);
  std::vector<double> lr(4096);
  for (auto& x : lr) x = d(gen);
  std::vector<double> mult(lr.size(), 1.0);
  std::vector<std::size_t> offsets{0, lr.size()};
  double a = kernels::scalar::moran_mixed_sum(1.0, lr.data(), mult.data(),
                                              offsets.data(), 1);
  double b = kernels::avx2::moran_mixed_sum(1.0, lr.data(), mult.data(),
                                            offsets.data(), 1);
  CHECK(std::abs(a - b) <= 1e-13 * (1.0 + std::abs(a)));
}

TEST_CASE("backend dispatch honors set_backend") {
  kernels::set_backend(kernels::Backend::Scalar);
  CHECK(kernels::active_backend() == kernels::Backend::Scalar);
  kernels::set_backend(kernels::Backend::Auto);
  if (kernels::avx2_available()) {
    CHECK(kernels::active_backend() == kernels::Backend::Avx2);
  } else {
    CHECK(kernels::active_backend() == kernels::Backend::Scalar);
    CHECK_THROWS(kernels::set_backend(kernels::Backend::Avx2));
  }
}
