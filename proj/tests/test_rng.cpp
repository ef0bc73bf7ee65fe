#include <doctest.h>

#include <cmath>

#include "hcpinn/rng.hpp"

TEST_CASE("same seed reproduces the stream bitwise") {
  hcpinn::Rng a(42), b(42);
  for (int i = 0; i < 1000; ++i) CHECK(a.next_u64() == b.next_u64());
}

TEST_CASE("different seeds diverge") {
  hcpinn::Rng a(1), b(2);
  int same = 0;
  for (int i = 0; i < 100; ++i)
    if (a.next_u64() == b.next_u64()) ++same;
  CHECK(same == 0);
}

TEST_CASE("uniform stays in range with a sane mean") {
  hcpinn::Rng rng(7);
  double sum = 0.0;
  const int n = 20000;
  for (int i = 0; i < n; ++i) {
    const double u = rng.uniform();
    CHECK(u >= 0.0);
    CHECK(u < 1.0);
    sum += u;
  }
  CHECK(sum / n == doctest::Approx(0.5).epsilon(0.02));
}

TEST_CASE("normal draws have the requested spread") {
  hcpinn::Rng rng(123);
  const double sigma = 0.1;
  double s1 = 0.0, s2 = 0.0;
  const int n = 50000;
  for (int i = 0; i < n; ++i) {
    const double x = rng.normal(sigma);
    s1 += x;
    s2 += x * x;
  }
  const double mean = s1 / n;
  const double var = s2 / n - mean * mean;
  CHECK(mean == doctest::Approx(0.0).epsilon(1.0));  // abs check below
  CHECK(std::abs(mean) < 3.0 * sigma / std::sqrt(static_cast<double>(n)) * 3);
  CHECK(std::sqrt(var) == doctest::Approx(sigma).epsilon(0.03));
}
