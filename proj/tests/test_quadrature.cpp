#include <doctest.h>

#include <cmath>
#include <vector>

#include "hcpinn/quadrature.hpp"

namespace {

// Independent root oracle: bisection on P_n evaluated by the recurrence.
double legendre(int n, double x) {
  double p0 = 1.0, p1 = 0.0;
  for (int j = 0; j < n; ++j) {
    const double p2 = p1;
    p1 = p0;
    p0 = ((2.0 * j + 1.0) * x * p1 - j * p2) / (j + 1.0);
  }
  return p0;
}

double bisect_root(int n, double lo, double hi) {
  double flo = legendre(n, lo);
  for (int i = 0; i < 200; ++i) {
    const double mid = 0.5 * (lo + hi);
    const double fm = legendre(n, mid);
    if ((flo < 0) == (fm < 0)) {
      lo = mid;
      flo = fm;
    } else {
      hi = mid;
    }
  }
  return 0.5 * (lo + hi);
}

}  // namespace

TEST_CASE("single-point rule is the midpoint") {
  auto r = hcpinn::gauss_legendre_segment(1, 0.0, 1.0);
  CHECK(r.nodes[0] == doctest::Approx(0.5).epsilon(1e-15));
  CHECK(r.weights[0] == doctest::Approx(1.0).epsilon(1e-15));
}

TEST_CASE("two-point nodes are +-1/sqrt(3)") {
  auto r = hcpinn::gauss_legendre(2);
  const double c = 1.0 / std::sqrt(3.0);
  CHECK(r.nodes[0] == doctest::Approx(-c).epsilon(1e-14));
  CHECK(r.nodes[1] == doctest::Approx(c).epsilon(1e-14));
}

TEST_CASE("order-8 nodes match a bisection oracle and are symmetric") {
  auto r = hcpinn::gauss_legendre(8);
  // Roots bracketed by the Chebyshev estimates around each node.
  for (int i = 0; i < 8; ++i) {
    const double guess = r.nodes[static_cast<std::size_t>(i)];
    const double root = bisect_root(8, guess - 1e-2, guess + 1e-2);
    CHECK(guess == doctest::Approx(root).epsilon(1e-12));
  }
  for (int i = 0; i < 4; ++i) {
    CHECK(r.nodes[static_cast<std::size_t>(i)] ==
          doctest::Approx(-r.nodes[static_cast<std::size_t>(7 - i)]).epsilon(1e-14));
    CHECK(r.weights[static_cast<std::size_t>(i)] ==
          doctest::Approx(r.weights[static_cast<std::size_t>(7 - i)]).epsilon(1e-14));
  }
}

TEST_CASE("rule integrates polynomials up to degree 2n-1 exactly") {
  // n = 4 integrates x^7 over [0, 1] -> 1/8.
  auto r = hcpinn::gauss_legendre_segment(4, 0.0, 1.0);
  double acc = 0.0;
  for (std::size_t i = 0; i < r.nodes.size(); ++i)
    acc += r.weights[i] * std::pow(r.nodes[i], 7);
  CHECK(acc == doctest::Approx(1.0 / 8.0).epsilon(1e-13));
}

TEST_CASE("weights sum to the segment length") {
  auto r = hcpinn::gauss_legendre_segment(8, 0.25, 0.75);
  double s = 0.0;
  for (double w : r.weights) s += w;
  CHECK(s == doctest::Approx(0.5).epsilon(1e-13));
}
