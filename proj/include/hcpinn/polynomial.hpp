#pragma once

// Dense univariate polynomials in the monomial basis. Used for the window
// shape functions and the 1D buffer corrections; degrees stay below ten, so
// the monomial basis is unproblematic.

#include <cstddef>
#include <vector>

#include "jet.hpp"

namespace hcpinn {

class Polynomial {
 public:
  Polynomial() = default;
  explicit Polynomial(std::vector<double> coeffs) : c_(std::move(coeffs)) {
    if (c_.empty()) c_.push_back(0.0);
  }

  const std::vector<double>& coeffs() const { return c_; }
  std::size_t degree() const { return c_.size() - 1; }

  double operator()(double x) const {
    double acc = 0.0;
    for (std::size_t i = c_.size(); i-- > 0;) acc = acc * x + c_[i];
    return acc;
  }

  // Horner in jet arithmetic; coefficients are constants, so with S = Rev
  // and a constant argument this records nothing on the tape.
  template <class S>
  ad::Jet2<S> eval(const ad::Jet2<S>& x) const {
    ad::Jet2<S> acc = ad::jet_const(S(0.0));
    for (std::size_t i = c_.size(); i-- > 0;) acc = acc * x + S(c_[i]);
    return acc;
  }

  Polynomial derivative() const {
    if (c_.size() == 1) return Polynomial({0.0});
    std::vector<double> d(c_.size() - 1);
    for (std::size_t i = 1; i < c_.size(); ++i)
      d[i - 1] = static_cast<double>(i) * c_[i];
    return Polynomial(std::move(d));
  }

  // n-th derivative evaluated at x.
  double derivative_at(double x, int order) const {
    Polynomial p = *this;
    for (int k = 0; k < order; ++k) p = p.derivative();
    return p(x);
  }

 private:
  std::vector<double> c_;
};

}  // namespace hcpinn
