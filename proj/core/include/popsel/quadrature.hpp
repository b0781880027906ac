#pragma once

#include <boost/math/quadrature/gauss_kronrod.hpp>

namespace popsel {

// Adaptive Gauss-Kronrod (15-point) integration. Tolerance is the target
// for the internal error estimate; for the O(1)-magnitude density
// integrals in this library the default behaves as an absolute tolerance
// of ~1e-12. Infinite endpoints are allowed (boost substitutes tanh-sinh
// style variable changes).
template <class F>
double integrate(F&& f, double a, double b, double tol = 1e-12,
                 int max_depth = 15) {
  return boost::math::quadrature::gauss_kronrod<double, 15>::integrate(
      std::forward<F>(f), a, b, max_depth, tol);
}

}  // namespace popsel
