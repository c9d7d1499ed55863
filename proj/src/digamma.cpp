#include "spn/digamma.hpp"

#include <cmath>
#include <limits>

namespace spn {

double digamma(double x) {
  if (!(x > 0.0)) return std::numeric_limits<double>::quiet_NaN();
  // psi(x) = psi(x + 1) - 1/x until the asymptotic series is accurate to double precision.
  double shift = 0.0;
  while (x < 10.0) {
    shift -= 1.0 / x;
    x += 1.0;
  }
  // psi(x) ~ ln x - 1/(2x) - sum_n B_2n / (2n x^2n), Bernoulli terms through x^-12.
  const double inv = 1.0 / x;
  const double inv2 = inv * inv;
  const double series =
      inv2 * (1.0 / 12 -
               inv2 * (1.0 / 120 -
                       inv2 * (1.0 / 252 - inv2 * (1.0 / 240 - inv2 * (1.0 / 132 - inv2 * (691.0 / 32760))))));
  return shift + std::log(x) - 0.5 * inv - series;
}

}  // namespace spn
