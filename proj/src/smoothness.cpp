#include "sesop/smoothness.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "sesop/lp_space.hpp"

namespace sesop {

XuRoachConstants xu_roach_constants(double q) {
  if (!(q > 1.0)) throw std::invalid_argument("xu_roach_constants: requires q > 1");
  const double p = conjugate_exponent(q);
  const double sqrt3 = std::sqrt(3.0);

  const double a1 = std::min(0.5 * q * (q - 1.0), 1.0);
  const double a2 = std::min(0.5 * q, 1.0) * (q - 1.0);
  const double a3 = (q - 1.0) * (1.0 - std::pow(sqrt3 - 1.0, p));
  const double a4 = 1.0 - std::pow(1.0 + (2.0 - sqrt3) * p, 1.0 - q);
  const double K = 4.0 * (2.0 + sqrt3) * std::min(std::min(a1, a2), std::min(a3, a4));

  const double tau0 = (std::sqrt(339.0) - 18.0) / 30.0;
  double prod = 1.0;
  for (int j = 1; j < 60; ++j) {
    const double factor = 1.0 + 15.0 * tau0 / std::pow(2.0, j + 2);
    prod *= factor;
    if (factor - 1.0 < 1e-15) break;
  }
  const double c = 4.0 * tau0 / (std::sqrt(1.0 + tau0 * tau0) - 1.0) * prod;

  return XuRoachConstants{std::max(8.0, 64.0 * c / K), K, c};
}

double modulus_smoothness_bound(double tau, double q) {
  if (!(q > 1.0)) throw std::invalid_argument("modulus_smoothness_bound: requires q > 1");
  if (tau < 0.0) throw std::invalid_argument("modulus_smoothness_bound: requires tau >= 0");
  if (q <= 2.0) return std::pow(tau, q) / q;
  return 0.5 * (q - 1.0) * tau * tau;
}

}  // namespace sesop
