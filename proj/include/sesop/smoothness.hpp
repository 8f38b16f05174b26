#pragma once

namespace sesop {

/// Constants of the characteristic inequality of uniformly smooth l^q spaces.
/// All three are finite and positive for q > 1; G = max(8, 64 c / K).
struct XuRoachConstants {
  double G = 0.0;
  double K = 0.0;
  double c = 0.0;
};

XuRoachConstants xu_roach_constants(double q);

/// Upper bound for the modulus of smoothness of l^q:
///   rho(tau) <= tau^q / q        for 1 < q <= 2,
///   rho(tau) <= (q-1) tau^2 / 2  for q >= 2.
/// The two branches agree at q = 2.
double modulus_smoothness_bound(double tau, double q);

}  // namespace sesop
