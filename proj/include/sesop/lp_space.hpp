#pragma once

#include <Eigen/Core>

namespace sesop {

using Vector = Eigen::VectorXd;

/// Hoelder conjugate p/(p-1). Requires p > 1.
double conjugate_exponent(double p);

/// Finite-dimensional l^p space together with the gauge exponent of the
/// duality mapping used on it. The two exponents are independent: p fixes
/// the norm, power fixes the gauge t^(power-1) of the mapping.
struct LpSpec {
  Eigen::Index dim = 0;
  double p = 2.0;      // norm exponent, > 1
  double power = 2.0;  // gauge exponent, > 1

  LpSpec dual() const;  // (dim, p*, power*)
};

/// Throws std::invalid_argument unless dim >= 1, p > 1 and power > 1.
void validate(const LpSpec& spec);

/// Dims equal, exponents equal up to roundoff from repeated conjugation.
bool compatible(const LpSpec& a, const LpSpec& b);

namespace detail {

template <class Tag>
class TaggedVector {
 public:
  TaggedVector() = default;
  TaggedVector(Vector values, LpSpec space);

  const Vector& values() const { return v_; }
  Vector& values() { return v_; }
  const LpSpec& space() const { return space_; }
  Eigen::Index dim() const { return v_.size(); }

  /// Norm of the space the vector lives in.
  double norm() const;

 private:
  Vector v_;
  LpSpec space_;
};

}  // namespace detail

struct PrimalTag {};
struct DualTag {};

// Same representation, distinct types: a DualVector's spec is the spec of the
// dual space it lives in, so duality_map round trips swap the two tags.
using PrimalVector = detail::TaggedVector<PrimalTag>;
using DualVector = detail::TaggedVector<DualTag>;

/// l^p norm, overflow-safe for large exponents (scaled by the max entry).
double lp_norm(const Vector& v, double p);

/// Duality mapping J with gauge t^(power-1):
///   J(x)_i = ||x||^(power-p) sign(x_i) |x_i|^(p-1),  J(0) = 0.
/// Satisfies <J(x), x> = ||x||^power and ||J(x)||_p* = ||x||^(power-1).
DualVector duality_map(const PrimalVector& x);

/// Mapping of the dual space back into the primal one, computed with the dual
/// exponents (p*, power*). Inverse of the primal map.
PrimalVector duality_map(const DualVector& u);

/// Bilinear pairing <u, x>. Dimensions must agree.
double pairing(const DualVector& u, const PrimalVector& x);

/// Bregman distance of the functional (1/power)||.||^power:
///   D(x, y) = (1/power*)||x||^power - <J(x), y> + (1/power)||y||^power.
/// Nonnegative, zero iff x == y; reduces to (1/2)||x - y||_2^2 for p = power = 2.
double bregman_distance(const PrimalVector& x, const PrimalVector& y);

namespace detail {

// shared kernel of both duality_map overloads, spec gives (p, power) of the
// space the input lives in
Vector duality_kernel(const Vector& v, double p, double power);

}  // namespace detail

}  // namespace sesop
