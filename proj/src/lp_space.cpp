#include "sesop/lp_space.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>

namespace sesop {

double conjugate_exponent(double p) {
  if (!(p > 1.0)) throw std::invalid_argument("conjugate_exponent: requires p > 1");
  return p / (p - 1.0);
}

LpSpec LpSpec::dual() const {
  return LpSpec{dim, conjugate_exponent(p), conjugate_exponent(power)};
}

void validate(const LpSpec& spec) {
  if (spec.dim < 1) throw std::invalid_argument("LpSpec: dim must be >= 1");
  if (!(spec.p > 1.0)) throw std::invalid_argument("LpSpec: norm exponent must be > 1");
  if (!(spec.power > 1.0)) throw std::invalid_argument("LpSpec: gauge exponent must be > 1");
}

bool compatible(const LpSpec& a, const LpSpec& b) {
  // conjugating twice reproduces the exponent only up to roundoff
  auto close = [](double x, double y) { return std::abs(x - y) <= 1e-9 * std::max(x, y); };
  return a.dim == b.dim && close(a.p, b.p) && close(a.power, b.power);
}

namespace detail {

template <class Tag>
TaggedVector<Tag>::TaggedVector(Vector values, LpSpec space)
    : v_(std::move(values)), space_(space) {
  validate(space_);
  if (v_.size() != space_.dim) {
    std::ostringstream os;
    os << "vector size " << v_.size() << " does not match space dim " << space_.dim;
    throw std::invalid_argument(os.str());
  }
  if (!v_.allFinite()) throw std::invalid_argument("vector has non-finite entries");
}

template <class Tag>
double TaggedVector<Tag>::norm() const {
  return lp_norm(v_, space_.p);
}

template class TaggedVector<PrimalTag>;
template class TaggedVector<DualTag>;

}  // namespace detail

double lp_norm(const Vector& v, double p) {
  if (!(p > 1.0)) throw std::invalid_argument("lp_norm: requires p > 1");
  if (v.size() == 0) return 0.0;
  if (p == 2.0) return v.norm();
  const double amax = v.cwiseAbs().maxCoeff();
  if (amax == 0.0) return 0.0;
  double acc = 0.0;
  for (Eigen::Index i = 0; i < v.size(); ++i) acc += std::pow(std::abs(v[i]) / amax, p);
  return amax * std::pow(acc, 1.0 / p);
}

namespace detail {

Vector duality_kernel(const Vector& v, double p, double power) {
  const double nrm = lp_norm(v, p);
  if (nrm == 0.0) return Vector::Zero(v.size());
  if (p == 2.0) {
    if (power == 2.0) return v;
    return v * std::pow(nrm, power - 2.0);
  }
  // ||x||^(power-p) sign(x_i)|x_i|^(p-1) rewritten around |x_i|/||x|| <= 1 so
  // large conjugate exponents cannot overflow
  const double outer = std::pow(nrm, power - 1.0);
  Vector j(v.size());
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    const double t = std::pow(std::abs(v[i]) / nrm, p - 1.0);
    j[i] = v[i] < 0.0 ? -outer * t : outer * t;
  }
  return j;
}

}  // namespace detail

DualVector duality_map(const PrimalVector& x) {
  validate(x.space());
  return DualVector(detail::duality_kernel(x.values(), x.space().p, x.space().power),
                    x.space().dual());
}

PrimalVector duality_map(const DualVector& u) {
  validate(u.space());
  return PrimalVector(detail::duality_kernel(u.values(), u.space().p, u.space().power),
                      u.space().dual());
}

double pairing(const DualVector& u, const PrimalVector& x) {
  if (u.dim() != x.dim()) throw std::invalid_argument("pairing: dimension mismatch");
  return u.values().dot(x.values());
}

double bregman_distance(const PrimalVector& x, const PrimalVector& y) {
  if (!compatible(x.space(), y.space()))
    throw std::invalid_argument("bregman_distance: spaces differ");
  const LpSpec& sp = x.space();
  if (sp.p == 2.0 && sp.power == 2.0) return 0.5 * (x.values() - y.values()).squaredNorm();
  const double power = sp.power;
  const double power_conj = conjugate_exponent(power);
  const DualVector jx = duality_map(x);
  return std::pow(x.norm(), power) / power_conj - pairing(jx, y) +
         std::pow(y.norm(), power) / power;
}

}  // namespace sesop
