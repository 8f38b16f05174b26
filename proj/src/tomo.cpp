#include "sesop/tomo.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <numbers>
#include <sstream>
#include <stdexcept>
#include <utility>

#include "sesop/rng.hpp"

namespace sesop {

namespace {

constexpr double kHalfDiagonal = std::numbers::sqrt2 / 2.0;

void check_geometry(const RadonGeometry& g) {
  if (g.pixels < 1 || g.shifts < 1 || g.angles < 1)
    throw std::invalid_argument("RadonGeometry: all counts must be >= 1");
}

struct Ray {
  // point(tau) = origin + tau * dir, |dir| = 1
  double ox, oy, dx, dy;
};

Ray make_ray(double theta, double shift) {
  const double c = std::cos(theta), s = std::sin(theta);
  // offset along the normal (c, s) from the image center, direction (-s, c)
  return Ray{0.5 + shift * c, 0.5 + shift * s, -s, c};
}

// clip the full line against [0,1]^2; false when the intersection is empty
bool clip_unit_square(const Ray& r, double& tau_in, double& tau_out) {
  double lo = -std::numeric_limits<double>::infinity();
  double hi = std::numeric_limits<double>::infinity();
  auto slab = [&](double origin, double dir) {
    if (std::abs(dir) < 1e-15) return origin >= 0.0 && origin <= 1.0;
    double a = (0.0 - origin) / dir, b = (1.0 - origin) / dir;
    if (a > b) std::swap(a, b);
    lo = std::max(lo, a);
    hi = std::min(hi, b);
    return true;
  };
  if (!slab(r.ox, r.dx) || !slab(r.oy, r.dy)) return false;
  if (!(lo < hi)) return false;
  tau_in = lo;
  tau_out = hi;
  return true;
}

}  // namespace

SparseOperator build_radon_matrix(const RadonGeometry& geometry) {
  check_geometry(geometry);
  const int n = geometry.pixels;
  const double h = 1.0 / n;

  std::vector<Eigen::Index> offsets{0};
  std::vector<Eigen::Index> cols;
  std::vector<double> vals;
  offsets.reserve(geometry.rows() + 1);

  std::vector<double> cuts;
  std::vector<std::pair<Eigen::Index, double>> row;

  for (int ai = 0; ai < geometry.angles; ++ai) {
    const double theta = ai * std::numbers::pi / geometry.angles;
    for (int si = 0; si < geometry.shifts; ++si) {
      const double shift = -kHalfDiagonal + (si + 0.5) * (2.0 * kHalfDiagonal / geometry.shifts);
      const Ray ray = make_ray(theta, shift);

      double tau_in = 0.0, tau_out = 0.0;
      if (clip_unit_square(ray, tau_in, tau_out)) {
        cuts.clear();
        cuts.push_back(tau_in);
        cuts.push_back(tau_out);
        // crossings with the pixel grid lines x = k h and y = l h
        if (std::abs(ray.dx) >= 1e-15)
          for (int k = 0; k <= n; ++k) {
            const double tau = (k * h - ray.ox) / ray.dx;
            if (tau > tau_in && tau < tau_out) cuts.push_back(tau);
          }
        if (std::abs(ray.dy) >= 1e-15)
          for (int l = 0; l <= n; ++l) {
            const double tau = (l * h - ray.oy) / ray.dy;
            if (tau > tau_in && tau < tau_out) cuts.push_back(tau);
          }
        std::sort(cuts.begin(), cuts.end());

        row.clear();
        for (size_t i = 0; i + 1 < cuts.size(); ++i) {
          const double len = cuts[i + 1] - cuts[i];
          if (len <= 1e-14) continue;
          const double tau_mid = 0.5 * (cuts[i] + cuts[i + 1]);
          const double xm = ray.ox + tau_mid * ray.dx;
          const double ym = ray.oy + tau_mid * ray.dy;
          const auto k = std::clamp<Eigen::Index>(static_cast<Eigen::Index>(xm / h), 0, n - 1);
          const auto l = std::clamp<Eigen::Index>(static_cast<Eigen::Index>(ym / h), 0, n - 1);
          row.emplace_back(l * n + k, len);
        }
        std::sort(row.begin(), row.end());
        for (size_t i = 0; i < row.size(); ++i) {
          if (i > 0 && row[i].first == row[i - 1].first) {
            vals.back() += row[i].second;
          } else {
            cols.push_back(row[i].first);
            vals.push_back(row[i].second);
          }
        }
      }
      offsets.push_back(static_cast<Eigen::Index>(cols.size()));
    }
  }
  return SparseOperator(geometry.rows(), geometry.cols(), std::move(offsets), std::move(cols),
                        std::move(vals));
}

const std::vector<Ellipse>& shepp_logan_ellipses() {
  // Shepp & Logan (1974) head phantom, high-contrast variant, remapped from
  // [-1,1]^2 to the unit square: centers (c+1)/2, semi-axes halved.
  static const std::vector<Ellipse> table = [] {
    struct Native {
      double a, b, x0, y0, phi_deg, rho;
    };
    const Native native[] = {
        {0.6900, 0.9200, 0.00, 0.0000, 0.0, 2.00},
        {0.6624, 0.8740, 0.00, -0.0184, 0.0, -0.98},
        {0.1100, 0.3100, 0.22, 0.0000, -18.0, -0.02},
        {0.1600, 0.4100, -0.22, 0.0000, 18.0, -0.02},
        {0.2100, 0.2500, 0.00, 0.3500, 0.0, 0.01},
        {0.0460, 0.0460, 0.00, 0.1000, 0.0, 0.01},
        {0.0460, 0.0460, 0.00, -0.1000, 0.0, 0.01},
        {0.0460, 0.0230, -0.08, -0.6050, 0.0, 0.01},
        {0.0230, 0.0230, 0.00, -0.6060, 0.0, 0.01},
        {0.0230, 0.0460, 0.06, -0.6050, 0.0, 0.01},
    };
    std::vector<Ellipse> out;
    for (const auto& e : native)
      out.push_back(Ellipse{e.a / 2.0, e.b / 2.0, (e.x0 + 1.0) / 2.0, (e.y0 + 1.0) / 2.0,
                            e.phi_deg * std::numbers::pi / 180.0, e.rho});
    return out;
  }();
  return table;
}

Vector shepp_logan(int pixels) {
  if (pixels < 1) throw std::invalid_argument("shepp_logan: pixels must be >= 1");
  const auto& ellipses = shepp_logan_ellipses();
  const double h = 1.0 / pixels;
  Vector img = Vector::Zero(static_cast<Eigen::Index>(pixels) * pixels);
  for (int l = 0; l < pixels; ++l) {
    const double y = (l + 0.5) * h;
    for (int k = 0; k < pixels; ++k) {
      const double x = (k + 0.5) * h;
      double v = 0.0;
      for (const auto& e : ellipses) {
        const double dx = x - e.x0, dy = y - e.y0;
        const double c = std::cos(e.phi), s = std::sin(e.phi);
        const double u = (dx * c + dy * s) / e.a;
        const double w = (-dx * s + dy * c) / e.b;
        if (u * u + w * w <= 1.0) v += e.intensity;
      }
      img[static_cast<Eigen::Index>(l) * pixels + k] = v;
    }
  }
  return img;
}

Vector analytic_sinogram(const RadonGeometry& geometry, const std::vector<Ellipse>& ellipses) {
  check_geometry(geometry);
  Vector sino = Vector::Zero(geometry.rows());
  Eigen::Index row = 0;
  for (int ai = 0; ai < geometry.angles; ++ai) {
    const double theta = ai * std::numbers::pi / geometry.angles;
    const double c = std::cos(theta), s = std::sin(theta);
    for (int si = 0; si < geometry.shifts; ++si, ++row) {
      const double shift = -kHalfDiagonal + (si + 0.5) * (2.0 * kHalfDiagonal / geometry.shifts);
      // the ray is { p : <p, (c, s)> = <center, (c, s)> + shift }
      double acc = 0.0;
      for (const auto& e : ellipses) {
        const double t = shift - ((e.x0 - 0.5) * c + (e.y0 - 0.5) * s);
        const double phi = theta - e.phi;
        const double cp = std::cos(phi), sp = std::sin(phi);
        const double s2 = e.a * e.a * cp * cp + e.b * e.b * sp * sp;
        if (t * t < s2) acc += 2.0 * e.intensity * e.a * e.b * std::sqrt(s2 - t * t) / s2;
      }
      sino[row] = acc;
    }
  }
  return sino;
}

RangeProjection project_to_range(const LinearOperator& A, const Vector& y, double tol,
                                 int max_iter) {
  if (y.size() != A.rows()) throw std::invalid_argument("project_to_range: dimension mismatch");
  if (!(tol > 0.0) || max_iter < 1)
    throw std::invalid_argument("project_to_range: bad parameters");

  Vector x = Vector::Zero(A.cols());
  Vector r = y;                      // y - A x
  Vector s = A.adjoint_apply(r);     // normal-equation residual
  const double target = tol * s.norm();
  Vector p = s;
  double gamma = s.squaredNorm();
  int it = 0;
  bool converged = std::sqrt(gamma) <= target;
  Vector q(A.rows());
  while (!converged && it < max_iter) {
    ++it;
    A.apply(p, q);
    const double qq = q.squaredNorm();
    if (qq == 0.0) break;  // p in the kernel, nothing further to fit
    const double alpha = gamma / qq;
    x += alpha * p;
    r -= alpha * q;
    A.adjoint_apply(r, s);
    const double gamma_next = s.squaredNorm();
    if (std::sqrt(gamma_next) <= target) {
      converged = true;
      break;
    }
    p = s + (gamma_next / gamma) * p;
    gamma = gamma_next;
  }
  return RangeProjection{A.apply(x), it, converged};
}

Vector add_noise(const Vector& y, double delta, std::uint64_t seed) {
  if (!(delta >= 0.0)) throw std::invalid_argument("add_noise: negative level");
  if (delta == 0.0) return y;
  const double yn = y.norm();
  if (yn == 0.0) throw std::invalid_argument("add_noise: cannot perturb y = 0 relatively");
  Xoshiro256pp rng(seed);
  Vector noise(y.size());
  for (Eigen::Index i = 0; i < y.size(); ++i) noise[i] = rng.uniform_symmetric();
  return y + (delta * yn / noise.norm()) * noise;
}

void write_pgm(const std::string& path, const Vector& data, int width, int height) {
  if (static_cast<Eigen::Index>(width) * height != data.size())
    throw std::invalid_argument("write_pgm: shape mismatch");
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << "P5\n" << width << " " << height << "\n255\n";
  const double lo = data.minCoeff(), hi = data.maxCoeff();
  const double scale = hi > lo ? 255.0 / (hi - lo) : 0.0;
  std::vector<unsigned char> line(width);
  for (int row = height - 1; row >= 0; --row) {  // row 0 of the data is the bottom line
    for (int col = 0; col < width; ++col) {
      const double v = (data[static_cast<Eigen::Index>(row) * width + col] - lo) * scale;
      line[col] = static_cast<unsigned char>(std::lround(std::clamp(v, 0.0, 255.0)));
    }
    out.write(reinterpret_cast<const char*>(line.data()), width);
  }
  if (!out) throw std::runtime_error("failed writing " + path);
}

void write_csv_image(const std::string& path, const Vector& data, int width, int height) {
  if (static_cast<Eigen::Index>(width) * height != data.size())
    throw std::invalid_argument("write_csv_image: shape mismatch");
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  out.precision(17);
  for (int row = height - 1; row >= 0; --row) {
    for (int col = 0; col < width; ++col)
      out << (col ? "," : "") << data[static_cast<Eigen::Index>(row) * width + col];
    out << "\n";
  }
  if (!out) throw std::runtime_error("failed writing " + path);
}

std::string artifact_name(const std::string& tag, double p, int pixels, const std::string& ext) {
  std::ostringstream os;
  os << tag << "_p" << p << "_N" << pixels << "." << ext;
  return os.str();
}

}  // namespace sesop
