#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "sesop/linear_operator.hpp"
#include "sesop/lp_space.hpp"

namespace sesop {

/// Parallel-beam sampling of the unit square: `angles` directions uniform in
/// [0, pi), `shifts` detector bins spanning [-sqrt(2)/2, sqrt(2)/2] around the
/// image center, rays through the bin centers. Rows are angle-major:
/// row = angle_index * shifts + shift_index.
struct RadonGeometry {
  int pixels = 0;  // image is pixels x pixels on [0,1]^2
  int shifts = 0;
  int angles = 0;

  Eigen::Index rows() const { return static_cast<Eigen::Index>(shifts) * angles; }
  Eigen::Index cols() const { return static_cast<Eigen::Index>(pixels) * pixels; }
};

/// Discrete Radon transform with exact ray/pixel intersection lengths.
/// Pixel (k, l), 0-based from the lower-left corner, maps to column l*n + k.
/// Each entry lies in [0, h*sqrt(2)] and each row sums to the chord length of
/// the ray through the unit square.
SparseOperator build_radon_matrix(const RadonGeometry& geometry);

struct Ellipse {
  double a = 0.0, b = 0.0;   // semi-axes
  double x0 = 0.0, y0 = 0.0; // center
  double phi = 0.0;          // rotation, radians
  double intensity = 0.0;
};

/// Head phantom of Shepp & Logan (1974), original high-contrast intensities,
/// mapped from its native [-1,1]^2 frame into the unit square.
const std::vector<Ellipse>& shepp_logan_ellipses();

/// Rasterization at pixel centers, intensities add where ellipses overlap.
Vector shepp_logan(int pixels);

/// Closed-form line integrals: an ellipse contributes
/// 2 rho a b sqrt(s^2 - t^2) / s^2 with s^2 = a^2 cos^2 + b^2 sin^2 in the
/// ellipse frame, zero when the ray misses. Ray order matches the matrix.
Vector analytic_sinogram(const RadonGeometry& geometry, const std::vector<Ellipse>& ellipses);

struct RangeProjection {
  Vector y;
  int iterations = 0;
  bool converged = true;  // false when the iteration cap was exhausted
};

/// Euclidean projection onto the range of A: least-squares fit by conjugate
/// gradients on the normal equation, stopped at
/// ||A^T(A x - y)|| <= tol * ||A^T y||, result A x_ls.
RangeProjection project_to_range(const LinearOperator& A, const Vector& y, double tol = 1e-10,
                                 int max_iter = 10000);

/// y + delta * (||y||_2/||n||_2) n with n uniform in [-1,1]^m from the given
/// seed; the relative perturbation is exactly delta. Errors on y = 0 with
/// delta > 0.
Vector add_noise(const Vector& y, double delta, std::uint64_t seed);

/// Binary 8-bit PGM (P5), values min-max normalized; a constant image writes
/// zeros. The data is row-major with row 0 at the bottom of the image.
void write_pgm(const std::string& path, const Vector& data, int width, int height);

/// Row-major reals, comma separated, full precision, same orientation as the PGM.
void write_csv_image(const std::string& path, const Vector& data, int width, int height);

/// "<tag>_p<p>_N<pixels>.<ext>" with a minimal decimal form of p.
std::string artifact_name(const std::string& tag, double p, int pixels, const std::string& ext);

}  // namespace sesop
