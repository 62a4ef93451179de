#pragma once

// Numerical probes behind the controllability tests: circulation around
// circles, flux through the spanned disks, curl over grids, complex contour
// integrals and Cauchy-Riemann residuals.

#include <array>
#include <complex>
#include <cstddef>
#include <optional>
#include <utility>
#include <vector>

#include "nonholo/field/vector_field.hpp"

namespace nonholo::controllability {

// Circle traversed once over s in [0,1]:
//   x(s) = center + radius*(cos(2 pi s) e_a + orientation*sin(2 pi s) e_b)
// with (a, b) = plane. Planar loops use plane (0, 1).
class Loop {
 public:
  Loop(field::Point center, double radius, int orientation = 1, std::array<int, 2> plane = {0, 1});

  const field::Point& center() const { return center_; }
  double radius() const { return radius_; }
  int orientation() const { return orientation_; }
  std::array<int, 2> plane() const { return plane_; }
  int dim() const { return center_.dim(); }

  std::array<double, 3> position(double s) const;
  std::array<double, 3> tangent(double s) const;  // dx/ds

  // Smallest distance from the circle to the excluded set; +inf when empty.
  double distance_to(const field::ExcludedSet& ex) const;
  // True when some excluded locus crosses the flat disk the circle bounds.
  bool disk_meets(const field::ExcludedSet& ex) const;

 private:
  field::Point center_;
  double radius_;
  int orientation_;
  std::array<int, 2> plane_;
};

struct LoopValue {
  double value = 0.0;
  double magnitude = 0.0;  // integral of |f . dx/ds|, the roundoff scale
  std::size_t points = 0;
};

// Periodic trapezoid rule from 256 points, doubling until successive values
// differ by less than 1e-10 or 2^16 points are used. Throws DomainError when
// the loop passes within the guard radius of the excluded set.
LoopValue loop_circulation(const field::VectorField& f, const Loop& loop);
double loop_integral(const field::VectorField& f, const Loop& loop);

struct StokesResult {
  double line = 0.0;
  double surface = 0.0;
  bool excluded_inside = false;  // the disk is not in a simply-connected domain
};

// Line integral and the flux of curl f through the flat disk bounded by the
// loop (polar Gauss-Legendre in radius, trapezoid in angle). Nodes inside the
// guard radius are skipped and flagged.
StokesResult stokes_check(const field::VectorField& f, const Loop& loop);

// Axis-aligned box, one [lo, hi] range per coordinate.
struct Box {
  std::vector<std::pair<double, double>> ranges;

  static Box cube(int dim, double lo, double hi);
  int dim() const { return static_cast<int>(ranges.size()); }
};

struct CurlScan {
  double max_abs = 0.0;
  field::Point argmax;
  double jacobian_scale = 0.0;  // largest |d f_i / d x_j| seen, for relative thresholds
  std::size_t probes = 0;
  std::size_t skipped = 0;  // grid points inside the excluded set's guard
};

// Throws ValidationError when grid < 2 or the box dimension does not match.
CurlScan curl_scan(const field::VectorField& f, const Box& box, int grid);

// Closed contour integral of F(z) dz along a planar loop, by the same
// doubling trapezoid rule. Throws DomainError near a declared pole.
std::complex<double> contour_integral(const field::ComplexFunction& F, const Loop& loop);

struct Annulus {
  std::array<double, 2> center{0.0, 0.0};
  double inner = 0.0;
  double outer = 0.0;
};

struct HolomorphyResult {
  bool holomorphic = false;
  double max_residual = 0.0;
  field::Point witness;  // where the residual is largest
  std::size_t probes = 0;
  std::size_t skipped = 0;
  bool has_poles = false;
};

// Largest Cauchy-Riemann residual over the grid points of `box` (optionally
// restricted to an annulus); holomorphic when it stays within 1e-8 relative
// to the size of the partial derivatives.
HolomorphyResult holomorphy_test(const field::ComplexFunction& F, const Box& box, int grid,
                                 std::optional<Annulus> region = std::nullopt);

}  // namespace nonholo::controllability
