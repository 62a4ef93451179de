#pragma once

#include <array>
#include <initializer_list>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "nonholo/field/expr.hpp"

namespace nonholo::field {

// Evaluations closer than this to a declared excluded point are rejected.
inline constexpr double kGuardRadius = 1e-9;

// A state point in R^2 or R^3.
class Point {
 public:
  Point() = default;
  Point(std::initializer_list<double> coords);
  explicit Point(std::span<const double> coords);

  int dim() const { return dim_; }
  double operator[](int i) const { return coords_[static_cast<std::size_t>(i)]; }
  std::span<const double> view() const { return {coords_.data(), static_cast<std::size_t>(dim_)}; }

 private:
  std::array<double, 3> coords_{};
  int dim_ = 0;
};

// One excluded locus: a point, or a line/plane when some axes are left free.
struct ExcludedPoint {
  std::array<std::optional<double>, 3> coords;

  // Euclidean distance from `p` measured over the pinned axes.
  double distance(std::span<const double> p) const;
};

struct ExcludedSet {
  std::vector<ExcludedPoint> points;
  std::string note;

  bool empty() const { return points.empty(); }
  double distance(std::span<const double> p) const;  // +inf when empty
  bool within_guard(std::span<const double> p) const { return distance(p) < kGuardRadius; }

  // The point (0,0[,free]) with the conventional note; x3 is free in R^3 so the
  // whole fiber axis over the origin is excluded.
  static ExcludedSet origin();
  static ExcludedSet merge(const ExcludedSet& a, const ExcludedSet& b);
};

class VectorField {
 public:
  VectorField() = default;
  // Throws ValidationError unless there are 2 or 3 components and every
  // component only uses x1..x_dim.
  VectorField(std::vector<ScalarExpr> components, ExcludedSet excluded = {});
  static VectorField parse(std::span<const std::string> components, ExcludedSet excluded = {});

  int dimension() const;
  const ScalarExpr& component(int i) const;
  // d f_i / d x_j
  const ScalarExpr& partial(int i, int j) const;
  // One expression in R^2 (df2/dx1 - df1/dx2), three in R^3.
  std::span<const ScalarExpr> curl_components() const;
  const ScalarExpr& divergence_expr() const;
  const ExcludedSet& excluded() const;

  // Throws DomainError inside the guard radius of the excluded set.
  void check_domain(std::span<const double> p) const;
  std::array<double, 3> evaluate(std::span<const double> p) const;

  VectorField scaled(double factor) const;
  friend VectorField operator+(const VectorField& a, const VectorField& b);

  std::vector<std::string> to_strings() const;

 private:
  struct Impl;
  std::shared_ptr<const Impl> impl_;
};

// Complex function F = re + i*im of z = x1 + i*x2, with declared poles.
struct ComplexFunction {
  ScalarExpr re;
  ScalarExpr im;
  ExcludedSet poles;

  static ComplexFunction parse(const std::string& re, const std::string& im, ExcludedSet poles = {});
  // zbar^n expanded into real and imaginary polynomials.
  static ComplexFunction conj_power(int n);
};

}  // namespace nonholo::field
