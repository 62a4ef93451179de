#pragma once

// The integrator family. Every variant has base coordinates driven directly
// by the inputs (xdot_i = u_i) followed by fiber coordinates whose rates are
// 1-forms in the base coordinates, optionally plus a drift term.

#include <array>
#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "nonholo/field/vector_field.hpp"

namespace nonholo::systems {

enum class Variant { Classic, GeneralR2, GeneralizedRm, GeneralR3, PairwiseRm, DriftR3, ComplexPlane };

std::string_view variant_name(Variant v);

// fiber rate = sum_k field_k(p) * u[base[k]] + drift(p), where the local point
// p has p_k = x[base[k]].
struct FiberForm {
  field::VectorField field;
  std::array<int, 3> base{0, 1, 2};
  field::ScalarExpr drift;  // constant 0 unless the system has drift
  std::string label;

  int dim() const { return field.dimension(); }
};

class SystemModel {
 public:
  SystemModel() = default;

  // xdot3 = x1 u2 - x2 u1
  static SystemModel classic();
  static SystemModel general_r2(field::VectorField f);
  // Pairwise system with the rotation form (-x_j, x_i) on every pair.
  static SystemModel generalized_rm(int m);
  static SystemModel general_r3(field::VectorField f);
  // One planar field per pair (i, j), i < j, ordered (1,2), (1,3), ..., (m-1,m);
  // the field's x1 and x2 stand for x_i and x_j.
  static SystemModel pairwise_rm(int m, std::vector<field::VectorField> pair_fields);
  static SystemModel drift_r3(field::ScalarExpr g, field::VectorField f);
  // wdot = F(z) * u_C with F = re + i*im; re plays the part of f2, im of f1:
  //   w1dot = re*u1 - im*u2,  w2dot = im*u1 + re*u2.
  static SystemModel complex_plane(field::ComplexFunction F);

  Variant variant() const;
  int base_dim() const;
  int state_dim() const;
  const std::vector<FiberForm>& fibers() const;

  // The defining field of Classic, GeneralR2, GeneralR3 and DriftR3.
  const field::VectorField& field() const;
  const field::ScalarExpr& drift() const;
  const field::ComplexFunction& complex_function() const;
  // Base coordinate pair (i, j), zero based, behind a pairwise fiber.
  std::pair<int, int> pair_of(int fiber) const;
  int fiber_of_pair(int i, int j) const;

  // Throws DomainError when a fiber form is evaluated inside its excluded set.
  void rhs(std::span<const double> x, std::span<const double> u, std::span<double> dx) const;

  std::vector<std::string> state_labels() const;

 private:
  struct Data;
  explicit SystemModel(std::shared_ptr<const Data> d) : data_(std::move(d)) {}
  const Data& data() const;
  std::shared_ptr<const Data> data_;
};

}  // namespace nonholo::systems
