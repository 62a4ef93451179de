#pragma once

// Straight-line register program compiled from an expression tree. The same
// program runs one point at a time or over a structure-of-arrays batch through
// the active kernel backend.

#include <array>
#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "nonholo/kernels/dispatch.hpp"

namespace nonholo::kernels {

enum class TapeOp : std::uint8_t { Constant, Variable, Neg, Sin, Cos, Exp, Add, Sub, Mul, Div, PowInt };

struct Instruction {
  TapeOp op = TapeOp::Constant;
  std::uint32_t dst = 0;
  std::uint32_t lhs = 0;
  std::uint32_t rhs = 0;
  int exponent = 0;   // PowInt
  int variable = 0;   // Variable
  double constant = 0.0;
};

// Coordinates x1, x2, x3 as separate arrays of equal length. Unused
// coordinates may be empty spans when the program never reads them.
struct PointBatch {
  std::array<std::span<const double>, 3> coords;
  std::size_t size = 0;
};

class Tape {
 public:
  Tape() = default;
  Tape(std::vector<Instruction> code, std::uint32_t registers, std::uint32_t result);

  double evaluate(std::span<const double> point) const;
  void evaluate_batch(const PointBatch& points, std::span<double> out) const;
  void evaluate_batch(const PointBatch& points, std::span<double> out, const KernelTable& kernels) const;

  std::size_t size() const { return code_.size(); }
  std::uint32_t registers() const { return registers_; }
  const std::vector<Instruction>& code() const { return code_; }

 private:
  std::vector<Instruction> code_;
  std::uint32_t registers_ = 0;
  std::uint32_t result_ = 0;
};

}  // namespace nonholo::kernels
