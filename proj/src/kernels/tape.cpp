#include "nonholo/kernels/tape.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace nonholo::kernels {
namespace {

constexpr std::size_t kChunk = 128;
constexpr std::size_t kInlineRegisters = 64;

}  // namespace

Tape::Tape(std::vector<Instruction> code, std::uint32_t registers, std::uint32_t result)
    : code_(std::move(code)), registers_(registers), result_(result) {
  if (code_.empty() || result_ >= registers_) throw std::invalid_argument("malformed tape");
}

double Tape::evaluate(std::span<const double> point) const {
  std::array<double, kInlineRegisters> inline_regs{};
  std::vector<double> heap_regs;
  double* regs = inline_regs.data();
  if (registers_ > kInlineRegisters) {
    heap_regs.assign(registers_, 0.0);
    regs = heap_regs.data();
  }
  const KernelTable& scalar = scalar_kernels();
  for (const Instruction& ins : code_) {
    double& d = regs[ins.dst];
    switch (ins.op) {
      case TapeOp::Constant:
        d = ins.constant;
        break;
      case TapeOp::Variable:
        d = static_cast<std::size_t>(ins.variable) < point.size() ? point[ins.variable] : 0.0;
        break;
      case TapeOp::Neg:
        d = -regs[ins.lhs];
        break;
      case TapeOp::Sin:
        d = std::sin(regs[ins.lhs]);
        break;
      case TapeOp::Cos:
        d = std::cos(regs[ins.lhs]);
        break;
      case TapeOp::Exp:
        d = std::exp(regs[ins.lhs]);
        break;
      case TapeOp::Add:
        d = regs[ins.lhs] + regs[ins.rhs];
        break;
      case TapeOp::Sub:
        d = regs[ins.lhs] - regs[ins.rhs];
        break;
      case TapeOp::Mul:
        d = regs[ins.lhs] * regs[ins.rhs];
        break;
      case TapeOp::Div:
        d = regs[ins.lhs] / regs[ins.rhs];
        break;
      case TapeOp::PowInt: {
        const double base = regs[ins.lhs];
        scalar.pow_int(&base, ins.exponent, &d, 1);
        break;
      }
    }
  }
  return regs[result_];
}

void Tape::evaluate_batch(const PointBatch& points, std::span<double> out) const {
  evaluate_batch(points, out, active_kernels());
}

void Tape::evaluate_batch(const PointBatch& points, std::span<double> out, const KernelTable& k) const {
  if (out.size() < points.size) throw std::invalid_argument("batch output too small");
  std::vector<double> regs(static_cast<std::size_t>(registers_) * kChunk);
  auto reg = [&](std::uint32_t r) { return regs.data() + static_cast<std::size_t>(r) * kChunk; };

  for (std::size_t start = 0; start < points.size; start += kChunk) {
    const std::size_t n = std::min(kChunk, points.size - start);
    for (const Instruction& ins : code_) {
      double* d = reg(ins.dst);
      switch (ins.op) {
        case TapeOp::Constant:
          k.fill(ins.constant, d, n);
          break;
        case TapeOp::Variable: {
          const auto& c = points.coords[static_cast<std::size_t>(ins.variable)];
          if (c.size() < start + n) throw std::invalid_argument("batch missing coordinate");
          std::copy_n(c.data() + start, n, d);
          break;
        }
        case TapeOp::Neg:
          k.neg(reg(ins.lhs), d, n);
          break;
        case TapeOp::Sin:
          k.sin(reg(ins.lhs), d, n);
          break;
        case TapeOp::Cos:
          k.cos(reg(ins.lhs), d, n);
          break;
        case TapeOp::Exp:
          k.exp(reg(ins.lhs), d, n);
          break;
        case TapeOp::Add:
          k.add(reg(ins.lhs), reg(ins.rhs), d, n);
          break;
        case TapeOp::Sub:
          k.sub(reg(ins.lhs), reg(ins.rhs), d, n);
          break;
        case TapeOp::Mul:
          k.mul(reg(ins.lhs), reg(ins.rhs), d, n);
          break;
        case TapeOp::Div:
          k.div(reg(ins.lhs), reg(ins.rhs), d, n);
          break;
        case TapeOp::PowInt:
          k.pow_int(reg(ins.lhs), ins.exponent, d, n);
          break;
      }
    }
    std::copy_n(reg(result_), n, out.data() + start);
  }
}

}  // namespace nonholo::kernels
