#include "nonholo/field/rational.hpp"

#include <cmath>
#include <unordered_map>

namespace nonholo::field {
namespace {

// Cancellation threshold relative to the magnitudes that were combined.
constexpr double kCancel = 1e-12;
constexpr std::size_t kMaxTerms = 20000;

}  // namespace

Polynomial Polynomial::constant(double c) {
  Polynomial p;
  if (c != 0.0) p.terms_[{0, 0, 0}] = c;
  return p;
}

Polynomial Polynomial::variable(int index) {
  Polynomial p;
  Monomial m{0, 0, 0};
  m[static_cast<std::size_t>(index)] = 1;
  p.terms_[m] = 1.0;
  return p;
}

double Polynomial::evaluate(std::span<const double> point) const {
  double total = 0.0;
  for (const auto& [m, c] : terms_) {
    double term = c;
    for (std::size_t i = 0; i < 3; ++i) {
      if (m[i] != 0) term *= std::pow(point[i], m[i]);
    }
    total += term;
  }
  return total;
}

Polynomial Polynomial::operator-() const {
  Polynomial p = *this;
  for (auto& [m, c] : p.terms_) c = -c;
  return p;
}

Polynomial Polynomial::collect(const std::map<Monomial, Accumulator>& acc) {
  std::map<Monomial, double> terms;
  for (const auto& [m, a] : acc) {
    if (a.sum != 0.0 && std::fabs(a.sum) > kCancel * a.magnitude) terms.emplace(m, a.sum);
  }
  return Polynomial(std::move(terms));
}

Polynomial operator+(const Polynomial& a, const Polynomial& b) {
  std::map<Monomial, Polynomial::Accumulator> acc;
  for (const auto* p : {&a, &b}) {
    for (const auto& [m, c] : p->terms_) {
      acc[m].sum += c;
      acc[m].magnitude += std::fabs(c);
    }
  }
  return Polynomial::collect(acc);
}

Polynomial operator-(const Polynomial& a, const Polynomial& b) { return a + (-b); }

Polynomial operator*(const Polynomial& a, const Polynomial& b) {
  std::map<Monomial, Polynomial::Accumulator> acc;
  for (const auto& [ma, ca] : a.terms_) {
    for (const auto& [mb, cb] : b.terms_) {
      const Monomial m{ma[0] + mb[0], ma[1] + mb[1], ma[2] + mb[2]};
      const double c = ca * cb;
      acc[m].sum += c;
      acc[m].magnitude += std::fabs(c);
    }
  }
  return Polynomial::collect(acc);
}

namespace {

class RationalBuilder {
 public:
  std::optional<RationalForm> build(const ScalarExpr& e) {
    if (auto it = memo_.find(e.node()); it != memo_.end()) return it->second;
    std::optional<RationalForm> r = compute(e);
    if (r && (r->numerator.term_count() > kMaxTerms || r->denominator.term_count() > kMaxTerms)) {
      r.reset();
    }
    memo_.emplace(e.node(), r);
    return r;
  }

 private:
  static RationalForm of(Polynomial p) { return {std::move(p), Polynomial::constant(1.0)}; }

  static std::optional<RationalForm> power(const RationalForm& base, int k) {
    if (k < 0) {
      if (base.numerator.is_zero()) return std::nullopt;
      return power(RationalForm{base.denominator, base.numerator}, -k);
    }
    RationalForm result = of(Polynomial::constant(1.0));
    RationalForm b = base;
    unsigned n = static_cast<unsigned>(k);
    while (n != 0) {
      if (n & 1u) result = {result.numerator * b.numerator, result.denominator * b.denominator};
      n >>= 1u;
      if (n != 0) b = {b.numerator * b.numerator, b.denominator * b.denominator};
      if (result.numerator.term_count() > kMaxTerms || b.numerator.term_count() > kMaxTerms) return std::nullopt;
    }
    return result;
  }

  std::optional<RationalForm> compute(const ScalarExpr& e) {
    switch (e.op()) {
      case Op::Constant:
        return of(Polynomial::constant(e.constant_value()));
      case Op::Variable:
        return of(Polynomial::variable(e.variable_index()));
      case Op::Sin:
      case Op::Cos:
      case Op::Exp:
        return std::nullopt;  // arguments are never constant after folding
      case Op::Neg: {
        auto a = build(e.lhs());
        if (!a) return std::nullopt;
        return RationalForm{-a->numerator, a->denominator};
      }
      case Op::Pow: {
        auto a = build(e.lhs());
        if (!a) return std::nullopt;
        return power(*a, e.exponent());
      }
      default:
        break;
    }
    auto a = build(e.lhs());
    auto b = build(e.rhs());
    if (!a || !b) return std::nullopt;
    switch (e.op()) {
      case Op::Add:
        return RationalForm{a->numerator * b->denominator + b->numerator * a->denominator,
                            a->denominator * b->denominator};
      case Op::Sub:
        return RationalForm{a->numerator * b->denominator - b->numerator * a->denominator,
                            a->denominator * b->denominator};
      case Op::Mul:
        return RationalForm{a->numerator * b->numerator, a->denominator * b->denominator};
      case Op::Div:
        if (b->numerator.is_zero()) return std::nullopt;
        return RationalForm{a->numerator * b->denominator, a->denominator * b->numerator};
      default:
        return std::nullopt;
    }
  }

  std::unordered_map<const Node*, std::optional<RationalForm>> memo_;
};

}  // namespace

std::optional<RationalForm> to_rational(const ScalarExpr& e) {
  RationalBuilder builder;
  return builder.build(e);
}

bool is_symbolically_zero(const ScalarExpr& e) {
  if (e.is_constant()) return e.constant_value() == 0.0;
  const auto r = to_rational(e);
  return r.has_value() && r->numerator.is_zero();
}

bool is_symbolically_constant(const ScalarExpr& e) {
  if (e.is_constant()) return true;
  for (int v = 0; v < e.arity(); ++v) {
    if (!is_symbolically_zero(e.derivative(v))) return false;
  }
  return true;
}

}  // namespace nonholo::field
