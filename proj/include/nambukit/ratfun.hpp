#ifndef NAMBUKIT_RATFUN_HPP
#define NAMBUKIT_RATFUN_HPP

#include <string>
#include <vector>

#include "nambukit/poly.hpp"

namespace nambukit {

// Element of the rational-function field Q(chart variables), kept in the
// unique canonical form: gcd(num, den) = 1, den monic in graded-lex order,
// num = 0 forces den = 1. Equality and is_zero are therefore decisions,
// not heuristics.
class RationalFunction {
public:
    RationalFunction() = default;
    explicit RationalFunction(MultiPoly num);
    RationalFunction(MultiPoly num, MultiPoly den);

    static RationalFunction zero(ChartPtr chart) {
        return RationalFunction(MultiPoly::zero(std::move(chart)));
    }
    static RationalFunction constant(ChartPtr chart, const Rational& c) {
        return RationalFunction(MultiPoly::constant(std::move(chart), c));
    }
    static RationalFunction variable(ChartPtr chart, std::size_t i) {
        return RationalFunction(MultiPoly::variable(std::move(chart), i));
    }

    const MultiPoly& num() const { return num_; }
    const MultiPoly& den() const { return den_; }
    const ChartPtr& chart() const { return num_.chart(); }

    bool is_zero() const { return num_.is_zero(); }
    bool is_constant() const { return num_.is_constant() && den_.is_constant(); }
    Rational constant_value() const { return num_.constant_value() / den_.constant_value(); }
    bool is_polynomial() const { return den_.is_constant(); }

    RationalFunction operator-() const;
    RationalFunction& operator+=(const RationalFunction& o);
    RationalFunction& operator-=(const RationalFunction& o);
    RationalFunction& operator*=(const RationalFunction& o);
    RationalFunction& operator/=(const RationalFunction& o);
    friend RationalFunction operator+(RationalFunction a, const RationalFunction& b) { return a += b; }
    friend RationalFunction operator-(RationalFunction a, const RationalFunction& b) { return a -= b; }
    friend RationalFunction operator*(RationalFunction a, const RationalFunction& b) { return a *= b; }
    friend RationalFunction operator/(RationalFunction a, const RationalFunction& b) { return a /= b; }
    RationalFunction scaled(const Rational& c) const;
    RationalFunction pow(long e) const;  // negative exponents via reciprocal

    friend bool operator==(const RationalFunction& a, const RationalFunction& b);
    friend bool operator!=(const RationalFunction& a, const RationalFunction& b) { return !(a == b); }

    RationalFunction derivative(std::size_t var) const;
    Rational evaluate(const std::vector<Rational>& point) const;  // PoleAtPoint on zero den

    // Substitute each chart variable by a polynomial image on the target
    // chart. Throws DivisionByZero if the denominator collapses to zero.
    RationalFunction substitute(const std::vector<MultiPoly>& images, ChartPtr target) const;

    std::string str() const;

private:
    void normalize();
    void make_monic_den();
    RationalFunction& add_scaled(const RationalFunction& o, bool negate);

    MultiPoly num_, den_;
};

} // namespace nambukit

#endif
