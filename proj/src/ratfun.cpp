#include "nambukit/ratfun.hpp"

namespace nambukit {

RationalFunction::RationalFunction(MultiPoly num)
    : num_(std::move(num)), den_(MultiPoly::constant(num_.chart(), Rational(1))) {}

RationalFunction::RationalFunction(MultiPoly num, MultiPoly den)
    : num_(std::move(num)), den_(std::move(den)) {
    require_same_chart(num_.chart(), den_.chart(), "rational function");
    if (den_.is_zero()) throw DivisionByZero();
    normalize();
}

void RationalFunction::normalize() {
    if (num_.is_zero()) {
        den_ = MultiPoly::constant(num_.chart(), Rational(1));
        return;
    }
    if (!num_.is_constant() && !den_.is_constant()) {
        MultiPoly g = poly_gcd(num_, den_);
        if (!g.is_constant()) {
            num_ = *divide_exact(num_, g);
            den_ = *divide_exact(den_, g);
        }
    }
    make_monic_den();
}

void RationalFunction::make_monic_den() {
    Rational lc = den_.leading_coeff();
    if (!lc.is_one()) {
        Rational inv = lc.inverse();
        num_ = num_.scaled(inv);
        den_ = den_.scaled(inv);
    }
}

RationalFunction RationalFunction::operator-() const {
    RationalFunction r = *this;
    r.num_ = -r.num_;
    return r;
}

// The += and *= bodies are the classic reduced-fraction algorithms: with
// both operands already in lowest terms, cross-cancelling before the ring
// operations leaves the result in lowest terms, so no gcd of the (much
// larger) products is ever taken.
RationalFunction& RationalFunction::add_scaled(const RationalFunction& o, bool negate) {
    require_same_chart(chart(), o.chart(), "rational +");
    if (o.num_.is_zero()) return *this;
    MultiPoly on = negate ? -o.num_ : o.num_;
    if (num_.is_zero()) {
        num_ = std::move(on);
        den_ = o.den_;
        return *this;
    }
    if (den_ == o.den_) {
        num_ += on;
        normalize();
        return *this;
    }
    MultiPoly g = poly_gcd(den_, o.den_);
    if (g.is_constant()) {
        num_ = num_ * o.den_ + on * den_;
        den_ = den_ * o.den_;
        if (num_.is_zero()) den_ = MultiPoly::constant(chart(), Rational(1));
        make_monic_den();
        return *this;
    }
    MultiPoly da = *divide_exact(den_, g), db = *divide_exact(o.den_, g);
    MultiPoly t = num_ * db + on * da;
    if (t.is_zero()) {
        num_ = std::move(t);
        den_ = MultiPoly::constant(chart(), Rational(1));
        return *this;
    }
    MultiPoly h = poly_gcd(t, g);
    if (h.is_constant()) {
        num_ = std::move(t);
        den_ = den_ * db;
    } else {
        num_ = *divide_exact(t, h);
        den_ = da * *divide_exact(o.den_, h);
    }
    make_monic_den();
    return *this;
}

RationalFunction& RationalFunction::operator+=(const RationalFunction& o) {
    return add_scaled(o, false);
}

RationalFunction& RationalFunction::operator-=(const RationalFunction& o) {
    return add_scaled(o, true);
}

RationalFunction& RationalFunction::operator*=(const RationalFunction& o) {
    require_same_chart(chart(), o.chart(), "rational *");
    if (is_zero() || o.is_zero()) {
        num_ = MultiPoly::zero(chart());
        den_ = MultiPoly::constant(chart(), Rational(1));
        return *this;
    }
    MultiPoly g1 = poly_gcd(num_, o.den_), g2 = poly_gcd(o.num_, den_);
    MultiPoly n1 = g1.is_constant() ? num_ : *divide_exact(num_, g1);
    MultiPoly d2 = g1.is_constant() ? o.den_ : *divide_exact(o.den_, g1);
    MultiPoly n2 = g2.is_constant() ? o.num_ : *divide_exact(o.num_, g2);
    MultiPoly d1 = g2.is_constant() ? den_ : *divide_exact(den_, g2);
    num_ = n1 * n2;
    den_ = d1 * d2;
    make_monic_den();
    return *this;
}

RationalFunction& RationalFunction::operator/=(const RationalFunction& o) {
    require_same_chart(chart(), o.chart(), "rational /");
    if (o.is_zero()) throw DivisionByZero();
    RationalFunction recip;  // reciprocal of a canonical fraction: swap, re-monic
    recip.num_ = o.den_;
    recip.den_ = o.num_;
    recip.make_monic_den();
    return *this *= recip;
}

RationalFunction RationalFunction::scaled(const Rational& c) const {
    RationalFunction r = *this;
    r.num_ = r.num_.scaled(c);
    if (c.is_zero()) r.normalize();
    return r;
}

RationalFunction RationalFunction::pow(long e) const {
    if (e == 0) return constant(chart(), Rational(1));
    const MultiPoly* n = &num_;
    const MultiPoly* d = &den_;
    if (e < 0) {
        if (is_zero()) throw DivisionByZero();
        std::swap(n, d);
        e = -e;
    }
    // Powers of a canonical fraction stay coprime; only a monic rescale of
    // the denominator may be needed (after swapping for negative exponents).
    RationalFunction r;
    r.num_ = n->pow(static_cast<unsigned>(e));
    r.den_ = d->pow(static_cast<unsigned>(e));
    r.make_monic_den();
    return r;
}

bool operator==(const RationalFunction& a, const RationalFunction& b) {
    // Canonical form makes structural comparison a complete decision.
    return a.num_ == b.num_ && a.den_ == b.den_;
}

RationalFunction RationalFunction::derivative(std::size_t var) const {
    MultiPoly n = num_.derivative(var) * den_ - num_ * den_.derivative(var);
    return RationalFunction(std::move(n), den_ * den_);
}

Rational RationalFunction::evaluate(const std::vector<Rational>& point) const {
    Rational d = den_.evaluate(point);
    if (d.is_zero()) {
        std::string p = "(";
        for (std::size_t i = 0; i < point.size(); ++i)
            p += (i ? ", " : "") + point[i].str();
        throw PoleAtPoint(p + ")");
    }
    return num_.evaluate(point) / d;
}

RationalFunction RationalFunction::substitute(const std::vector<MultiPoly>& images,
                                              ChartPtr target) const {
    MultiPoly n = num_.substitute(images, target);
    MultiPoly d = den_.substitute(images, target);
    if (d.is_zero()) throw DivisionByZero();
    return RationalFunction(std::move(n), std::move(d));
}

std::string RationalFunction::str() const {
    if (is_polynomial()) {
        Rational dc = den_.constant_value();
        if (dc.is_one()) return num_.str();
        return num_.scaled(dc.inverse()).str();
    }
    std::string n = num_.str();
    if (num_.terms().size() > 1) n = "(" + n + ")";
    return n + "/(" + den_.str() + ")";
}

} // namespace nambukit
