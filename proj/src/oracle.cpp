#include "nambukit/oracle.hpp"

#include <utility>

namespace nambukit {

namespace {

constexpr int kPoleRetryCap = 100;

// Evaluates f at p; nullopt on a pole.
std::optional<Rational> try_eval(const RationalFunction& f, const std::vector<Rational>& p) {
    try {
        return f.evaluate(p);
    } catch (const PoleAtPoint&) {
        return std::nullopt;
    }
}

} // namespace

std::string OracleOutcome::str() const {
    std::string s = "agreed at " + std::to_string(points) + " points";
    if (mismatches > 0)
        s = std::to_string(mismatches) + " mismatches in " + std::to_string(points) +
            " points (" + *first_mismatch + ")";
    if (skipped > 0) s += ", " + std::to_string(skipped) + " skipped on poles";
    return s;
}

PointSampler::PointSampler(ChartPtr chart, unsigned seed)
    : chart_(std::move(chart)), rng_(seed) {}

Rational PointSampler::next_scalar() {
    std::uniform_int_distribution<long> pick(-9, 9);
    long n = pick(rng_);
    long d = 0;
    while (d == 0) d = pick(rng_);
    return Rational(n, d);
}

std::vector<Rational> PointSampler::next() {
    std::vector<Rational> p;
    p.reserve(chart_->size());
    for (std::size_t i = 0; i < chart_->size(); ++i) p.push_back(next_scalar());
    return p;
}

OracleOutcome oracle_fi(const NambuStructure& pi, int points, unsigned seed) {
    const ChartPtr& chart = pi.chart();
    const int n = pi.order();
    const std::size_t m = chart->coord_count();
    PointSampler sampler(chart, seed);

    auto random_affine = [&] {
        MultiPoly f = MultiPoly::constant(chart, sampler.next_scalar());
        for (std::size_t i = 0; i < m; ++i)
            f += MultiPoly::variable(chart, i).scaled(sampler.next_scalar());
        return RationalFunction(std::move(f));
    };

    OracleOutcome out;
    for (int k = 0; k < points; ++k) {
        std::vector<RationalFunction> g, f;
        for (int i = 0; i + 1 < n; ++i) g.push_back(random_affine());
        for (int i = 0; i < n; ++i) f.push_back(random_affine());

        RationalFunction residual = bracket(pi, [&] {
            auto outer = g;
            outer.push_back(bracket(pi, f));
            return outer;
        }());
        for (int k2 = 0; k2 < n; ++k2) {
            auto inner = g;
            inner.push_back(f[k2]);
            auto args = f;
            args[k2] = bracket(pi, inner);
            residual -= bracket(pi, args);
        }

        bool placed = false;
        for (int attempt = 0; attempt < kPoleRetryCap && !placed; ++attempt) {
            auto v = try_eval(residual, sampler.next());
            if (!v) continue;
            placed = true;
            ++out.points;
            if (!v->is_zero() && ++out.mismatches == 1)
                out.first_mismatch = "fundamental identity residual " + v->str();
        }
        if (!placed) ++out.skipped;
    }
    return out;
}

OracleOutcome oracle_pair_adjunction(const NambuStructure& pi, int points, unsigned seed) {
    const ChartPtr& chart = pi.chart();
    const int m = static_cast<int>(chart->coord_count());
    PointSampler sampler(chart, seed);

    OracleOutcome out;
    for (int k = 0; k < points; ++k) {
        Form eta(chart, pi.order() - 1);
        for (const MultiIndex& idx : basis_blades(m, pi.order() - 1))
            eta.add_term(idx, RationalFunction::constant(chart, sampler.next_scalar()));
        Form beta(chart, 1);
        for (int i = 0; i < m; ++i)
            beta.add_term({i}, RationalFunction::constant(chart, sampler.next_scalar()));

        RationalFunction lhs = pair(beta, sharp(pi, eta));
        RationalFunction rhs = pair(wedge(eta, beta), pi.tensor());

        bool placed = false;
        for (int attempt = 0; attempt < kPoleRetryCap && !placed; ++attempt) {
            auto p = sampler.next();
            auto a = try_eval(lhs, p);
            auto b = try_eval(rhs, p);
            if (!a || !b) continue;
            placed = true;
            ++out.points;
            if (*a != *b && ++out.mismatches == 1)
                out.first_mismatch = "pairing adjunction " + a->str() + " vs " + b->str();
        }
        if (!placed) ++out.skipped;
    }
    return out;
}

OracleOutcome oracle_anchor(const NambuStructure& pi, const Form& b, int points,
                            unsigned seed) {
    const ChartPtr& chart = pi.chart();
    const int m = static_cast<int>(chart->coord_count());
    NambuStructure t = gauge_transform(pi, b);
    PointSampler sampler(chart, seed);

    OracleOutcome out;
    for (int k = 0; k < points; ++k) {
        Form alpha(chart, pi.order() - 1);
        for (const MultiIndex& idx : basis_blades(m, pi.order() - 1))
            alpha.add_term(idx, RationalFunction::constant(chart, sampler.next_scalar()));
        Multivector lhs = sharp(pi, alpha);
        Multivector rhs = sharp(t, alpha + interior(lhs, b));

        bool placed = false;
        for (int attempt = 0; attempt < kPoleRetryCap && !placed; ++attempt) {
            auto p = sampler.next();
            bool pole = false, differ = false;
            std::string detail;
            for (int i = 0; i < m && !pole; ++i) {
                auto a = try_eval(lhs.coeff({i}), p);
                auto c = try_eval(rhs.coeff({i}), p);
                if (!a || !c) {
                    pole = true;
                } else if (*a != *c && !differ) {
                    differ = true;
                    detail = "anchor component " + chart->name(i) + ": " + a->str() +
                             " vs " + c->str();
                }
            }
            if (pole) continue;
            placed = true;
            ++out.points;
            if (differ && ++out.mismatches == 1) out.first_mismatch = detail;
        }
        if (!placed) ++out.skipped;
    }
    return out;
}

OracleOutcome oracle_scalar_equal(const RationalFunction& a, const RationalFunction& b,
                                  int points, unsigned seed) {
    require_same_chart(a.chart(), b.chart(), "oracle");
    PointSampler sampler(a.chart(), seed);
    OracleOutcome out;
    for (int k = 0; k < points; ++k) {
        bool placed = false;
        for (int attempt = 0; attempt < kPoleRetryCap && !placed; ++attempt) {
            auto p = sampler.next();
            auto va = try_eval(a, p);
            auto vb = try_eval(b, p);
            if (!va || !vb) continue;
            placed = true;
            ++out.points;
            if (*va != *vb && ++out.mismatches == 1)
                out.first_mismatch = va->str() + " vs " + vb->str();
        }
        if (!placed) ++out.skipped;
    }
    return out;
}

OracleOutcome oracle_tensor_equal(const Multivector& a, const Multivector& b, int points,
                                  unsigned seed) {
    require_same_chart(a.chart(), b.chart(), "oracle");
    if (a.degree() != b.degree()) throw DegreeMismatch("oracle tensor comparison");
    const int m = static_cast<int>(a.chart()->coord_count());
    PointSampler sampler(a.chart(), seed);

    OracleOutcome out;
    auto blades = basis_blades(m, a.degree());
    for (int k = 0; k < points; ++k) {
        bool placed = false;
        for (int attempt = 0; attempt < kPoleRetryCap && !placed; ++attempt) {
            auto p = sampler.next();
            bool pole = false, differ = false;
            std::string detail;
            for (const MultiIndex& idx : blades) {
                auto va = try_eval(a.coeff(idx), p);
                auto vb = try_eval(b.coeff(idx), p);
                if (!va || !vb) {
                    pole = true;
                    break;
                }
                if (*va != *vb && !differ) {
                    differ = true;
                    detail = "component " + std::to_string(idx.empty() ? -1 : idx[0]) +
                             ": " + va->str() + " vs " + vb->str();
                }
            }
            if (pole) continue;
            placed = true;
            ++out.points;
            if (differ && ++out.mismatches == 1) out.first_mismatch = detail;
        }
        if (!placed) ++out.skipped;
    }
    return out;
}

} // namespace nambukit
