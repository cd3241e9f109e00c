#include "nambukit/gauge.hpp"

#include <algorithm>
#include <map>
#include <random>
#include <string>
#include <utility>

namespace nambukit {

namespace {

Multivector row_to_field(const ChartPtr& chart, const QVec& row) {
    Multivector v(chart, 1);
    for (std::size_t i = 0; i < row.size(); ++i)
        if (!row[i].is_zero())
            v.add_term({static_cast<int>(i)},
                       RationalFunction::constant(chart, row[i]));
    return v;
}

Form restrict_coefficients(const Form& f, const SubmanifoldSpec& n) {
    Form r(f.chart(), f.degree());
    for (const auto& [idx, c] : f.terms()) r.add_term(idx, n.pull_back(c));
    return r;
}

} // namespace

Form btilde(const Form& b, const Multivector& x) {
    return interior(x, b);
}

GaugeData gauge_matrix(const NambuStructure& pi, const Form& b) {
    require_same_chart(pi.chart(), b.chart(), "gauge");
    const int n = pi.order();
    if (b.degree() != n)
        throw DegreeMismatch("gauge form degree differs from the structure order");
    if (!exterior_d(b).is_zero())
        throw NotClosed("gauge form is not closed");

    const ChartPtr& chart = pi.chart();
    const int m = static_cast<int>(chart->coord_count());
    const RationalFunction zero = RationalFunction::zero(chart);
    const RationalFunction one = RationalFunction::constant(chart, Rational(1));

    std::vector<MultiIndex> blades = basis_blades(m, n - 1);
    const std::size_t dim = blades.size();
    if (dim == 0) {
        // No (n-1)-forms at all, so the endomorphism is the (empty) identity.
        Mat<RationalFunction> empty(0, 0, zero);
        return GaugeData{b, std::move(blades), empty, one, one.num(), empty, pi};
    }

    Mat<RationalFunction> mat(dim, dim, zero);
    for (std::size_t i = 0; i < dim; ++i) {
        Form eta = Form::blade(chart, blades[i], one);
        Form image = eta + interior(sharp(pi, eta), b);
        for (std::size_t j = 0; j < dim; ++j) mat.at(j, i) = image.coeff(blades[j]);
    }

    RationalFunction d = det(mat, one);
    if (d.is_zero())
        throw SingularEverywhere("gauge endomorphism determinant vanishes identically");
    MultiPoly locus = d.num();
    auto inv = invert(mat, zero, one);
    if (!inv)
        throw SingularEverywhere("gauge endomorphism is not invertible");

    std::map<MultiIndex, std::size_t> column_of;
    for (std::size_t i = 0; i < dim; ++i) column_of[blades[i]] = i;

    auto inverse_image = [&](std::size_t col) {
        Form f(chart, n - 1);
        for (std::size_t j = 0; j < dim; ++j) f.add_term(blades[j], inv->at(j, col));
        return f;
    };

    // Coefficient on the n-blade K reads off the last slot of the image of
    // d x^{K without its last index} under sharp o inverse.
    Multivector t(chart, n);
    for (const MultiIndex& k : basis_blades(m, n)) {
        MultiIndex head(k.begin(), k.end() - 1);
        Multivector x = sharp(pi, inverse_image(column_of.at(head)));
        t.add_term(k, x.coeff({k.back()}));
    }
    NambuStructure out(n, std::move(t));

    // Reconstruction used one column per n-blade; agreement on every column
    // is exactly skew-symmetry of sharp o inverse in its full slot set.
    for (std::size_t i = 0; i < dim; ++i) {
        Form eta = Form::blade(chart, blades[i], one);
        if (sharp(out, eta) != sharp(pi, inverse_image(i)))
            throw SkewSymmetryViolated("transported sharp map is not alternating");
    }

    if (!check_fi(out).verified)
        throw NambuError("transported tensor failed the fundamental identity");

    return GaugeData{b,        std::move(blades), std::move(mat), std::move(d),
                     std::move(locus), std::move(*inv),   std::move(out)};
}

NambuStructure gauge_transform(const NambuStructure& pi, const Form& b) {
    return gauge_matrix(pi, b).transported;
}

bool check_characteristic_match(const NambuStructure& a, const NambuStructure& b,
                                int sample_count, unsigned seed) {
    require_same_chart(a.chart(), b.chart(), "characteristic match");
    if (a.order() != b.order())
        throw DegreeMismatch("characteristic match needs equal orders");

    const ChartPtr& chart = a.chart();
    const int m = static_cast<int>(chart->coord_count());
    const RationalFunction one = RationalFunction::constant(chart, Rational(1));

    std::vector<Multivector> cols_a, cols_b;
    for (const MultiIndex& idx : basis_blades(m, a.order() - 1)) {
        Form eta = Form::blade(chart, idx, one);
        cols_a.push_back(sharp(a, eta));
        cols_b.push_back(sharp(b, eta));
    }

    auto span_at = [&](const std::vector<Multivector>& cols,
                       const std::vector<Rational>& p) {
        std::vector<QVec> rows;
        for (const Multivector& x : cols) {
            QVec v(m, Rational(0));
            for (int i = 0; i < m; ++i) v[i] = x.coeff({i}).evaluate(p);
            rows.push_back(std::move(v));
        }
        return q_span_basis(rows, m);
    };

    std::mt19937 rng(seed);
    std::uniform_int_distribution<long> num(-9, 9);
    std::uniform_int_distribution<long> den(1, 9);
    int done = 0;
    int attempts = 0;
    while (done < sample_count) {
        if (++attempts > 100 * sample_count + 100)
            throw NambuError("no pole-free sample points for the characteristic match");
        std::vector<Rational> p;
        for (std::size_t i = 0; i < chart->size(); ++i) p.emplace_back(num(rng), den(rng));
        try {
            if (span_at(cols_a, p) != span_at(cols_b, p)) return false;
        } catch (const PoleAtPoint&) {
            continue;
        }
        ++done;
    }
    return true;
}

LeibnizIsoReport check_leibniz_iso(const NambuStructure& pi, const Form& b) {
    GaugeData g = gauge_matrix(pi, b);
    const ChartPtr& chart = pi.chart();
    const RationalFunction one = RationalFunction::constant(chart, Rational(1));

    auto phi = [&](const Form& f) { return f + interior(sharp(pi, f), b); };

    for (const MultiIndex& ia : g.blades) {
        Form alpha = Form::blade(chart, ia, one);
        if (sharp(pi, alpha) != sharp(g.transported, phi(alpha)))
            return {false, LeibnizPairWitness{ia, ia}};
        for (const MultiIndex& ib : g.blades) {
            Form beta = Form::blade(chart, ib, one);
            Form lhs = phi(leibniz_bracket(pi, alpha, beta));
            Form rhs = leibniz_bracket(g.transported, phi(alpha), phi(beta));
            if (lhs != rhs) return {false, LeibnizPairWitness{ia, ib}};
        }
    }
    return {true, std::nullopt};
}

CommuteReport gauge_reduce_commute(const ReductionProblem& p, const Form& b) {
    const NambuStructure& pi = p.structure();
    const SubmanifoldSpec& sub = p.submanifold();
    const ChartPtr& chart = pi.chart();

    std::optional<GaugeData> g;
    try {
        g.emplace(gauge_matrix(pi, b));
    } catch (const SingularEverywhere& e) {
        throw HypothesesFailed(std::string("invertibility: ") + e.what());
    }

    // (a): contracting the gauge form along TN must land in the first-slot
    // annihilator of E, checked over N.
    for (const QVec& trow : sub.tangent_basis()) {
        Form beta = btilde(b, row_to_field(chart, trow));
        for (const Multivector& ev : p.e_bundle().spanning_vectors())
            if (!restrict_coefficients(interior(ev, beta), sub).is_zero())
                throw HypothesesFailed(
                    "hypothesis (a): contracting the gauge form along TN does not kill E on N");
    }

    // (b), frame part: the gauge form is basic for the collapsed directions.
    for (const QVec& frow : p.f_rows()) {
        Multivector x = row_to_field(chart, frow);
        if (!restrict_coefficients(interior(x, b), sub).is_zero())
            throw HypothesesFailed(
                "hypothesis (b): the gauge form does not vanish on F directions over N");
        if (!restrict_coefficients(lie_derivative(x, b), sub).is_zero())
            throw HypothesesFailed("hypothesis (b): the gauge form varies along F over N");
    }

    ReducedStructure red = [&] {
        try {
            return reduce(p);
        } catch (const HypothesesFailed& e) {
            throw HypothesesFailed(std::string("reducibility: ") + e.what());
        }
    }();

    // Classify adapted coordinates: the quotient block by name, the rest by
    // whether the dual coordinate direction is tangent to N (collapsed) or
    // transverse (a constraint, so it vanishes on N).
    const AffineMap& ad = red.adapted_map;
    const ChartPtr& tchart = ad.target();
    const ChartPtr& qchart = red.quotient_chart;
    const std::size_t m = chart->coord_count();

    std::vector<bool> is_q(m, false), is_t(m, false);
    std::vector<std::size_t> q_pos;
    for (std::size_t k = 0; k < qchart->coord_count(); ++k) {
        auto idx = tchart->index_of(qchart->name(k));
        q_pos.push_back(*idx);
        is_q[*idx] = true;
    }
    for (std::size_t k = 0; k < m; ++k) {
        if (is_q[k]) continue;
        QVec col(m, Rational(0));
        for (std::size_t r = 0; r < m; ++r) col[r] = ad.matrix_inverse().at(r, k);
        if (!q_in_span(col, sub.tangent_basis())) is_t[k] = true;
    }

    std::vector<MultiPoly> onto_n;
    for (std::size_t i = 0; i < tchart->size(); ++i)
        onto_n.push_back(i < m && is_t[i] ? MultiPoly::zero(tchart)
                                          : MultiPoly::variable(tchart, i));
    std::vector<MultiPoly> onto_quotient(tchart->size(), MultiPoly::zero(qchart));
    for (std::size_t qi = 0; qi < q_pos.size(); ++qi)
        onto_quotient[q_pos[qi]] = MultiPoly::variable(qchart, qi);
    for (std::size_t i = m; i < tchart->size(); ++i)
        onto_quotient[i] = MultiPoly::variable(qchart, q_pos.size() + (i - m));

    // Project the gauge form: push to the adapted chart, restrict to N,
    // require the survivors to use quotient differentials and quotient
    // variables only, then rename onto the quotient chart.
    Form pushed = ad.push(b);
    Form bbar(qchart, b.degree());
    for (const auto& [idx, c] : pushed.terms()) {
        bool pure_q = true, has_t = false;
        for (int i : idx) {
            if (!is_q[i]) pure_q = false;
            if (is_t[i]) has_t = true;
        }
        RationalFunction cr = c.substitute(onto_n, tchart);
        if (cr.is_zero()) continue;
        if (!pure_q) {
            if (has_t) continue;  // constraint differentials die on N
            throw HypothesesFailed(
                "hypothesis (b): the gauge form keeps a collapsed differential on N");
        }
        for (std::size_t k = 0; k < m; ++k)
            if (!is_q[k] && !is_t[k] && (cr.num().involves(k) || cr.den().involves(k)))
                throw HypothesesFailed(
                    "hypothesis (b): a surviving gauge coefficient depends on a collapsed "
                    "coordinate");
        MultiIndex qidx;
        for (int i : idx) {
            auto it = std::find(q_pos.begin(), q_pos.end(), static_cast<std::size_t>(i));
            qidx.push_back(static_cast<int>(it - q_pos.begin()));
        }
        bbar.add_term(std::move(qidx), cr.substitute(onto_quotient, qchart));
    }

    NambuStructure path2 = [&] {
        try {
            return gauge_transform(red.tensor, bbar);
        } catch (const SingularEverywhere& e) {
            throw HypothesesFailed(std::string("invertibility on the quotient: ") + e.what());
        }
    }();

    ReducedStructure red_g = [&] {
        try {
            return reduce(ReductionProblem(g->transported, sub, p.e_bundle(), p.d_bundle(),
                                           p.adapted_map()));
        } catch (const HypothesesFailed& e) {
            throw HypothesesFailed(std::string("reducibility of the gauged structure: ") +
                                   e.what());
        }
    }();

    bool equal = red_g.tensor.tensor() == path2.tensor();
    return CommuteReport{equal, std::move(red_g.tensor), std::move(path2), std::move(bbar)};
}

} // namespace nambukit
