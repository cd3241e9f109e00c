#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <functional>
#include <string>

#include "gen.hpp"
#include "nambukit/gauge.hpp"

using namespace nambukit;

namespace {

ChartPtr r3() { return Chart::make({"x", "y", "z"}, {}); }
ChartPtr r4() { return Chart::make({"x", "y", "z", "w"}, {}); }
ChartPtr r3c() { return Chart::make({"x", "y", "z"}, {"c"}); }
ChartPtr r4c() { return Chart::make({"x", "y", "z", "w"}, {"c"}); }

RationalFunction rf_const(const ChartPtr& c, long v) {
    return RationalFunction::constant(c, Rational(v));
}

RationalFunction var(const ChartPtr& c, std::size_t i) {
    return RationalFunction::variable(c, i);
}

MultiPoly pvar(const ChartPtr& c, std::size_t i) { return MultiPoly::variable(c, i); }

MultiPoly pone(const ChartPtr& c) { return MultiPoly::constant(c, Rational(1)); }

Multivector unit_field(const ChartPtr& c, int i) {
    return Multivector::blade(c, {i}, rf_const(c, 1));
}

Multivector blade_mv(const ChartPtr& c, MultiIndex idx, RationalFunction f) {
    return Multivector::blade(c, std::move(idx), std::move(f));
}

Form blade_form(const ChartPtr& c, MultiIndex idx) {
    return Form::blade(c, std::move(idx), rf_const(c, 1));
}

SubmanifoldSpec hyperplane(const ChartPtr& c, std::size_t i) {
    return SubmanifoldSpec(c, {pvar(c, i)});
}

SubmanifoldSpec whole(const ChartPtr& c) { return SubmanifoldSpec(c, {}); }

SubbundleSpec coord_bundle(const SubmanifoldSpec& n, const std::vector<int>& dirs) {
    std::vector<Multivector> span;
    for (int i : dirs) span.push_back(unit_field(n.chart(), i));
    return SubbundleSpec(n, span);
}

NambuStructure scaled_volume(const ChartPtr& c, const RationalFunction& f) {
    return NambuStructure(3, blade_mv(c, {0, 1, 2}, f));
}

Mat<RationalFunction> mat_mul(const Mat<RationalFunction>& a, const Mat<RationalFunction>& b,
                              const ChartPtr& chart) {
    REQUIRE(a.cols == b.rows);
    Mat<RationalFunction> r(a.rows, b.cols, RationalFunction::zero(chart));
    for (std::size_t i = 0; i < a.rows; ++i)
        for (std::size_t j = 0; j < b.cols; ++j)
            for (std::size_t k = 0; k < a.cols; ++k)
                r.at(i, j) += a.at(i, k) * b.at(k, j);
    return r;
}

bool thrown_with(const std::function<void()>& fn, const std::string& needle) {
    try {
        fn();
    } catch (const NambuError& e) {
        return std::string(e.what()).find(needle) != std::string::npos;
    }
    return false;
}

} // namespace

TEST_CASE("slot map of an n-form") {
    auto c = r3();
    Form vol = blade_form(c, {0, 1, 2});

    CHECK(btilde(vol, unit_field(c, 0)) == blade_form(c, {1, 2}));
    CHECK(btilde(vol, unit_field(c, 1)) == -blade_form(c, {0, 2}));
    CHECK(btilde(vol, unit_field(c, 2)) == blade_form(c, {0, 1}));

    Form scaled = Form::blade(c, {0, 1, 2}, var(c, 0));
    CHECK(btilde(scaled, unit_field(c, 1)) == Form::blade(c, {0, 2}, -var(c, 0)));

    auto c4 = r4();
    CHECK(btilde(blade_form(c4, {0, 1, 2}), unit_field(c4, 3)).is_zero());

    CHECK_THROWS_AS(btilde(vol, blade_mv(c, {0, 1}, rf_const(c, 1))), DegreeMismatch);
}

TEST_CASE("gauge with the zero form is the identity") {
    auto c = r3();
    NambuStructure pi = scaled_volume(c, rf_const(c, 1));
    GaugeData g = gauge_matrix(pi, Form(c, 3));

    REQUIRE(g.blades.size() == 3);
    CHECK(g.blades[0] == MultiIndex{0, 1});
    CHECK(g.blades[2] == MultiIndex{1, 2});
    for (std::size_t i = 0; i < 3; ++i)
        for (std::size_t j = 0; j < 3; ++j) {
            CHECK(g.matrix.at(i, j) == rf_const(c, i == j ? 1 : 0));
            CHECK(g.inverse.at(i, j) == rf_const(c, i == j ? 1 : 0));
        }
    CHECK(g.det == rf_const(c, 1));
    CHECK(g.vanishing_locus == pone(c));
    CHECK(g.transported.tensor() == pi.tensor());
    CHECK(g.transported.fi_status() == FiStatus::verified);
}

TEST_CASE("constant multiple of the volume form rescales the matrix diagonal") {
    auto c = r3c();
    NambuStructure pi = scaled_volume(c, rf_const(c, 1));
    Form b = Form::blade(c, {0, 1, 2}, var(c, 3));  // c dx^dy^dz, c a parameter
    GaugeData g = gauge_matrix(pi, b);

    RationalFunction diag = rf_const(c, 1) + var(c, 3);
    for (std::size_t i = 0; i < 3; ++i)
        for (std::size_t j = 0; j < 3; ++j)
            CHECK(g.matrix.at(i, j) == (i == j ? diag : RationalFunction::zero(c)));
    CHECK(g.det == diag * diag * diag);
    MultiPoly lin = pone(c) + pvar(c, 3);
    CHECK(g.vanishing_locus == lin * lin * lin);

    // T = (1/(1+c)) Pi
    CHECK(g.transported.tensor() ==
          blade_mv(c, {0, 1, 2}, rf_const(c, 1) / diag));
    CHECK(g.transported.fi_status() == FiStatus::verified);
    CHECK(gauge_transform(pi, b).tensor() == g.transported.tensor());
}

TEST_CASE("coordinate coefficient introduces a vanishing locus") {
    auto c = r3();
    NambuStructure pi = scaled_volume(c, rf_const(c, 1));
    Form b = Form::blade(c, {0, 1, 2}, var(c, 0));  // x dx^dy^dz
    GaugeData g = gauge_matrix(pi, b);

    RationalFunction diag = rf_const(c, 1) + var(c, 0);
    CHECK(g.det == diag * diag * diag);
    MultiPoly lin = pone(c) + pvar(c, 0);
    CHECK(g.vanishing_locus == lin * lin * lin);  // pointwise degeneracy exactly at x = -1
    CHECK(g.transported.tensor() == blade_mv(c, {0, 1, 2}, rf_const(c, 1) / diag));
    CHECK(g.transported.fi_status() == FiStatus::verified);
}

TEST_CASE("transport of a scaled volume on a larger chart") {
    auto c = r4();
    NambuStructure pi = scaled_volume(c, var(c, 3));  // w Dx^Dy^Dz
    Form b = Form::blade(c, {0, 1, 2}, rf_const(c, 2));
    GaugeData g = gauge_matrix(pi, b);

    RationalFunction diag = rf_const(c, 1) + rf_const(c, 2) * var(c, 3);
    CHECK(g.det == diag * diag * diag);
    CHECK(g.transported.tensor() == blade_mv(c, {0, 1, 2}, var(c, 3) / diag));
    CHECK(g.transported.fi_status() == FiStatus::verified);

    // Blades meeting Dw are fixed: their sharps vanish.
    auto pos = [&](MultiIndex idx) {
        for (std::size_t i = 0; i < g.blades.size(); ++i)
            if (g.blades[i] == idx) return i;
        REQUIRE(false);
        return std::size_t(0);
    };
    for (MultiIndex idx : {MultiIndex{0, 3}, MultiIndex{1, 3}, MultiIndex{2, 3}}) {
        std::size_t j = pos(idx);
        for (std::size_t i = 0; i < g.blades.size(); ++i)
            CHECK(g.matrix.at(i, j) == (i == j ? rf_const(c, 1) : RationalFunction::zero(c)));
    }
}

TEST_CASE("order-two transport") {
    auto c = r3();
    NambuStructure pi(2, blade_mv(c, {0, 1}, var(c, 2)));  // z Dx^Dy
    Form b = blade_form(c, {0, 1});
    GaugeData g = gauge_matrix(pi, b);

    RationalFunction one = rf_const(c, 1);
    RationalFunction d = one - var(c, 2);
    REQUIRE(g.blades.size() == 3);  // dx, dy, dz
    CHECK(g.matrix.at(0, 0) == d);
    CHECK(g.matrix.at(1, 1) == d);
    CHECK(g.matrix.at(2, 2) == one);
    CHECK(g.det == d * d);
    CHECK(g.transported.tensor() == blade_mv(c, {0, 1}, var(c, 2) / d));
    CHECK(g.transported.fi_status() == FiStatus::verified);
}

TEST_CASE("gauge input validation") {
    auto c = r3();
    auto c4 = r4();
    NambuStructure pi = scaled_volume(c, rf_const(c, 1));

    CHECK_THROWS_AS(gauge_matrix(pi, blade_form(c, {0, 1})), DegreeMismatch);
    CHECK_THROWS_AS(gauge_matrix(pi, blade_form(c4, {0, 1, 2})), ChartMismatch);

    // w dx^dy^dz is not closed on the 4-chart.
    NambuStructure pi4 = scaled_volume(c4, rf_const(c4, 1));
    CHECK_THROWS_AS(gauge_matrix(pi4, Form::blade(c4, {0, 1, 2}, var(c4, 3))), NotClosed);

    // B = -dx^dy^dz makes Id + btilde o sharp identically singular.
    CHECK_THROWS_AS(gauge_matrix(pi, Form::blade(c, {0, 1, 2}, rf_const(c, -1))),
                    SingularEverywhere);
    CHECK_THROWS_AS(gauge_transform(pi, Form::blade(c, {0, 1, 2}, rf_const(c, -1))),
                    SingularEverywhere);
}

TEST_CASE("consecutive gauges add the forms") {
    auto c = r3();
    NambuStructure pi = scaled_volume(c, rf_const(c, 1));
    Form b1 = Form::blade(c, {0, 1, 2}, rf_const(c, 2));
    Form b2 = Form::blade(c, {0, 1, 2}, var(c, 0));

    GaugeData g1 = gauge_matrix(pi, b1);
    GaugeData g2 = gauge_matrix(g1.transported, b2);
    GaugeData combined = gauge_matrix(pi, b1 + b2);

    CHECK(g2.transported.tensor() == combined.transported.tensor());
    CHECK(g2.transported.tensor() ==
          blade_mv(c, {0, 1, 2}, rf_const(c, 1) / (rf_const(c, 3) + var(c, 0))));

    // The second endomorphism composed with the first is the combined one.
    Mat<RationalFunction> prod = mat_mul(g2.matrix, g1.matrix, c);
    for (std::size_t i = 0; i < prod.rows; ++i)
        for (std::size_t j = 0; j < prod.cols; ++j)
            CHECK(prod.at(i, j) == combined.matrix.at(i, j));
}

TEST_CASE("pointwise span comparison of sharp images") {
    auto c = r3();
    NambuStructure pi = scaled_volume(c, rf_const(c, 1));

    SUBCASE("a gauge transport preserves the distribution") {
        NambuStructure t = gauge_transform(pi, Form::blade(c, {0, 1, 2}, var(c, 0)));
        CHECK(check_characteristic_match(pi, t, 50));
        CHECK(check_characteristic_match(pi, t, 50, 7u));
    }
    SUBCASE("a global rescale preserves it") {
        RationalFunction f = rf_const(c, 1) + var(c, 0) * var(c, 0);
        CHECK(check_characteristic_match(pi, scaled_volume(c, f), 50));
    }
    SUBCASE("the zero structure does not") {
        NambuStructure zero(3, Multivector(c, 3));
        CHECK_FALSE(check_characteristic_match(pi, zero, 50));
        CHECK(check_characteristic_match(zero, zero, 10));
    }
    SUBCASE("different coordinate volumes differ") {
        auto c4 = r4();
        NambuStructure a = scaled_volume(c4, rf_const(c4, 1));
        NambuStructure b(3, blade_mv(c4, {0, 1, 3}, rf_const(c4, 1)));
        CHECK_FALSE(check_characteristic_match(a, b, 50));
    }
    SUBCASE("order mismatch is rejected") {
        NambuStructure two(2, blade_mv(c, {0, 1}, rf_const(c, 1)));
        CHECK_THROWS_AS(check_characteristic_match(pi, two, 5), DegreeMismatch);
    }
}

TEST_CASE("gauge map is a bracket isomorphism") {
    auto c = r3c();
    NambuStructure pi = scaled_volume(c, rf_const(c, 1));

    SUBCASE("constant form") {
        LeibnizIsoReport rep = check_leibniz_iso(pi, Form::blade(c, {0, 1, 2}, var(c, 3)));
        CHECK(rep.holds);
        CHECK_FALSE(rep.witness.has_value());
    }
    SUBCASE("coordinate coefficient") {
        auto c3 = r3();
        NambuStructure p3 = scaled_volume(c3, rf_const(c3, 1));
        LeibnizIsoReport rep = check_leibniz_iso(p3, Form::blade(c3, {0, 1, 2}, var(c3, 0)));
        CHECK(rep.holds);
        CHECK_FALSE(rep.witness.has_value());
    }
    SUBCASE("nonflat structure") {
        auto c4 = r4();
        NambuStructure p4 = scaled_volume(c4, var(c4, 3));
        LeibnizIsoReport rep =
            check_leibniz_iso(p4, Form::blade(c4, {0, 1, 2}, rf_const(c4, 2)));
        CHECK(rep.holds);
    }
    SUBCASE("order two") {
        auto c3 = r3();
        NambuStructure p2(2, blade_mv(c3, {0, 1}, var(c3, 2)));
        LeibnizIsoReport rep = check_leibniz_iso(p2, blade_form(c3, {0, 1}));
        CHECK(rep.holds);
    }
}

TEST_CASE("anchor intertwining on every basis form") {
    auto c = r3();
    NambuStructure pi = scaled_volume(c, rf_const(c, 1));
    Form b = Form::blade(c, {0, 1, 2}, var(c, 0));
    NambuStructure t = gauge_transform(pi, b);

    for (const MultiIndex& idx : basis_blades(3, 2)) {
        Form alpha = blade_form(c, idx);
        Form moved = alpha + interior(sharp(pi, alpha), b);
        CHECK(sharp(t, moved) == sharp(pi, alpha));
    }
}

TEST_CASE("gauge commutes with reduction") {
    SUBCASE("zero form, graph submanifold") {
        auto c = r4();
        NambuStructure pi = scaled_volume(c, var(c, 3));  // w Dx^Dy^Dz
        SubmanifoldSpec n(c, {pvar(c, 3) - pvar(c, 0)});  // {w = x}
        ReductionProblem p(pi, n, coord_bundle(n, {3}));
        CommuteReport rep = gauge_reduce_commute(p, Form(c, 3));

        CHECK(rep.equal);
        CHECK(rep.projected_b.is_zero());
        const ChartPtr& qc = rep.gauged_then_reduced.chart();
        CHECK(rep.gauged_then_reduced.tensor() == blade_mv(qc, {0, 1, 2}, var(qc, 0)));
        CHECK(rep.reduced_then_gauged.tensor() == rep.gauged_then_reduced.tensor());
    }

    SUBCASE("parameter multiple of the volume form on the graph") {
        auto c = r4c();
        NambuStructure pi = scaled_volume(c, var(c, 3));
        SubmanifoldSpec n(c, {pvar(c, 3) - pvar(c, 0)});
        ReductionProblem p(pi, n, coord_bundle(n, {3}));
        Form b = Form::blade(c, {0, 1, 2}, var(c, 4));  // c dx^dy^dz

        CommuteReport rep = gauge_reduce_commute(p, b);
        CHECK(rep.equal);

        const ChartPtr& qc = rep.gauged_then_reduced.chart();
        REQUIRE(qc->coord_count() == 3);
        CHECK(qc->param_count() == 1);
        // Both pipelines land on x/(1+cx) Dx^Dy^Dz.
        RationalFunction expect =
            var(qc, 0) / (rf_const(qc, 1) + var(qc, 3) * var(qc, 0));
        CHECK(rep.gauged_then_reduced.tensor() == blade_mv(qc, {0, 1, 2}, expect));
        CHECK(rep.reduced_then_gauged.tensor() == blade_mv(qc, {0, 1, 2}, expect));
        CHECK(rep.projected_b == Form::blade(qc, {0, 1, 2}, var(qc, 3)));
        CHECK(rep.gauged_then_reduced.fi_status() == FiStatus::verified);
        CHECK(rep.reduced_then_gauged.fi_status() == FiStatus::verified);
    }

    SUBCASE("numeric multiple of the volume form on the graph") {
        auto c = r4();
        NambuStructure pi = scaled_volume(c, var(c, 3));
        SubmanifoldSpec n(c, {pvar(c, 3) - pvar(c, 0)});
        ReductionProblem p(pi, n, coord_bundle(n, {3}));
        Form b = Form::blade(c, {0, 1, 2}, rf_const(c, 2));

        CommuteReport rep = gauge_reduce_commute(p, b);
        CHECK(rep.equal);
        const ChartPtr& qc = rep.gauged_then_reduced.chart();
        RationalFunction expect =
            var(qc, 0) / (rf_const(qc, 1) + rf_const(qc, 2) * var(qc, 0));
        CHECK(rep.gauged_then_reduced.tensor() == blade_mv(qc, {0, 1, 2}, expect));
        CHECK(rep.projected_b == Form::blade(qc, {0, 1, 2}, rf_const(qc, 2)));
    }

    SUBCASE("nilpotent gauge across a coordinate hyperplane") {
        auto c = r4c();
        NambuStructure pi = scaled_volume(c, rf_const(c, 1));
        SubmanifoldSpec n = hyperplane(c, 2);  // {z = 0}
        ReductionProblem p(pi, n, coord_bundle(n, {2}));
        Form b = Form::blade(c, {0, 1, 3}, var(c, 4));  // c dx^dy^dw

        // btilde o sharp is nilpotent here, so the full transport fixes Pi.
        GaugeData g = gauge_matrix(pi, b);
        CHECK(g.det == rf_const(c, 1));
        CHECK(g.transported.tensor() == pi.tensor());

        CommuteReport rep = gauge_reduce_commute(p, b);
        CHECK(rep.equal);
        CHECK(rep.gauged_then_reduced.tensor().is_zero());
        CHECK(rep.reduced_then_gauged.tensor().is_zero());
        const ChartPtr& qc = rep.reduced_then_gauged.chart();
        REQUIRE(qc->coord_count() == 3);  // (x, y, w)
        CHECK(rep.projected_b == Form::blade(qc, {0, 1, 2}, var(qc, 3)));
    }
}

TEST_CASE("commutation hypothesis failures are named") {
    SUBCASE("contraction along TN reaches E") {
        auto c = r4c();
        NambuStructure pi = scaled_volume(c, rf_const(c, 1));
        SubmanifoldSpec n = hyperplane(c, 2);
        ReductionProblem p(pi, n, coord_bundle(n, {2}));
        Form b = Form::blade(c, {0, 1, 2}, var(c, 4));  // c dx^dy^dz hits E = R Dz
        CHECK(thrown_with([&] { gauge_reduce_commute(p, b); }, "hypothesis (a)"));
    }

    SUBCASE("form varies along a collapsed direction") {
        auto c = r4();
        NambuStructure pi = scaled_volume(c, rf_const(c, 1));
        SubmanifoldSpec n = hyperplane(c, 2);  // {z = 0}
        ReductionProblem p(pi, n, coord_bundle(n, {1}));  // E = R Dy, tangent to N

        // Closed, vanishes on N after contraction with Dy, but its Dy-derivative
        // survives on N.
        Form b = Form::blade(c, {0, 1, 3}, -var(c, 2)) +
                 Form::blade(c, {0, 2, 3}, -var(c, 1));
        REQUIRE(exterior_d(b).is_zero());
        CHECK(thrown_with([&] { gauge_reduce_commute(p, b); }, "varies along F"));
        CHECK(thrown_with([&] { gauge_reduce_commute(p, b); }, "hypothesis (b)"));
    }

    SUBCASE("singular gauge is reported as invertibility") {
        auto c = r3();
        NambuStructure pi = scaled_volume(c, rf_const(c, 1));
        SubmanifoldSpec n = whole(c);
        ReductionProblem p(pi, n, SubbundleSpec(n, {}));
        Form b = Form::blade(c, {0, 1, 2}, rf_const(c, -1));
        CHECK(thrown_with([&] { gauge_reduce_commute(p, b); }, "invertibility"));
    }

    SUBCASE("failed reduction is reported as reducibility") {
        auto c = r4();
        NambuStructure pi = scaled_volume(c, rf_const(c, 1));
        SubmanifoldSpec n = hyperplane(c, 2);
        ReductionProblem p(pi, n, coord_bundle(n, {3}));  // sharp range escapes TN+E
        CHECK(thrown_with([&] { gauge_reduce_commute(p, Form(c, 3)); }, "reducibility"));
        CHECK(thrown_with([&] { gauge_reduce_commute(p, Form(c, 3)); },
                          "sharp range in TN+E"));
    }

    SUBCASE("non-closed forms are rejected before any hypothesis") {
        auto c = r4();
        NambuStructure pi = scaled_volume(c, rf_const(c, 1));
        SubmanifoldSpec n = hyperplane(c, 2);
        ReductionProblem p(pi, n, coord_bundle(n, {2}));
        CHECK_THROWS_AS(gauge_reduce_commute(p, Form::blade(c, {0, 1, 2}, var(c, 3))),
                        NotClosed);
    }
}
