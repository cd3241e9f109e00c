#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "gen.hpp"
#include "nambukit/calculus.hpp"

using namespace nambukit;

static ChartPtr xyzw() { return Chart::make({"x", "y", "z", "w"}); }

static RationalFunction rf1(const ChartPtr& c) { return RationalFunction::constant(c, Rational(1)); }

TEST_CASE("differential of a function") {
    auto c = xyzw();
    auto x = RationalFunction::variable(c, 0);
    auto y = RationalFunction::variable(c, 1);
    CHECK(differential(x * x * y) ==
          Form::blade(c, {0}, x * y * RationalFunction::constant(c, Rational(2))) +
              Form::blade(c, {1}, x * x));
    CHECK(differential(RationalFunction::constant(c, Rational(5))).is_zero());
}

TEST_CASE("differential ignores parameters") {
    auto c = Chart::make({"x", "y"}, {"c"});
    auto f = RationalFunction::variable(c, 2) * RationalFunction::variable(c, 0);
    // d(c*x) = c dx, no dc term
    CHECK(differential(f) == Form::blade(c, {0}, RationalFunction::variable(c, 2)));
}

TEST_CASE("exterior derivative squares to zero") {
    auto c = xyzw();
    std::mt19937 rng(11);
    for (int trial = 0; trial < 15; ++trial) {
        for (int p = 0; p <= 2; ++p) {
            auto a = gen::form(rng, c, p);
            CHECK(exterior_d(exterior_d(a)).is_zero());
        }
    }
}

TEST_CASE("exterior derivative: frozen example") {
    auto c = xyzw();
    auto w = RationalFunction::variable(c, 3);
    // d(w dx^dy^dz) = dw^dx^dy^dz = -dx^dy^dz^dw
    CHECK(exterior_d(Form::blade(c, {0, 1, 2}, w)) ==
          Form::blade(c, {0, 1, 2, 3}, RationalFunction::constant(c, Rational(-1))));
}

TEST_CASE("exterior derivative is an antiderivation") {
    auto c = xyzw();
    std::mt19937 rng(22);
    for (int trial = 0; trial < 10; ++trial) {
        for (int p = 0; p <= 2; ++p) {
            auto a = gen::form(rng, c, p, 2, 1);
            auto b = gen::form(rng, c, 1, 2, 1);
            int sign = (p % 2 == 0) ? 1 : -1;
            CHECK(exterior_d(wedge(a, b)) ==
                  wedge(exterior_d(a), b) +
                      wedge(a, exterior_d(b)).scaled(RationalFunction::constant(c, Rational(sign))));
        }
    }
}

TEST_CASE("vector field bracket") {
    auto c = xyzw();
    auto x = RationalFunction::variable(c, 0);
    auto X = Multivector::blade(c, {0}, x);   // x Dx
    auto Y = Multivector::blade(c, {1}, x);   // x Dy
    // [x Dx, x Dy] = x Dy
    CHECK(lie_bracket(X, Y) == Y);
    CHECK(lie_bracket(X, X).is_zero());
}

TEST_CASE("vector field bracket satisfies Jacobi") {
    auto c = Chart::make({"x", "y", "z"});
    std::mt19937 rng(33);
    for (int trial = 0; trial < 10; ++trial) {
        auto X = gen::multivector(rng, c, 1, 2, 1);
        auto Y = gen::multivector(rng, c, 1, 2, 1);
        auto Z = gen::multivector(rng, c, 1, 2, 1);
        auto jac = lie_bracket(X, lie_bracket(Y, Z)) + lie_bracket(Y, lie_bracket(Z, X)) +
                   lie_bracket(Z, lie_bracket(X, Y));
        CHECK(jac.is_zero());
    }
}

TEST_CASE("Cartan formula is how the form derivative is computed") {
    auto c = xyzw();
    auto x = RationalFunction::variable(c, 0);
    auto X = Multivector::blade(c, {0}, x);  // x Dx
    CHECK(lie_derivative(X, Form::blade(c, {0}, rf1(c))) == Form::blade(c, {0}, rf1(c)));
    std::mt19937 rng(44);
    for (int trial = 0; trial < 10; ++trial) {
        auto V = gen::multivector(rng, c, 1, 2, 1);
        auto a = gen::form(rng, c, 2, 2, 1);
        CHECK(lie_derivative(V, a) ==
              interior(V, exterior_d(a)) + exterior_d(interior(V, a)));
    }
}

TEST_CASE("derivative of a multivector field along a vector field") {
    auto c = xyzw();
    std::mt19937 rng(55);
    // L_X distributes over the pairing: X(pair(a,P)) = pair(L_X a, P) + pair(a, L_X P)
    for (int trial = 0; trial < 10; ++trial) {
        auto X = gen::multivector(rng, c, 1, 2, 1);
        auto a = gen::form(rng, c, 2, 2, 1);
        auto P = gen::multivector(rng, c, 2, 2, 1);
        auto lhs = Form::scalar(c, pair(a, P));
        auto x_of = lie_derivative(X, lhs).coeff({});
        CHECK(x_of == pair(lie_derivative(X, a), P) + pair(a, lie_derivative(X, P)));
    }
    // On vector fields it is the bracket.
    auto X = gen::multivector(rng, c, 1, 2, 1);
    auto Y = gen::multivector(rng, c, 1, 2, 1);
    CHECK(lie_derivative(X, Y) == lie_bracket(X, Y));
}

TEST_CASE("affine chart change: construction and inversion") {
    auto src = xyzw();
    auto dst = Chart::make({"x", "y", "z", "u"});
    // u = w - x, other coordinates fixed.
    Mat<Rational> A(4, 4, Rational(0));
    A.at(0, 0) = Rational(1);
    A.at(1, 1) = Rational(1);
    A.at(2, 2) = Rational(1);
    A.at(3, 0) = Rational(-1);
    A.at(3, 3) = Rational(1);
    AffineMap T(src, dst, A, {Rational(0), Rational(0), Rational(0), Rational(0)});

    auto w = RationalFunction::variable(src, 3);
    auto u = RationalFunction::variable(dst, 3);
    auto x_dst = RationalFunction::variable(dst, 0);
    CHECK(T.apply(w) == u + x_dst);
    CHECK(T.inverse().apply(T.apply(w)) == w);

    Mat<Rational> S(4, 4, Rational(0));  // singular
    CHECK_THROWS_AS(AffineMap(src, dst, S, {Rational(0), Rational(0), Rational(0), Rational(0)}),
                    SingularMap);
}

TEST_CASE("pushforward of w Dx^Dy^Dz under u = w - x") {
    auto src = xyzw();
    auto dst = Chart::make({"x", "y", "z", "u"});
    Mat<Rational> A(4, 4, Rational(0));
    A.at(0, 0) = Rational(1);
    A.at(1, 1) = Rational(1);
    A.at(2, 2) = Rational(1);
    A.at(3, 0) = Rational(-1);
    A.at(3, 3) = Rational(1);
    AffineMap T(src, dst, A, {Rational(0), Rational(0), Rational(0), Rational(0)});

    auto P = Multivector::blade(src, {0, 1, 2}, RationalFunction::variable(src, 3));
    auto u = RationalFunction::variable(dst, 3);
    auto x = RationalFunction::variable(dst, 0);
    // Dx maps to Dx - Du, so w Dx^Dy^Dz maps to (u+x)(Dx-Du)^Dy^Dz.
    auto expect = Multivector::blade(dst, {0, 1, 2}, u + x) +
                  Multivector::blade(dst, {3, 1, 2}, (u + x).scaled(Rational(-1)));
    CHECK(T.push(P) == expect);
}

TEST_CASE("chart change preserves the pairing") {
    auto src = xyzw();
    auto dst = Chart::make({"a", "b", "p", "q"});
    Mat<Rational> A(4, 4, Rational(0));
    // a generic invertible integer matrix
    A.at(0, 0) = Rational(1); A.at(0, 1) = Rational(2);
    A.at(1, 1) = Rational(1); A.at(1, 3) = Rational(-1);
    A.at(2, 2) = Rational(3); A.at(2, 0) = Rational(1);
    A.at(3, 3) = Rational(1);
    AffineMap T(src, dst, A, {Rational(1), Rational(0), Rational(-2), Rational(5)});

    std::mt19937 rng(66);
    for (int trial = 0; trial < 10; ++trial) {
        for (int p = 1; p <= 3; ++p) {
            auto a = gen::form(rng, src, p, 2, 1);
            auto P = gen::multivector(rng, src, p, 2, 1);
            CHECK(T.apply(pair(a, P)) == pair(T.push(a), T.push(P)));
        }
    }
}

TEST_CASE("pushforward respects wedge and bracket") {
    auto src = Chart::make({"x", "y"});
    auto dst = Chart::make({"u", "v"});
    Mat<Rational> A(2, 2, Rational(0));
    A.at(0, 0) = Rational(2); A.at(0, 1) = Rational(1);
    A.at(1, 0) = Rational(1); A.at(1, 1) = Rational(1);
    AffineMap T(src, dst, A, {Rational(0), Rational(3)});
    std::mt19937 rng(77);
    for (int trial = 0; trial < 10; ++trial) {
        auto X = gen::multivector(rng, src, 1, 2, 1);
        auto Y = gen::multivector(rng, src, 1, 2, 1);
        CHECK(T.push(lie_bracket(X, Y)) == lie_bracket(T.push(X), T.push(Y)));
        CHECK(T.push(wedge(X, Y)) == wedge(T.push(X), T.push(Y)));
        auto a = gen::form(rng, src, 1, 2, 1);
        CHECK(T.push(exterior_d(a)) == exterior_d(T.push(a)));
    }
}

TEST_CASE("affine map rejects mismatched parameter blocks") {
    auto src = Chart::make({"x", "y"}, {"c"});
    auto dst = Chart::make({"u", "v"});
    Mat<Rational> A(2, 2, Rational(0));
    A.at(0, 0) = Rational(1);
    A.at(1, 1) = Rational(1);
    CHECK_THROWS_AS(AffineMap(src, dst, A, {Rational(0), Rational(0)}), ChartMismatch);
}
