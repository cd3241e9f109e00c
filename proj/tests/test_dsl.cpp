#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <optional>
#include <string>

#include "nambukit/dsl.hpp"

using namespace nambukit;

namespace {

Session parse(const std::string& src) { return Session::parse(src); }

// First field with the given key, if the command produced one.
std::optional<std::string> field(const CommandResult& r, const std::string& key) {
    for (const auto& [k, v] : r.fields)
        if (k == key) return v;
    return std::nullopt;
}

const CommandResult& nth(const Report& rep, std::size_t i) { return rep.commands.at(i); }

// Session shared by the golden-output cases: the scaled volume structure on
// four coordinates with its reduction across the diagonal hyperplane.
const char* kGolden = R"(
chart x y z w;
nambu P order 3 = w*Dx^Dy^Dz;
submanifold N = { w - x };
bundle E on N = span(Dw);
check-fi P;
bracket P x y z;
sharp P dx^dy;
reduce P on N by E as R;
bracket R x y z;
)";

} // namespace

TEST_CASE("syntax errors carry line and column") {
    try {
        parse("chart x y;\nfn f = $;\n");
        FAIL("expected a syntax error");
    } catch (const SyntaxError& e) {
        CHECK(e.line() == 2);
        CHECK(e.col() == 8);
        CHECK(std::string(e.what()).find("unexpected character") != std::string::npos);
    }

    try {
        parse("chart x y;\nnambu P order 3 = ;\n");
        FAIL("expected a syntax error");
    } catch (const SyntaxError& e) {
        CHECK(e.line() == 2);
        CHECK(std::string(e.what()).find("expected an expression") != std::string::npos);
    }

    CHECK_THROWS_AS(parse("fn f = 1;"), SyntaxError);         // before any chart
    CHECK_THROWS_AS(parse("chart x; chart y;"), SyntaxError); // second chart
    CHECK_THROWS_AS(parse("chart x; blow up;"), SyntaxError); // unknown statement
    CHECK_THROWS_AS(parse("chart x; fn f = 2 x;"), SyntaxError); // implicit product
}

TEST_CASE("comments and whitespace are insignificant") {
    Session s = parse("# leading note\nchart x y;  # trailing note\n\n"
                      "fn f =   x  +  y ;# end\n");
    CHECK(s.fn("f").str() == "x + y");
}

TEST_CASE("chart declaration fixes coordinates and parameters") {
    Session s = parse("chart x y z params a b;");
    CHECK(s.chart()->coord_count() == 3);
    CHECK(s.chart()->param_count() == 2);
    CHECK(s.chart()->name(4) == "b");

    CHECK_THROWS_AS(parse("chart x x;"), DuplicateName);
    CHECK_THROWS_AS(parse("chart x params x;"), DuplicateName);
    CHECK_THROWS_AS(parse("chart;"), SyntaxError);
}

TEST_CASE("declaration expressions evaluate to library values") {
    Session s = parse("chart x y z;\n"
                      "fn f = (x + 1)^2 / (y - 2);\n"
                      "fn g = x^-1;\n"
                      "fn h = -3/2*x;\n"
                      "form B = 2*dx^dy^dz;\n"
                      "nambu P order 3 = x*Dx^Dy^Dz;\n");
    auto c = s.chart();
    auto X = RationalFunction::variable(c, 0);
    auto Y = RationalFunction::variable(c, 1);
    auto one = RationalFunction::constant(c, Rational(1));
    CHECK(s.fn("f") == (X + one) * (X + one) / (Y - RationalFunction::constant(c, Rational(2))));
    CHECK(s.fn("g") == one / X);
    CHECK(s.fn("h") == X.scaled(Rational(-3, 2)));
    CHECK(s.form("B").degree() == 3);
    CHECK(s.structure("P").order() == 3);
    CHECK(s.structure("P").tensor() ==
          Multivector::blade(c, {0, 1, 2}, X));
}

TEST_CASE("expression type errors are rejected at the offending token") {
    CHECK_THROWS_AS(parse("chart x y; fn f = x + dx;"), SyntaxError);
    CHECK_THROWS_AS(parse("chart x y; fn f = dx * dy;"), SyntaxError);  // needs ^
    CHECK_THROWS_AS(parse("chart x y; fn f = x / dx;"), SyntaxError);
    CHECK_THROWS_AS(parse("chart x y; fn f = x ^ y;"), SyntaxError);    // non-constant
    CHECK_THROWS_AS(parse("chart x y; fn f = x ^ (1/2);"), SyntaxError);
    CHECK_THROWS_AS(parse("chart x y; fn f = dx ^ Dy;"), SyntaxError);  // mixed variance
    CHECK_THROWS_AS(parse("chart x y; fn f = dx;"), SyntaxError);       // fn wants scalar
    CHECK_THROWS_AS(parse("chart x y; form B = x;"), SyntaxError);
    CHECK_THROWS_AS(parse("chart x y; fn f = 1/0;"), DivisionByZero);
    CHECK_THROWS_AS(parse("chart x y; fn f = nope + 1;"), UnknownName);
}

TEST_CASE("a wedge that collapses to zero is reported as a warning") {
    Session s = parse("chart x y z w;\nnambu Z order 3 = w*Dx^Dx^Dz;\n");
    REQUIRE(s.warnings().size() == 1);
    CHECK(s.warnings()[0].find("collapsed to zero") != std::string::npos);
    CHECK(s.structure("Z").tensor().is_zero());

    Report rep = s.run();
    REQUIRE(rep.warnings.size() == 1);
    CHECK(rep.text().find("warning:") != std::string::npos);
}

TEST_CASE("names are checked while parsing") {
    CHECK_THROWS_AS(parse("chart x; check-fi P;"), UnknownName);
    CHECK_THROWS_AS(parse("chart x; fn f = 1; fn f = 2;"), DuplicateName);
    CHECK_THROWS_AS(parse("chart x; fn x = 1;"), DuplicateName);  // coordinate name
    CHECK_THROWS_AS(parse("chart x; fn chart = 1;"), SyntaxError); // reserved word
    CHECK_THROWS_AS(parse("chart x y; fn Dx = 1;"), SyntaxError);  // basis collision
    // Kind mismatch: a structure where a form is required.
    CHECK_THROWS_AS(parse("chart x y z; nambu P order 2 = Dx^Dy; gauge P by P;"),
                    SyntaxError);
    Session s = parse("chart x;");
    CHECK_THROWS_AS(s.fn("missing"), UnknownName);
    CHECK_THROWS_AS(s.structure("missing"), UnknownName);
    CHECK_THROWS_AS(s.chart_map("missing"), UnknownName);
}

TEST_CASE("render is a fixed point of parse") {
    const char* src = R"(
# session exercising every statement form
chart x y z w params c;
fn f = (x + 1)^2;
form B = c*dx^dy^dz;
nambu P order 3 = w * Dx ^ Dy ^ Dz;
submanifold N = { w - x };
bundle E on N = span( Dw );
map A to (a b q d) = (x, y, z, w - x);
check-fi P;
bracket P x y z;
sharp P dx ^ dy;
hamiltonian P x y;
decomposable P;
ann1 E order 3;
anntop N order 3;
reduce P on N by E as R;
canonicity P by E bound 1;
gauge P by B as Q;
commute P on N by E gauge B;
oracle fi P points 5;
oracle anchor P by B points 5;
subordinate P by f as S;
)";
    Session s1 = parse(src);
    std::string r1 = s1.render();
    Session s2 = parse(r1);
    CHECK(s2.render() == r1);

    // Echoes are canonical: token-normalized commands, value-normalized
    // declarations.
    CHECK(r1.find("sharp P dx^dy;") != std::string::npos);
    CHECK(r1.find("nambu P order 3 = w*Dx^Dy^Dz;") != std::string::npos);
    CHECK(r1.find("fn f = x^2 + 2*x + 1;") != std::string::npos);
    CHECK(r1.find("submanifold N = { -x + w };") != std::string::npos);
    CHECK(r1.find("bundle E on N = span(Dw);") != std::string::npos);
}

TEST_CASE("golden command outputs match direct library calls") {
    Session s = parse(kGolden);
    Report rep = s.run();

    const auto& fi = nth(rep, 0);
    CHECK(fi.verdict == "verified");
    CHECK(fi.pass);
    CHECK(field(fi, "pairs_checked") == std::to_string(check_fi(s.structure("P")).pairs_checked));

    const auto& br = nth(rep, 1);
    CHECK(br.verdict == "ok");
    CHECK(field(br, "value") == "w");

    const auto& sh = nth(rep, 2);
    CHECK(field(sh, "field") == "w*Dz");

    const auto& red = nth(rep, 3);
    CHECK(red.verdict == "reduced");
    CHECK(field(red, "chart") == "(x, y, z)");
    CHECK(field(red, "tensor") == "x*Dx^Dy^Dz");
    ReducedStructure direct =
        reduce(ReductionProblem(s.structure("P"), s.submanifold("N"), s.bundle("E")));
    CHECK(field(red, "licensed") == direct.hypothesis_report.licensed_by);
    CHECK(field(red, "hypotheses").has_value());

    // The registered quotient structure answers follow-up commands.
    const auto& qbr = nth(rep, 4);
    CHECK(qbr.verdict == "ok");
    CHECK(field(qbr, "value") == "x");

    CHECK(rep.all_pass());
}

TEST_CASE("gauge command reports the transport package") {
    Session s = parse("chart x y z w;\n"
                      "nambu P order 3 = w*Dx^Dy^Dz;\n"
                      "form B = 2*dx^dy^dz;\n"
                      "gauge P by B as Q;\n"
                      "check-fi Q;\n");
    Report rep = s.run();
    const auto& g = nth(rep, 0);
    CHECK(g.verdict == "transported");
    CHECK(g.pass);
    GaugeData direct = gauge_matrix(s.structure("P"), s.form("B"));
    CHECK(field(g, "det") == direct.det.str());
    CHECK(field(g, "vanishing_locus") == direct.vanishing_locus.str());
    CHECK(field(g, "transported") == direct.transported.tensor().str());
    CHECK(field(g, "leibniz_iso") == "holds");
    CHECK(nth(rep, 1).verdict == "verified");
    CHECK(rep.all_pass());
}

TEST_CASE("commute command compares both composition orders") {
    Session s = parse("chart x y z w params c;\n"
                      "nambu P order 3 = w*Dx^Dy^Dz;\n"
                      "form B = c*dx^dy^dz;\n"
                      "submanifold N = { w - x };\n"
                      "bundle E on N = span(Dw);\n"
                      "commute P on N by E gauge B;\n");
    Report rep = s.run();
    const auto& c = nth(rep, 0);
    CHECK(c.verdict == "commute");
    CHECK(c.pass);
    CHECK(field(c, "chart") == "(x, y, z) params (c)");
    CHECK(field(c, "gauged_then_reduced") == field(c, "reduced_then_gauged"));
    CHECK(field(c, "projected_form") == "c*dx^dy^dz");
}

TEST_CASE("annihilator commands list constant bases") {
    Session s = parse("chart x y z;\n"
                      "submanifold N = { z };\n"
                      "bundle E on N = span(Dz);\n"
                      "ann1 E order 3;\n"
                      "anntop N order 3;\n");
    Report rep = s.run();
    CHECK(field(nth(rep, 0), "count") == "1");
    CHECK(field(nth(rep, 0), "form_1") == "dx^dy");
    CHECK(field(nth(rep, 1), "count") == "2");
}

TEST_CASE("subordinate command registers a verified structure") {
    Session s = parse("chart x y z w;\n"
                      "nambu P order 4 = Dx^Dy^Dz^Dw;\n"
                      "fn f = x;\n"
                      "subordinate P by f as S;\n"
                      "bracket S y z w;\n");
    Report rep = s.run();
    const auto& sub = nth(rep, 0);
    CHECK(sub.pass);
    CHECK(field(sub, "fi") == "verified");
    NambuStructure direct = subordinate(
        s.structure("P"), {RationalFunction::variable(s.chart(), 0)});
    CHECK(field(sub, "tensor") == direct.tensor().str());
    CHECK(nth(rep, 1).verdict == "ok");
}

TEST_CASE("canonicity command reports the counterexample tuple") {
    Session s = parse("chart x y z w;\n"
                      "nambu P order 3 = w*Dx^Dy^Dz;\n"
                      "submanifold M = {};\n"
                      "bundle E on M = span(Dw);\n"
                      "canonicity P by E bound 1;\n");
    Report rep = s.run();
    const auto& c = nth(rep, 0);
    CHECK(c.verdict == "counterexample");
    CHECK_FALSE(c.pass);
    CHECK(field(c, "tuple") == "(x, y, z)");
    CHECK(field(c, "bracket") == "w");
}

TEST_CASE("decomposable command verdicts") {
    Session yes = parse("chart x y z w;\nnambu P order 3 = w*Dx^Dy^Dz;\ndecomposable P;\n");
    Report ry = yes.run();
    CHECK(nth(ry, 0).verdict == "decomposable");
    CHECK(nth(ry, 0).pass);

    Session no = parse("chart u1 u2 u3 u4 u5 u6;\n"
                       "nambu P order 3 = Du1^Du2^Du3 + Du4^Du5^Du6;\n"
                       "decomposable P;\n");
    Report rn = no.run();
    CHECK(nth(rn, 0).verdict == "not decomposable");
    CHECK_FALSE(nth(rn, 0).pass);
    CHECK(field(nth(rn, 0), "witness_fixed").has_value());
    CHECK(field(nth(rn, 0), "witness_moving").has_value());
}

TEST_CASE("domain errors are captured per command and the run continues") {
    Session s = parse("chart x y z w;\n"
                      "nambu P order 3 = w*Dx^Dy^Dz;\n"
                      "bracket P x y;\n"      // wrong arity
                      "bracket P x y z;\n");  // still runs
    Report rep = s.run();
    CHECK(nth(rep, 0).verdict == "error");
    CHECK_FALSE(nth(rep, 0).pass);
    CHECK(field(nth(rep, 0), "error").has_value());
    CHECK(nth(rep, 1).verdict == "ok");
    CHECK_FALSE(rep.all_pass());
}

TEST_CASE("oracle commands sample and agree") {
    Session s = parse("chart x y z w;\n"
                      "nambu P order 3 = w*Dx^Dy^Dz;\n"
                      "form B = 2*dx^dy^dz;\n"
                      "oracle fi P points 8;\n"
                      "oracle adjunction P points 8;\n"
                      "oracle anchor P by B points 4;\n");
    Report rep = s.run();
    for (std::size_t i = 0; i < 3; ++i) {
        CHECK(nth(rep, i).verdict == "agreed");
        CHECK(nth(rep, i).pass);
    }
    CHECK(field(nth(rep, 0), "points") == "8");
}

TEST_CASE("reports are byte-stable for a fixed seed") {
    Session s = parse("chart x y z w;\n"
                      "nambu P order 3 = w*Dx^Dy^Dz;\n"
                      "check-fi P;\n"
                      "oracle fi P points 12;\n");
    RunOptions a;
    a.seed = 42;
    std::string j1 = s.run(a).json();
    std::string j2 = s.run(a).json();
    CHECK(j1 == j2);

    RunOptions b;
    b.seed = 43;
    CHECK(s.run(b).json() != j1);

    CHECK(j1.find("\"schema\":1") != std::string::npos);
    CHECK(j1.find("\"seed\":42") != std::string::npos);
    CHECK(j1.find("\"status\":\"pass\"") != std::string::npos);
    CHECK(j1.find("seconds") == std::string::npos);  // no timing in JSON
}

TEST_CASE("an adapting map declaration feeds the via clause") {
    Session s = parse("chart x y z w;\n"
                      "nambu P order 3 = w*Dx^Dy^Dz;\n"
                      "submanifold N = { w - x };\n"
                      "bundle E on N = span(Dw);\n"
                      "map A to (a b q d) = (x, y, z, w - x);\n"
                      "reduce P on N by E via A as R;\n");
    CHECK(s.chart_map("A").target()->name(3) == "d");
    Report rep = s.run();
    const auto& red = nth(rep, 0);
    CHECK(red.verdict == "reduced");
    CHECK(field(red, "chart") == "(a, b, q)");
    CHECK(field(red, "tensor") == "a*Da^Db^Dq");

    CHECK_THROWS_AS(parse("chart x y; map A to (a) = (x, y);"), SyntaxError);
    CHECK_THROWS_AS(parse("chart x y; map A to (a b) = (x*y, y);"), SyntaxError);
    CHECK_THROWS_AS(parse("chart x y params c; map A to (a b) = (c*x, y);"),
                    SyntaxError);
}
