#ifndef NAMBUKIT_POLY_HPP
#define NAMBUKIT_POLY_HPP

#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "nambukit/rational.hpp"

namespace nambukit {

// Variable context shared by every scalar, form and tensor in a session.
// The first coord_count() names are chart coordinates (differentiation,
// multi-indices and evaluation points range over them); the rest are
// symbolic parameters: they live in the coefficient field and every
// derivative operator treats them as constants.
class Chart {
public:
    static std::shared_ptr<const Chart> make(std::vector<std::string> coords,
                                             std::vector<std::string> params = {});

    std::size_t size() const { return names_.size(); }
    std::size_t coord_count() const { return coord_count_; }
    std::size_t param_count() const { return names_.size() - coord_count_; }
    const std::string& name(std::size_t i) const { return names_.at(i); }
    const std::vector<std::string>& names() const { return names_; }
    std::optional<std::size_t> index_of(const std::string& name) const;
    bool is_coord(std::size_t i) const { return i < coord_count_; }

    friend bool operator==(const Chart& a, const Chart& b) {
        return a.coord_count_ == b.coord_count_ && a.names_ == b.names_;
    }

private:
    std::vector<std::string> names_;
    std::size_t coord_count_ = 0;
};

using ChartPtr = std::shared_ptr<const Chart>;

void require_same_chart(const ChartPtr& a, const ChartPtr& b, const char* op);

// Exponent vector, one entry per chart variable.
using Monomial = std::vector<unsigned>;

unsigned total_degree(const Monomial& m);

// Graded lexicographic order: compare total degree, then exponents from the
// first variable on. Used as the canonical term order everywhere.
struct GrlexLess {
    bool operator()(const Monomial& a, const Monomial& b) const;
};

// Sparse multivariate polynomial over Q. Terms hold no zero coefficients;
// the zero polynomial has an empty term map.
class MultiPoly {
public:
    using TermMap = std::map<Monomial, Rational, GrlexLess>;

    MultiPoly() = default;
    explicit MultiPoly(ChartPtr chart) : chart_(std::move(chart)) {}

    static MultiPoly zero(ChartPtr chart) { return MultiPoly(std::move(chart)); }
    static MultiPoly constant(ChartPtr chart, const Rational& c);
    static MultiPoly variable(ChartPtr chart, std::size_t index);

    const ChartPtr& chart() const { return chart_; }
    const TermMap& terms() const { return terms_; }
    bool is_zero() const { return terms_.empty(); }
    bool is_constant() const;
    Rational constant_value() const;  // requires is_constant()
    unsigned degree() const;          // total degree, 0 for the zero polynomial
    unsigned degree_in(std::size_t var) const;
    bool involves(std::size_t var) const { return degree_in(var) > 0; }

    const Rational& leading_coeff() const;  // grlex-largest term; requires nonzero
    const Monomial& leading_monomial() const;

    void add_term(const Monomial& m, const Rational& c);

    MultiPoly operator-() const;
    MultiPoly& operator+=(const MultiPoly& o);
    MultiPoly& operator-=(const MultiPoly& o);
    friend MultiPoly operator+(MultiPoly a, const MultiPoly& b) { return a += b; }
    friend MultiPoly operator-(MultiPoly a, const MultiPoly& b) { return a -= b; }
    friend MultiPoly operator*(const MultiPoly& a, const MultiPoly& b);
    MultiPoly& operator*=(const MultiPoly& o) { return *this = *this * o; }
    MultiPoly scaled(const Rational& c) const;
    MultiPoly pow(unsigned e) const;

    friend bool operator==(const MultiPoly& a, const MultiPoly& b);
    friend bool operator!=(const MultiPoly& a, const MultiPoly& b) { return !(a == b); }

    MultiPoly derivative(std::size_t var) const;
    Rational evaluate(const std::vector<Rational>& point) const;

    // Maps variable i of this chart to images[i] (a polynomial on the target
    // chart) and expands. Covers affine chart maps, constraint elimination
    // and projection onto quotient charts.
    MultiPoly substitute(const std::vector<MultiPoly>& images, ChartPtr target) const;

    // Quotient a/b when b divides a exactly (grlex long division).
    friend std::optional<MultiPoly> divide_exact(const MultiPoly& a, const MultiPoly& b);

    // Monic gcd (leading coefficient 1); gcd(0,0) = 0.
    friend MultiPoly poly_gcd(const MultiPoly& a, const MultiPoly& b);

    MultiPoly monic() const;  // divide by leading coefficient; zero stays zero

    std::string str() const;  // canonical text, grlex-descending terms

private:
    ChartPtr chart_;
    TermMap terms_;
};

} // namespace nambukit

#endif
