#ifndef NAMBUKIT_CALCULUS_HPP
#define NAMBUKIT_CALCULUS_HPP

#include "nambukit/exterior.hpp"
#include "nambukit/linalg.hpp"

namespace nambukit {

// df as a 1-form; derivatives run over chart coordinates only (parameters
// are constants of the coefficient field).
Form differential(const RationalFunction& f);

Form exterior_d(const Form& omega);

// Commutator of vector fields.
Multivector lie_bracket(const Multivector& x, const Multivector& y);

// Cartan formula: L_X = i_X d + d i_X.
Form lie_derivative(const Multivector& x, const Form& omega);

// Frame formula: L_X(f dI) = X(f) dI + f sum_r d_{i1}^...^[X, d_{ir}]^...
Multivector lie_derivative(const Multivector& x, const Multivector& p);

// Invertible affine change of chart u = A x + b on the coordinates;
// parameters carry over unchanged. Scalars and forms are transported by
// substituting the inverse map; multivectors push forward along the map,
// so pairings are preserved on the nose.
class AffineMap {
public:
    AffineMap(ChartPtr source, ChartPtr target, Mat<Rational> a, QVec b);

    static AffineMap identity(ChartPtr chart);

    const ChartPtr& source() const { return source_; }
    const ChartPtr& target() const { return target_; }
    const Mat<Rational>& matrix() const { return a_; }
    const Mat<Rational>& matrix_inverse() const { return inv_; }
    const QVec& offset() const { return b_; }

    AffineMap inverse() const;

    RationalFunction apply(const RationalFunction& f) const;
    Multivector push(const Multivector& p) const;
    Form push(const Form& omega) const;
    // Pushforward of a constant tangent vector (coordinates only): A v.
    QVec push_vector(const QVec& v) const;

private:
    ChartPtr source_, target_;
    Mat<Rational> a_, inv_;
    QVec b_;
    std::vector<MultiPoly> backward_images_;  // x_i in terms of target variables
};

} // namespace nambukit

#endif
