#include "nambukit/calculus.hpp"

namespace nambukit {

Form differential(const RationalFunction& f) {
    const ChartPtr& chart = f.chart();
    Form df(chart, 1);
    for (std::size_t i = 0; i < chart->coord_count(); ++i)
        df.add_term(MultiIndex{static_cast<int>(i)}, f.derivative(i));
    return df;
}

Form exterior_d(const Form& omega) {
    const ChartPtr& chart = omega.chart();
    Form r(chart, omega.degree() + 1);
    for (const auto& [idx, c] : omega.terms()) {
        for (std::size_t i = 0; i < chart->coord_count(); ++i) {
            RationalFunction dc = c.derivative(i);
            if (dc.is_zero()) continue;
            MultiIndex full;
            full.push_back(static_cast<int>(i));
            full.insert(full.end(), idx.begin(), idx.end());
            r.add_term(std::move(full), std::move(dc));
        }
    }
    return r;
}

Multivector lie_bracket(const Multivector& x, const Multivector& y) {
    require_same_chart(x.chart(), y.chart(), "lie_bracket");
    if (x.degree() != 1 || y.degree() != 1)
        throw DegreeMismatch("lie_bracket expects vector fields");
    const ChartPtr& chart = x.chart();
    Multivector r(chart, 1);
    for (std::size_t j = 0; j < chart->coord_count(); ++j) {
        MultiIndex jj{static_cast<int>(j)};
        RationalFunction acc = RationalFunction::zero(chart);
        for (std::size_t i = 0; i < chart->coord_count(); ++i) {
            MultiIndex ii{static_cast<int>(i)};
            RationalFunction xi = x.coeff(ii), yi = y.coeff(ii);
            if (!xi.is_zero()) acc += xi * y.coeff(jj).derivative(i);
            if (!yi.is_zero()) acc -= yi * x.coeff(jj).derivative(i);
        }
        r.add_term(jj, std::move(acc));
    }
    return r;
}

Form lie_derivative(const Multivector& x, const Form& omega) {
    if (x.degree() != 1) throw DegreeMismatch("lie_derivative expects a vector field");
    Form first = interior(x, exterior_d(omega));
    if (omega.degree() == 0) return first;  // contraction into a scalar is zero
    return first + exterior_d(interior(x, omega));
}

Multivector lie_derivative(const Multivector& x, const Multivector& p) {
    require_same_chart(x.chart(), p.chart(), "lie_derivative");
    if (x.degree() != 1) throw DegreeMismatch("lie_derivative expects a vector field");
    const ChartPtr& chart = x.chart();
    Multivector r(chart, p.degree());
    for (const auto& [idx, c] : p.terms()) {
        // X(c) term.
        RationalFunction xc = RationalFunction::zero(chart);
        for (std::size_t i = 0; i < chart->coord_count(); ++i) {
            RationalFunction xi = x.coeff(MultiIndex{static_cast<int>(i)});
            if (!xi.is_zero()) xc += xi * c.derivative(i);
        }
        r.add_term(idx, std::move(xc));
        // c * sum_r d_{i1}^...^[X, d_{ir}]^...^d_{ik};
        // [X, d_j] = -sum_l (d_j X^l) d_l.
        for (std::size_t rpos = 0; rpos < idx.size(); ++rpos) {
            int j = idx[rpos];
            for (std::size_t l = 0; l < chart->coord_count(); ++l) {
                RationalFunction dxl = x.coeff(MultiIndex{static_cast<int>(l)}).derivative(j);
                if (dxl.is_zero()) continue;
                MultiIndex replaced(idx);
                replaced[rpos] = static_cast<int>(l);
                r.add_term(std::move(replaced), -(c * dxl));
            }
        }
    }
    return r;
}

AffineMap::AffineMap(ChartPtr source, ChartPtr target, Mat<Rational> a, QVec b)
    : source_(std::move(source)), target_(std::move(target)), a_(std::move(a)), b_(std::move(b)) {
    std::size_t n = source_->coord_count();
    if (target_->coord_count() != n || a_.rows != n || a_.cols != n || b_.size() != n)
        throw NambuError("affine map shape mismatch");
    if (source_->param_count() != target_->param_count())
        throw ChartMismatch("affine map must preserve parameters");
    for (std::size_t i = 0; i < source_->param_count(); ++i)
        if (source_->name(n + i) != target_->name(target_->coord_count() + i))
            throw ChartMismatch("affine map must preserve parameters");
    auto inv = invert(a_, Rational(0), Rational(1));
    if (!inv) throw SingularMap("affine map matrix");
    inv_ = *inv;
    // x_i = sum_j inv[i][j] (u_j - b_j); parameters map to themselves.
    backward_images_.reserve(source_->size());
    for (std::size_t i = 0; i < n; ++i) {
        MultiPoly img(target_);
        for (std::size_t j = 0; j < n; ++j) {
            Rational c = inv_.at(i, j);
            if (c.is_zero()) continue;
            img += MultiPoly::variable(target_, j).scaled(c);
            img -= MultiPoly::constant(target_, c * b_[j]);
        }
        backward_images_.push_back(std::move(img));
    }
    for (std::size_t i = n; i < source_->size(); ++i)
        backward_images_.push_back(MultiPoly::variable(target_, target_->coord_count() + (i - n)));
}

AffineMap AffineMap::identity(ChartPtr chart) {
    std::size_t n = chart->coord_count();
    Mat<Rational> a(n, n, Rational(0));
    for (std::size_t i = 0; i < n; ++i) a.at(i, i) = Rational(1);
    return AffineMap(chart, chart, std::move(a), QVec(n, Rational(0)));
}

AffineMap AffineMap::inverse() const {
    // u = A x + b  =>  x = A^-1 u - A^-1 b.
    std::size_t n = source_->coord_count();
    QVec c(n, Rational(0));
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) c[i] -= inv_.at(i, j) * b_[j];
    return AffineMap(target_, source_, inv_, std::move(c));
}

RationalFunction AffineMap::apply(const RationalFunction& f) const {
    require_same_chart(f.chart(), source_, "affine apply");
    return f.substitute(backward_images_, target_);
}

QVec AffineMap::push_vector(const QVec& v) const {
    std::size_t n = source_->coord_count();
    if (v.size() != n) throw NambuError("vector arity mismatch");
    QVec out(n, Rational(0));
    for (std::size_t j = 0; j < n; ++j)
        for (std::size_t i = 0; i < n; ++i) out[j] += a_.at(j, i) * v[i];
    return out;
}

Multivector AffineMap::push(const Multivector& p) const {
    require_same_chart(p.chart(), source_, "affine push");
    std::size_t n = source_->coord_count();
    Multivector r(target_, p.degree());
    for (const auto& [idx, c] : p.terms()) {
        Multivector acc = Multivector::scalar(target_, apply(c));
        for (int i : idx) {
            Multivector basis_img(target_, 1);
            for (std::size_t j = 0; j < n; ++j) {
                Rational w = a_.at(j, static_cast<std::size_t>(i));
                if (!w.is_zero())
                    basis_img.add_term(MultiIndex{static_cast<int>(j)},
                                       RationalFunction::constant(target_, w));
            }
            acc = wedge(acc, basis_img);
        }
        r += acc;
    }
    return r;
}

Form AffineMap::push(const Form& omega) const {
    require_same_chart(omega.chart(), source_, "affine push");
    std::size_t n = source_->coord_count();
    Form r(target_, omega.degree());
    for (const auto& [idx, c] : omega.terms()) {
        Form acc = Form::scalar(target_, apply(c));
        for (int i : idx) {
            Form basis_img(target_, 1);
            for (std::size_t j = 0; j < n; ++j) {
                Rational w = inv_.at(static_cast<std::size_t>(i), j);
                if (!w.is_zero())
                    basis_img.add_term(MultiIndex{static_cast<int>(j)},
                                       RationalFunction::constant(target_, w));
            }
            acc = wedge(acc, basis_img);
        }
        r += acc;
    }
    return r;
}

} // namespace nambukit
