#ifndef NAMBUKIT_LINALG_HPP
#define NAMBUKIT_LINALG_HPP

#include <cstddef>
#include <optional>
#include <vector>

#include "nambukit/rational.hpp"

namespace nambukit {

// Dense matrix over an exact field F (Rational or RationalFunction). The
// element type must provide +, -, *, /, unary -, and is_zero(); pivoting
// picks the first symbolically nonzero entry, which is sound because
// is_zero is a complete decision for both fields.
template <class F>
struct Mat {
    std::size_t rows = 0, cols = 0;
    std::vector<F> a;

    Mat() = default;
    Mat(std::size_t r, std::size_t c, const F& fill) : rows(r), cols(c), a(r * c, fill) {}

    F& at(std::size_t r, std::size_t c) { return a[r * cols + c]; }
    const F& at(std::size_t r, std::size_t c) const { return a[r * cols + c]; }
};

// In-place reduced row echelon form; returns the pivot column list (rank =
// its size). Pivots are normalized to 1.
template <class F>
std::vector<std::size_t> rref(Mat<F>& m) {
    std::vector<std::size_t> pivots;
    std::size_t row = 0;
    for (std::size_t col = 0; col < m.cols && row < m.rows; ++col) {
        std::size_t sel = row;
        while (sel < m.rows && m.at(sel, col).is_zero()) ++sel;
        if (sel == m.rows) continue;
        if (sel != row)
            for (std::size_t c = 0; c < m.cols; ++c) std::swap(m.at(sel, c), m.at(row, c));
        F inv_pivot = m.at(row, col);
        for (std::size_t c = col; c < m.cols; ++c) m.at(row, c) = m.at(row, c) / inv_pivot;
        for (std::size_t r = 0; r < m.rows; ++r) {
            if (r == row || m.at(r, col).is_zero()) continue;
            F factor = m.at(r, col);
            for (std::size_t c = col; c < m.cols; ++c)
                m.at(r, c) = m.at(r, c) - factor * m.at(row, c);
        }
        pivots.push_back(col);
        ++row;
    }
    return pivots;
}

template <class F>
std::size_t rank(Mat<F> m) {
    return rref(m).size();
}

// Determinant by fraction-free-ish forward elimination (field division is
// exact here, so plain Gaussian elimination is already exact).
template <class F>
F det(Mat<F> m, const F& one) {
    if (m.rows != m.cols) throw NambuError("det of non-square matrix");
    F d = one;
    for (std::size_t col = 0; col < m.cols; ++col) {
        std::size_t sel = col;
        while (sel < m.rows && m.at(sel, col).is_zero()) ++sel;
        if (sel == m.rows) return one - one;
        if (sel != col) {
            for (std::size_t c = 0; c < m.cols; ++c) std::swap(m.at(sel, c), m.at(col, c));
            d = -d;
        }
        d = d * m.at(col, col);
        for (std::size_t r = col + 1; r < m.rows; ++r) {
            if (m.at(r, col).is_zero()) continue;
            F factor = m.at(r, col) / m.at(col, col);
            for (std::size_t c = col; c < m.cols; ++c)
                m.at(r, c) = m.at(r, c) - factor * m.at(col, c);
        }
    }
    return d;
}

template <class F>
std::optional<Mat<F>> invert(const Mat<F>& m, const F& zero, const F& one) {
    if (m.rows != m.cols) throw NambuError("invert of non-square matrix");
    std::size_t n = m.rows;
    Mat<F> aug(n, 2 * n, zero);
    for (std::size_t r = 0; r < n; ++r) {
        for (std::size_t c = 0; c < n; ++c) aug.at(r, c) = m.at(r, c);
        aug.at(r, n + r) = one;
    }
    auto pivots = rref(aug);
    if (pivots.size() != n || pivots.back() != n - 1) return std::nullopt;
    Mat<F> inv(n, n, zero);
    for (std::size_t r = 0; r < n; ++r)
        for (std::size_t c = 0; c < n; ++c) inv.at(r, c) = aug.at(r, n + c);
    return inv;
}

// Solves A x = b; empty optional when inconsistent. Free variables are 0.
template <class F>
std::optional<std::vector<F>> solve(const Mat<F>& m, const std::vector<F>& b,
                                    const F& zero) {
    Mat<F> aug(m.rows, m.cols + 1, zero);
    for (std::size_t r = 0; r < m.rows; ++r) {
        for (std::size_t c = 0; c < m.cols; ++c) aug.at(r, c) = m.at(r, c);
        aug.at(r, m.cols) = b[r];
    }
    auto pivots = rref(aug);
    if (!pivots.empty() && pivots.back() == m.cols) return std::nullopt;
    std::vector<F> x(m.cols, zero);
    for (std::size_t i = 0; i < pivots.size(); ++i) x[pivots[i]] = aug.at(i, m.cols);
    return x;
}

// Basis of {x : A x = 0} from the rref; one vector per free column.
template <class F>
std::vector<std::vector<F>> nullspace(Mat<F> m, const F& zero, const F& one) {
    auto pivots = rref(m);
    std::vector<bool> is_pivot(m.cols, false);
    for (auto p : pivots) is_pivot[p] = true;
    std::vector<std::vector<F>> basis;
    for (std::size_t free = 0; free < m.cols; ++free) {
        if (is_pivot[free]) continue;
        std::vector<F> v(m.cols, zero);
        v[free] = one;
        for (std::size_t i = 0; i < pivots.size(); ++i)
            v[pivots[i]] = -m.at(i, free);
        basis.push_back(std::move(v));
    }
    return basis;
}

// --- Q-span utilities (vectors as rows) ------------------------------------

using QVec = std::vector<Rational>;

Mat<Rational> qmat_from_rows(const std::vector<QVec>& rows, std::size_t width);

// Canonical basis (rref rows) of the span of the given vectors.
std::vector<QVec> q_span_basis(const std::vector<QVec>& vectors, std::size_t width);

bool q_in_span(const QVec& v, const std::vector<QVec>& span);

// Basis of {lambda : lambda . v = 0 for all v in span}.
std::vector<QVec> q_annihilator(const std::vector<QVec>& span, std::size_t width);

std::vector<QVec> q_intersection(const std::vector<QVec>& a, const std::vector<QVec>& b,
                                 std::size_t width);

// Extends `start` (assumed independent) to a basis of Q^width, drawing
// greedily first from `preferred`, then from the standard basis.
std::vector<QVec> q_complete_basis(const std::vector<QVec>& start,
                                   const std::vector<QVec>& preferred, std::size_t width);

} // namespace nambukit

#endif
