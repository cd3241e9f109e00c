#include "nambukit/linalg.hpp"

namespace nambukit {

Mat<Rational> qmat_from_rows(const std::vector<QVec>& rows, std::size_t width) {
    Mat<Rational> m(rows.size(), width, Rational(0));
    for (std::size_t r = 0; r < rows.size(); ++r) {
        if (rows[r].size() != width) throw NambuError("row width mismatch");
        for (std::size_t c = 0; c < width; ++c) m.at(r, c) = rows[r][c];
    }
    return m;
}

std::vector<QVec> q_span_basis(const std::vector<QVec>& vectors, std::size_t width) {
    Mat<Rational> m = qmat_from_rows(vectors, width);
    auto pivots = rref(m);
    std::vector<QVec> basis;
    for (std::size_t r = 0; r < pivots.size(); ++r) {
        QVec v(width, Rational(0));
        for (std::size_t c = 0; c < width; ++c) v[c] = m.at(r, c);
        basis.push_back(std::move(v));
    }
    return basis;
}

bool q_in_span(const QVec& v, const std::vector<QVec>& span) {
    std::size_t width = v.size();
    auto with = span;
    with.push_back(v);
    return q_span_basis(span, width).size() == q_span_basis(with, width).size();
}

std::vector<QVec> q_annihilator(const std::vector<QVec>& span, std::size_t width) {
    Mat<Rational> m = qmat_from_rows(span, width);
    return nullspace(std::move(m), Rational(0), Rational(1));
}

std::vector<QVec> q_intersection(const std::vector<QVec>& a, const std::vector<QVec>& b,
                                 std::size_t width) {
    auto ba = q_span_basis(a, width), bb = q_span_basis(b, width);
    if (ba.empty() || bb.empty()) return {};
    // w in both row spaces: w = sum x_i ba_i = sum y_j bb_j. Solve in the
    // coefficient space via the nullspace of [ba^T | -bb^T].
    Mat<Rational> m(width, ba.size() + bb.size(), Rational(0));
    for (std::size_t c = 0; c < ba.size(); ++c)
        for (std::size_t r = 0; r < width; ++r) m.at(r, c) = ba[c][r];
    for (std::size_t c = 0; c < bb.size(); ++c)
        for (std::size_t r = 0; r < width; ++r) m.at(r, ba.size() + c) = -bb[c][r];
    auto null = nullspace(std::move(m), Rational(0), Rational(1));
    std::vector<QVec> raw;
    for (const auto& coeffs : null) {
        QVec w(width, Rational(0));
        for (std::size_t i = 0; i < ba.size(); ++i)
            for (std::size_t r = 0; r < width; ++r) w[r] += coeffs[i] * ba[i][r];
        raw.push_back(std::move(w));
    }
    return q_span_basis(raw, width);
}

std::vector<QVec> q_complete_basis(const std::vector<QVec>& start,
                                   const std::vector<QVec>& preferred, std::size_t width) {
    std::vector<QVec> basis = start;
    auto try_add = [&](const QVec& cand) {
        if (basis.size() >= width) return;
        if (q_in_span(cand, basis)) return;
        basis.push_back(cand);
    };
    for (const auto& v : preferred) try_add(v);
    for (std::size_t i = 0; i < width && basis.size() < width; ++i) {
        QVec e(width, Rational(0));
        e[i] = Rational(1);
        try_add(e);
    }
    if (basis.size() != width) throw NambuError("basis completion failed");
    return basis;
}

} // namespace nambukit
