#include "nambukit/exterior.hpp"

namespace nambukit {

int sort_with_sign(MultiIndex& idx) {
    int sign = 1;
    // Insertion sort; index tuples are tiny. Counts transpositions exactly.
    for (std::size_t i = 1; i < idx.size(); ++i) {
        int v = idx[i];
        std::size_t j = i;
        while (j > 0 && idx[j - 1] > v) {
            idx[j] = idx[j - 1];
            sign = -sign;
            --j;
        }
        idx[j] = v;
    }
    for (std::size_t i = 1; i < idx.size(); ++i)
        if (idx[i] == idx[i - 1]) return 0;
    return sign;
}

int subset_sign(const MultiIndex& a, const MultiIndex& b, MultiIndex& complement_out) {
    complement_out.clear();
    std::size_t ai = 0;
    for (int v : b) {
        if (ai < a.size() && a[ai] == v) {
            ++ai;
        } else {
            complement_out.push_back(v);
        }
    }
    if (ai != a.size()) return 0;  // a is not a subset of b
    MultiIndex concat(a);
    concat.insert(concat.end(), complement_out.begin(), complement_out.end());
    return sort_with_sign(concat);
}

RationalFunction pair(const Form& alpha, const Multivector& p) {
    require_same_chart(alpha.chart(), p.chart(), "pair");
    if (alpha.degree() != p.degree()) throw DegreeMismatch("pair");
    RationalFunction acc = RationalFunction::zero(alpha.chart());
    const auto& pt = p.terms();
    for (const auto& [idx, c] : alpha.terms()) {
        auto it = pt.find(idx);
        if (it != pt.end()) acc += c * it->second;
    }
    return acc;
}

Form interior(const Multivector& x, const Form& omega) {
    require_same_chart(x.chart(), omega.chart(), "interior");
    if (x.degree() != 1) throw DegreeMismatch("interior expects a vector field");
    if (omega.degree() == 0) return Form::zero(omega.chart(), 0);
    Form r(omega.chart(), omega.degree() - 1);
    for (const auto& [xi, xc] : x.terms()) {
        int j = xi[0];
        for (const auto& [oi, oc] : omega.terms()) {
            for (std::size_t rpos = 0; rpos < oi.size(); ++rpos) {
                if (oi[rpos] != j) continue;
                MultiIndex rest;
                rest.reserve(oi.size() - 1);
                for (std::size_t k = 0; k < oi.size(); ++k)
                    if (k != rpos) rest.push_back(oi[k]);
                RationalFunction term = xc * oc;
                if (rpos % 2 == 1) term = -term;
                r.add_term(std::move(rest), std::move(term));
                break;
            }
        }
    }
    return r;
}

Multivector interior_form(const Form& eta, const Multivector& p) {
    require_same_chart(eta.chart(), p.chart(), "interior_form");
    if (eta.degree() > p.degree()) throw DegreeMismatch("interior_form");
    Multivector r(p.chart(), p.degree() - eta.degree());
    for (const auto& [ei, ec] : eta.terms()) {
        for (const auto& [pi, pc] : p.terms()) {
            MultiIndex rest;
            int s = subset_sign(ei, pi, rest);
            if (s == 0) continue;
            RationalFunction term = ec * pc;
            if (s < 0) term = -term;
            r.add_term(std::move(rest), std::move(term));
        }
    }
    return r;
}

std::vector<MultiIndex> basis_blades(int coord_count, int k) {
    std::vector<MultiIndex> out;
    if (k < 0 || k > coord_count) return out;
    MultiIndex c(k);
    for (int i = 0; i < k; ++i) c[i] = i;
    while (true) {
        out.push_back(c);
        int i = k - 1;
        while (i >= 0 && c[i] == coord_count - k + i) --i;
        if (i < 0) break;
        ++c[i];
        for (int j = i + 1; j < k; ++j) c[j] = c[j - 1] + 1;
    }
    return out;
}

} // namespace nambukit
