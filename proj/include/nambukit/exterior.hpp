#ifndef NAMBUKIT_EXTERIOR_HPP
#define NAMBUKIT_EXTERIOR_HPP

#include <map>
#include <string>
#include <vector>

#include "nambukit/ratfun.hpp"

namespace nambukit {

// Strictly increasing list of coordinate indices; the empty list is the
// degree-0 basis element.
using MultiIndex = std::vector<int>;

// Sorts idx in place, returns the permutation sign (+1/-1), or 0 when an
// index repeats (the blade collapses).
int sort_with_sign(MultiIndex& idx);

// Sign of inserting blade A into blade B, i.e. coefficient of the basis
// expansion of concat(A, complement): requires A subset of B (sorted);
// returns 0 otherwise. complement_out receives B \ A.
int subset_sign(const MultiIndex& a, const MultiIndex& b, MultiIndex& complement_out);

struct MultivectorTag {
    static constexpr const char* basis_prefix = "D";
};
struct FormTag {
    static constexpr const char* basis_prefix = "d";
};

// Homogeneous alternating tensor with rational-function coefficients over a
// fixed chart: multivector fields (Tag = MultivectorTag) or differential
// forms (Tag = FormTag). Multi-indices range over chart coordinates only.
template <typename Tag>
class Alternating {
public:
    using Terms = std::map<MultiIndex, RationalFunction>;

    // Degrees above the coordinate count are allowed and force the zero
    // tensor (any index tuple that long repeats an index), so wedges past
    // top degree collapse instead of erroring.
    Alternating(ChartPtr chart, int degree) : chart_(std::move(chart)), degree_(degree) {
        if (degree_ < 0) throw DegreeMismatch("negative tensor degree");
    }

    static Alternating zero(ChartPtr chart, int degree) {
        return Alternating(std::move(chart), degree);
    }

    // Accepts an arbitrary index tuple; sign-normalizes, drops collapsing blades.
    static Alternating blade(ChartPtr chart, MultiIndex idx, RationalFunction coeff) {
        Alternating a(chart, static_cast<int>(idx.size()));
        a.add_term(std::move(idx), std::move(coeff));
        return a;
    }

    static Alternating scalar(ChartPtr chart, RationalFunction value) {
        Alternating a(std::move(chart), 0);
        a.add_term(MultiIndex{}, std::move(value));
        return a;
    }

    const ChartPtr& chart() const { return chart_; }
    int degree() const { return degree_; }
    const Terms& terms() const { return terms_; }
    bool is_zero() const { return terms_.empty(); }

    RationalFunction coeff(MultiIndex idx) const {
        int sign = sort_with_sign(idx);
        if (sign == 0) return RationalFunction::zero(chart_);
        auto it = terms_.find(idx);
        if (it == terms_.end()) return RationalFunction::zero(chart_);
        return sign < 0 ? -it->second : it->second;
    }

    void add_term(MultiIndex idx, RationalFunction coeff) {
        if (static_cast<int>(idx.size()) != degree_)
            throw DegreeMismatch("term degree differs from tensor degree");
        if (coeff.is_zero()) return;
        int sign = sort_with_sign(idx);
        if (sign == 0) return;
        for (int i : idx)
            if (i < 0 || i >= static_cast<int>(chart_->coord_count()))
                throw NambuError("multi-index outside chart coordinates");
        if (sign < 0) coeff = -coeff;
        auto it = terms_.find(idx);
        if (it == terms_.end()) {
            terms_.emplace(std::move(idx), std::move(coeff));
        } else {
            it->second += coeff;
            if (it->second.is_zero()) terms_.erase(it);
        }
    }

    Alternating operator-() const {
        Alternating r(chart_, degree_);
        for (const auto& [i, c] : terms_) r.terms_.emplace(i, -c);
        return r;
    }

    Alternating& operator+=(const Alternating& o) {
        require_same_chart(chart_, o.chart_, "alternating +");
        if (degree_ != o.degree_) throw DegreeMismatch("alternating +");
        for (const auto& [i, c] : o.terms_) add_term(i, c);
        return *this;
    }

    Alternating& operator-=(const Alternating& o) {
        require_same_chart(chart_, o.chart_, "alternating -");
        if (degree_ != o.degree_) throw DegreeMismatch("alternating -");
        for (const auto& [i, c] : o.terms_) add_term(i, -c);
        return *this;
    }

    friend Alternating operator+(Alternating a, const Alternating& b) { return a += b; }
    friend Alternating operator-(Alternating a, const Alternating& b) { return a -= b; }

    Alternating scaled(const RationalFunction& f) const {
        Alternating r(chart_, degree_);
        if (f.is_zero()) return r;
        for (const auto& [i, c] : terms_) r.add_term(i, c * f);
        return r;
    }

    friend bool operator==(const Alternating& a, const Alternating& b) {
        require_same_chart(a.chart_, b.chart_, "alternating ==");
        return a.degree_ == b.degree_ && a.terms_ == b.terms_;
    }
    friend bool operator!=(const Alternating& a, const Alternating& b) { return !(a == b); }

    std::string str() const {
        if (terms_.empty()) return "0";
        if (degree_ == 0) return terms_.begin()->second.str();
        std::string out;
        for (const auto& [idx, c] : terms_) {
            std::string coeff = c.str();
            std::string blade_txt;
            for (std::size_t k = 0; k < idx.size(); ++k) {
                if (k) blade_txt += "^";
                blade_txt += Tag::basis_prefix + chart_->name(idx[k]);
            }
            bool multi = coeff.find(" + ") != std::string::npos ||
                         coeff.find(" - ") != std::string::npos;
            if (multi) {
                // Multi-term coefficient keeps its own signs inside parens.
                if (!out.empty()) out += " + ";
                out += "(" + coeff + ")*" + blade_txt;
            } else {
                bool neg = !coeff.empty() && coeff[0] == '-';
                if (neg) coeff = coeff.substr(1);
                out += out.empty() ? (neg ? "-" : "") : (neg ? " - " : " + ");
                if (coeff == "1")
                    out += blade_txt;
                else
                    out += coeff + "*" + blade_txt;
            }
        }
        return out;
    }

private:
    ChartPtr chart_;
    int degree_;
    Terms terms_;
};

using Multivector = Alternating<MultivectorTag>;
using Form = Alternating<FormTag>;

template <typename Tag>
Alternating<Tag> wedge(const Alternating<Tag>& a, const Alternating<Tag>& b) {
    require_same_chart(a.chart(), b.chart(), "wedge");
    Alternating<Tag> r(a.chart(), a.degree() + b.degree());
    for (const auto& [ia, ca] : a.terms())
        for (const auto& [ib, cb] : b.terms()) {
            MultiIndex idx(ia);
            idx.insert(idx.end(), ib.begin(), ib.end());
            r.add_term(std::move(idx), ca * cb);
        }
    return r;
}

// Full pairing of a form with a multivector of equal degree, extending the
// determinant pairing of covector/vector tuples; on the sorted basis it is
// the Kronecker delta.
RationalFunction pair(const Form& alpha, const Multivector& p);

// Insertion of a vector field into a form.
Form interior(const Multivector& x, const Form& omega);

// Insertion of a form into the FIRST slots of a multivector:
// pair(beta, interior_form(eta, p)) = pair(wedge(eta, beta), p).
Multivector interior_form(const Form& eta, const Multivector& p);

// Sorted k-element index tuples over {0..coord_count-1}, lexicographic.
// The enumeration order fixes every basis used for matrices over blades.
std::vector<MultiIndex> basis_blades(int coord_count, int k);

} // namespace nambukit

#endif
