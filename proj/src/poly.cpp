#include "nambukit/poly.hpp"

#include <algorithm>
#include <sstream>

namespace nambukit {

ChartPtr Chart::make(std::vector<std::string> coords, std::vector<std::string> params) {
    auto c = std::make_shared<Chart>();
    c->coord_count_ = coords.size();
    c->names_ = std::move(coords);
    c->names_.insert(c->names_.end(), params.begin(), params.end());
    for (std::size_t i = 0; i < c->names_.size(); ++i)
        for (std::size_t j = i + 1; j < c->names_.size(); ++j)
            if (c->names_[i] == c->names_[j]) throw DuplicateName(c->names_[i]);
    return c;
}

std::optional<std::size_t> Chart::index_of(const std::string& name) const {
    for (std::size_t i = 0; i < names_.size(); ++i)
        if (names_[i] == name) return i;
    return std::nullopt;
}

void require_same_chart(const ChartPtr& a, const ChartPtr& b, const char* op) {
    if (a == b) return;
    if (a && b && *a == *b) return;
    throw ChartMismatch(op);
}

unsigned total_degree(const Monomial& m) {
    unsigned d = 0;
    for (unsigned e : m) d += e;
    return d;
}

bool GrlexLess::operator()(const Monomial& a, const Monomial& b) const {
    unsigned da = total_degree(a), db = total_degree(b);
    if (da != db) return da < db;
    // Same total degree: larger exponent on an earlier variable = larger monomial.
    for (std::size_t i = 0; i < a.size() && i < b.size(); ++i)
        if (a[i] != b[i]) return a[i] < b[i];
    return false;
}

MultiPoly MultiPoly::constant(ChartPtr chart, const Rational& c) {
    MultiPoly p(std::move(chart));
    if (!c.is_zero()) p.terms_[Monomial(p.chart_->size(), 0)] = c;
    return p;
}

MultiPoly MultiPoly::variable(ChartPtr chart, std::size_t index) {
    MultiPoly p(std::move(chart));
    Monomial m(p.chart_->size(), 0);
    m.at(index) = 1;
    p.terms_[m] = Rational(1);
    return p;
}

bool MultiPoly::is_constant() const {
    return terms_.empty() || (terms_.size() == 1 && total_degree(terms_.begin()->first) == 0);
}

Rational MultiPoly::constant_value() const {
    if (terms_.empty()) return Rational(0);
    if (!is_constant()) throw NambuError("constant_value on non-constant polynomial");
    return terms_.begin()->second;
}

unsigned MultiPoly::degree() const {
    return terms_.empty() ? 0 : total_degree(terms_.rbegin()->first);
}

unsigned MultiPoly::degree_in(std::size_t var) const {
    unsigned d = 0;
    for (const auto& [m, c] : terms_) d = std::max(d, m.at(var));
    return d;
}

const Rational& MultiPoly::leading_coeff() const {
    if (terms_.empty()) throw NambuError("leading_coeff of zero polynomial");
    return terms_.rbegin()->second;
}

const Monomial& MultiPoly::leading_monomial() const {
    if (terms_.empty()) throw NambuError("leading_monomial of zero polynomial");
    return terms_.rbegin()->first;
}

void MultiPoly::add_term(const Monomial& m, const Rational& c) {
    if (c.is_zero()) return;
    auto it = terms_.find(m);
    if (it == terms_.end()) {
        terms_[m] = c;
    } else {
        it->second += c;
        if (it->second.is_zero()) terms_.erase(it);
    }
}

MultiPoly MultiPoly::operator-() const {
    MultiPoly r(chart_);
    for (const auto& [m, c] : terms_) r.terms_[m] = -c;
    return r;
}

MultiPoly& MultiPoly::operator+=(const MultiPoly& o) {
    require_same_chart(chart_, o.chart_, "polynomial +");
    for (const auto& [m, c] : o.terms_) add_term(m, c);
    return *this;
}

MultiPoly& MultiPoly::operator-=(const MultiPoly& o) {
    require_same_chart(chart_, o.chart_, "polynomial -");
    for (const auto& [m, c] : o.terms_) add_term(m, -c);
    return *this;
}

MultiPoly operator*(const MultiPoly& a, const MultiPoly& b) {
    require_same_chart(a.chart_, b.chart_, "polynomial *");
    MultiPoly r(a.chart_);
    for (const auto& [ma, ca] : a.terms_)
        for (const auto& [mb, cb] : b.terms_) {
            Monomial m(ma);
            for (std::size_t i = 0; i < m.size(); ++i) m[i] += mb[i];
            r.add_term(m, ca * cb);
        }
    return r;
}

MultiPoly MultiPoly::scaled(const Rational& c) const {
    MultiPoly r(chart_);
    if (c.is_zero()) return r;
    for (const auto& [m, k] : terms_) r.terms_[m] = k * c;
    return r;
}

MultiPoly MultiPoly::pow(unsigned e) const {
    MultiPoly r = constant(chart_, Rational(1));
    MultiPoly base = *this;
    while (e) {
        if (e & 1u) r = r * base;
        base = base * base;
        e >>= 1u;
    }
    return r;
}

bool operator==(const MultiPoly& a, const MultiPoly& b) {
    require_same_chart(a.chart_, b.chart_, "polynomial ==");
    return a.terms_ == b.terms_;
}

MultiPoly MultiPoly::derivative(std::size_t var) const {
    MultiPoly r(chart_);
    for (const auto& [m, c] : terms_) {
        if (m.at(var) == 0) continue;
        Monomial d(m);
        d[var] -= 1;
        r.add_term(d, c * Rational(static_cast<long>(m[var])));
    }
    return r;
}

Rational MultiPoly::evaluate(const std::vector<Rational>& point) const {
    if (point.size() != chart_->size())
        throw NambuError("evaluation point arity mismatch");
    Rational acc(0);
    for (const auto& [m, c] : terms_) {
        Rational t = c;
        for (std::size_t i = 0; i < m.size(); ++i)
            if (m[i]) t *= point[i].pow(m[i]);
        acc += t;
    }
    return acc;
}

MultiPoly MultiPoly::substitute(const std::vector<MultiPoly>& images, ChartPtr target) const {
    if (images.size() != chart_->size())
        throw NambuError("substitution arity mismatch");
    MultiPoly r(target);
    for (const auto& [m, c] : terms_) {
        MultiPoly t = MultiPoly::constant(target, c);
        for (std::size_t i = 0; i < m.size(); ++i)
            if (m[i]) t = t * images[i].pow(m[i]);
        r += t;
    }
    return r;
}

std::optional<MultiPoly> divide_exact(const MultiPoly& a, const MultiPoly& b) {
    require_same_chart(a.chart_, b.chart_, "polynomial /");
    if (b.is_zero()) return std::nullopt;
    MultiPoly q(a.chart_), r = a;
    const Monomial& lb = b.leading_monomial();
    const Rational& cb = b.leading_coeff();
    while (!r.is_zero()) {
        const Monomial& lr = r.leading_monomial();
        Monomial d(lr);
        bool divides = true;
        for (std::size_t i = 0; i < d.size(); ++i) {
            if (d[i] < lb[i]) { divides = false; break; }
            d[i] -= lb[i];
        }
        if (!divides) return std::nullopt;
        Rational cq = r.leading_coeff() / cb;
        MultiPoly t(a.chart_);
        t.add_term(d, cq);
        q += t;
        r -= t * b;
    }
    return q;
}

namespace {

// Univariate view in variable v: degree -> coefficient polynomial (v-free).
std::map<unsigned, MultiPoly> coeffs_in(const MultiPoly& p, std::size_t v) {
    std::map<unsigned, MultiPoly> out;
    for (const auto& [m, c] : p.terms()) {
        Monomial stripped(m);
        unsigned d = stripped[v];
        stripped[v] = 0;
        auto it = out.try_emplace(d, MultiPoly(p.chart())).first;
        it->second.add_term(stripped, c);
    }
    return out;
}

MultiPoly from_coeffs(const ChartPtr& chart, std::size_t v,
                      const std::map<unsigned, MultiPoly>& cs) {
    MultiPoly r(chart);
    for (const auto& [d, coeff] : cs)
        for (const auto& [m, c] : coeff.terms()) {
            Monomial full(m);
            full[v] += d;
            r.add_term(full, c);
        }
    return r;
}

std::optional<std::size_t> highest_variable(const MultiPoly& p) {
    std::optional<std::size_t> best;
    for (const auto& [m, c] : p.terms())
        for (std::size_t i = m.size(); i-- > 0;)
            if (m[i] && (!best || i > *best)) { best = i; break; }
    return best;
}

MultiPoly content_in(const MultiPoly& p, std::size_t v) {
    MultiPoly g(p.chart());
    for (const auto& [d, coeff] : coeffs_in(p, v)) g = poly_gcd(g, coeff);
    return g;
}

// Scale to integer coefficients with content 1 and positive leading coefficient.
MultiPoly integer_primitive(const MultiPoly& p) {
    if (p.is_zero()) return p;
    mpz_class l = 1, g = 0;
    for (const auto& [m, c] : p.terms()) {
        mpz_class d = c.den();
        l = l / gcd(l, d) * d;
    }
    for (const auto& [m, c] : p.terms()) g = gcd(g, mpz_class(c.num() * (l / c.den())));
    Rational s(l, g);
    if ((p.leading_coeff() * s).sign() < 0) s = -s;
    return p.scaled(s);
}

mpz_class max_norm(const MultiPoly& p) {
    mpz_class n = 0;
    for (const auto& [m, c] : p.terms()) {
        mpz_class a = abs(c.num());
        if (a > n) n = a;
    }
    return n;
}

// Substitute v := xi. The result no longer involves v. One big-integer
// multiply per term, against precomputed powers of xi.
MultiPoly eval_var(const MultiPoly& p, std::size_t v, const mpz_class& xi) {
    unsigned dv = p.degree_in(v);
    std::vector<mpz_class> pw(dv + 1);
    pw[0] = 1;
    for (unsigned d = 1; d <= dv; ++d) pw[d] = pw[d - 1] * xi;
    MultiPoly r(p.chart());
    for (const auto& [m, c] : p.terms()) {
        Monomial stripped(m);
        unsigned d = stripped[v];
        stripped[v] = 0;
        r.add_term(stripped, c * Rational(pw[d]));
    }
    return r;
}

// Recover a polynomial in v from its value at v = xi by balanced base-xi digits.
std::optional<MultiPoly> digits_to_poly(MultiPoly g, std::size_t v, const mpz_class& xi,
                                        unsigned deg_cap) {
    MultiPoly out(g.chart());
    mpz_class half = xi / 2;
    for (unsigned pow = 0; !g.is_zero(); ++pow) {
        if (pow > deg_cap) return std::nullopt;
        MultiPoly digit(g.chart());
        for (const auto& [m, c] : g.terms()) {
            mpz_class r = c.num() % xi;
            if (r < 0) r += xi;
            if (r > half) r -= xi;
            if (r != 0) {
                Monomial mm(m);
                digit.add_term(mm, Rational(r));
                mm[v] += pow;
                out.add_term(mm, Rational(r));
            }
        }
        g -= digit;
        g = g.scaled(Rational(mpz_class(1), xi));
    }
    return out;
}

// Quotient of integer polynomials when it exists over Z, i.e. exact over Q
// with integer coefficients. Integrality matters inside the heuristic gcd:
// constants must divide contents, not just be invertible in Q.
bool divides_z(const MultiPoly& d, const MultiPoly& a) {
    auto q = divide_exact(a, d);
    if (!q) return false;
    for (const auto& [m, c] : q->terms())
        if (!c.is_integer()) return false;
    return true;
}

mpz_class int_content(const MultiPoly& p) {
    mpz_class g = 0;
    for (const auto& [m, c] : p.terms()) g = gcd(g, c.num());
    return g;
}

// Evaluation-reconstruction gcd over Z (inputs have integer coefficients).
// Returns a verified common divisor over Z, almost always the gcd; nullopt
// means the caller should fall back to the remainder-sequence path.
//
// Integer content travels on its own channel: contents are split off and
// combined by integer gcd, so the polynomial parts are content-free and by
// Gauss's lemma so is their gcd. Stripping the content of a reconstructed
// candidate is then sound, and it removes the accidental integer factors
// that evaluation gcds pick up, which would otherwise garble trial division.
std::optional<MultiPoly> gcd_heuristic(const MultiPoly& a0, const MultiPoly& b0, int depth) {
    if (depth > 16) return std::nullopt;
    if (a0.is_zero()) return b0;
    if (b0.is_zero()) return a0;
    auto va = highest_variable(a0), vb = highest_variable(b0);
    if (!va && !vb)
        return MultiPoly::constant(
            a0.chart(),
            Rational(mpz_class(gcd(a0.constant_value().num(), b0.constant_value().num()))));
    std::size_t v = std::max(va.value_or(0), vb.value_or(0));

    mpz_class ca = int_content(a0), cb = int_content(b0);
    mpz_class cg = gcd(ca, cb);
    MultiPoly a = a0.scaled(Rational(mpz_class(1), ca));
    MultiPoly b = b0.scaled(Rational(mpz_class(1), cb));

    mpz_class na = max_norm(a), nb = max_norm(b);
    mpz_class xi = 2 * (na < nb ? na : nb) + 2;
    if (xi < 32) xi = 32;
    unsigned dv = std::max(a.degree_in(v), b.degree_in(v));
    for (int attempt = 0; attempt < 8; ++attempt) {
        if (mpz_sizeinbase(xi.get_mpz_t(), 2) * (dv + 1) > 8000000) return std::nullopt;
        MultiPoly A = eval_var(a, v, xi), B = eval_var(b, v, xi);
        auto g = gcd_heuristic(A, B, depth + 1);
        if (g) {
            auto G = digits_to_poly(std::move(*g), v, xi, dv);
            if (G && !G->is_zero()) {
                MultiPoly cand = G->scaled(Rational(mpz_class(1), int_content(*G)));
                if (divides_z(cand, a) && divides_z(cand, b))
                    return cand.scaled(Rational(cg));
            }
        }
        xi = xi * 3 + 7;
    }
    return std::nullopt;
}

// Pseudo-remainder of a by b in variable v; deg_v(a) >= deg_v(b) >= 1.
MultiPoly prem(const MultiPoly& a, const MultiPoly& b, std::size_t v) {
    auto bc = coeffs_in(b, v);
    unsigned db = bc.rbegin()->first;
    const MultiPoly& lb = bc.rbegin()->second;
    MultiPoly r = a;
    while (!r.is_zero()) {
        auto rc = coeffs_in(r, v);
        unsigned dr = rc.rbegin()->first;
        if (dr < db) break;
        const MultiPoly lr = rc.rbegin()->second;
        // r := lb*r - lr * v^(dr-db) * b
        MultiPoly shift = MultiPoly::variable(r.chart(), v).pow(dr - db);
        r = lb * r - lr * shift * b;
    }
    return r;
}

} // namespace

MultiPoly poly_gcd(const MultiPoly& a, const MultiPoly& b) {
    require_same_chart(a.chart(), b.chart(), "gcd");
    if (a.is_zero()) return b.monic();
    if (b.is_zero()) return a.monic();
    if (a.is_constant() || b.is_constant())
        return MultiPoly::constant(a.chart(), Rational(1));

    if (auto h = gcd_heuristic(integer_primitive(a), integer_primitive(b), 0)) return h->monic();

    auto va = highest_variable(a), vb = highest_variable(b);
    std::size_t v = std::max(*va, *vb);
    if (a.degree_in(v) == 0) return poly_gcd(a, content_in(b, v));
    if (b.degree_in(v) == 0) return poly_gcd(content_in(a, v), b);

    MultiPoly ca = content_in(a, v), cb = content_in(b, v);
    MultiPoly pa = *divide_exact(a, ca), pb = *divide_exact(b, cb);
    MultiPoly c = poly_gcd(ca, cb);

    // Primitive pseudo-remainder sequence on the primitive parts.
    if (pa.degree_in(v) < pb.degree_in(v)) std::swap(pa, pb);
    while (true) {
        if (pb.is_zero()) break;
        if (pb.degree_in(v) == 0) {
            // Primitive parts are coprime in v.
            return c.monic();
        }
        MultiPoly r = prem(pa, pb, v);
        pa = pb;
        if (r.is_zero()) {
            pb = MultiPoly::zero(a.chart());
        } else {
            pb = *divide_exact(r, content_in(r, v));
        }
    }
    return (c * pa).monic();
}

MultiPoly MultiPoly::monic() const {
    if (is_zero()) return *this;
    return scaled(leading_coeff().inverse());
}

std::string MultiPoly::str() const {
    if (terms_.empty()) return "0";
    std::ostringstream os;
    bool first = true;
    // Grlex-descending for readability: leading term first.
    for (auto it = terms_.rbegin(); it != terms_.rend(); ++it) {
        const auto& [m, c] = *it;
        Rational mag = c;
        if (first) {
            if (c.sign() < 0) { os << "-"; mag = -c; }
        } else {
            os << (c.sign() < 0 ? " - " : " + ");
            if (c.sign() < 0) mag = -c;
        }
        first = false;
        bool unit = mag.is_one();
        bool wrote = false;
        if (!unit || total_degree(m) == 0) {
            os << mag.str();
            wrote = true;
        }
        for (std::size_t i = 0; i < m.size(); ++i) {
            if (!m[i]) continue;
            if (wrote) os << "*";
            os << chart_->name(i);
            if (m[i] > 1) os << "^" << m[i];
            wrote = true;
        }
    }
    return os.str();
}

} // namespace nambukit
