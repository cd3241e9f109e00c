#include "nambukit/nambu.hpp"

#include <atomic>
#include <numeric>
#include <thread>

namespace nambukit {

namespace {

// Sorted k-subsets of {0..n-1} in lexicographic order.
std::vector<std::vector<int>> combinations(int n, int k) {
    std::vector<std::vector<int>> out;
    if (k < 0 || k > n) return out;
    std::vector<int> idx(k);
    std::iota(idx.begin(), idx.end(), 0);
    while (true) {
        out.push_back(idx);
        int i = k - 1;
        while (i >= 0 && idx[i] == n - k + i) --i;
        if (i < 0) break;
        ++idx[i];
        for (int j = i + 1; j < k; ++j) idx[j] = idx[j - 1] + 1;
    }
    return out;
}

struct Mono {
    RationalFunction fn;
    Form df;
};

// Coordinate monomials of degree 1 and 2: x_a, then x_a x_b with a <= b.
// Parameters never join; they are constants of the coefficient field.
std::vector<Mono> jet_battery(const ChartPtr& chart) {
    std::vector<Mono> out;
    int m = static_cast<int>(chart->coord_count());
    for (int a = 0; a < m; ++a) {
        RationalFunction f = RationalFunction::variable(chart, a);
        out.push_back({f, differential(f)});
    }
    for (int a = 0; a < m; ++a)
        for (int b = a; b < m; ++b) {
            RationalFunction f = RationalFunction::variable(chart, a) *
                                 RationalFunction::variable(chart, b);
            out.push_back({f, differential(f)});
        }
    return out;
}

} // namespace

NambuStructure::NambuStructure(int order, Multivector tensor)
    : order_(order), tensor_(std::move(tensor)), cache_(std::make_shared<FiCache>()) {
    if (order_ < 2) throw OrderTooSmall("Nambu order must be at least 2");
    if (tensor_.degree() != order_)
        throw DegreeMismatch("tensor degree differs from declared order");
}

FiStatus NambuStructure::fi_status() const {
    std::lock_guard<std::mutex> lock(cache_->mu);
    if (!cache_->report) return FiStatus::unverified;
    return cache_->report->verified ? FiStatus::verified : FiStatus::refuted;
}

RationalFunction bracket(const NambuStructure& pi, const std::vector<RationalFunction>& fs) {
    if (static_cast<int>(fs.size()) != pi.order())
        throw DegreeMismatch("bracket expects exactly order-many functions");
    const ChartPtr& chart = pi.chart();
    Form w = Form::scalar(chart, RationalFunction::constant(chart, Rational(1)));
    for (const auto& f : fs) {
        require_same_chart(chart, f.chart(), "bracket argument");
        w = wedge(w, differential(f));
    }
    return pair(w, pi.tensor());
}

Multivector sharp(const NambuStructure& pi, const Form& eta) {
    require_same_chart(pi.chart(), eta.chart(), "sharp");
    if (eta.degree() != pi.order() - 1)
        throw DegreeMismatch("sharp expects a form of degree order-1");
    return interior_form(eta, pi.tensor());
}

Multivector hamiltonian(const NambuStructure& pi, const std::vector<RationalFunction>& fs) {
    if (static_cast<int>(fs.size()) != pi.order() - 1)
        throw DegreeMismatch("hamiltonian expects order-1 functions");
    const ChartPtr& chart = pi.chart();
    Form w = Form::scalar(chart, RationalFunction::constant(chart, Rational(1)));
    for (const auto& f : fs) {
        require_same_chart(chart, f.chart(), "hamiltonian argument");
        w = wedge(w, differential(f));
    }
    return sharp(pi, w);
}

RationalFunction fi_residual(const NambuStructure& pi,
                             const std::vector<RationalFunction>& g,
                             const std::vector<RationalFunction>& f) {
    int n = pi.order();
    if (static_cast<int>(g.size()) != n - 1 || static_cast<int>(f.size()) != n)
        throw DegreeMismatch("fi_residual expects order-1 outer and order inner functions");
    std::vector<RationalFunction> outer = g;
    outer.push_back(bracket(pi, f));
    RationalFunction res = bracket(pi, outer);
    for (int k = 0; k < n; ++k) {
        std::vector<RationalFunction> inner = g;
        inner.push_back(f[k]);
        std::vector<RationalFunction> repl = f;
        repl[k] = bracket(pi, inner);
        res -= bracket(pi, repl);
    }
    return res;
}

FiReport check_fi(const NambuStructure& pi, unsigned jobs) {
    {
        std::lock_guard<std::mutex> lock(pi.cache_->mu);
        if (pi.cache_->report) return *pi.cache_->report;
    }

    const ChartPtr& chart = pi.chart();
    const Multivector& tensor = pi.tensor();
    const int n = pi.order();
    const std::vector<Mono> batt = jet_battery(chart);
    const int bsz = static_cast<int>(batt.size());

    const auto gcombos = combinations(bsz, n - 1);
    const auto fcombos = combinations(bsz, n);

    const Form unit = Form::scalar(chart, RationalFunction::constant(chart, Rational(1)));

    // Per inner combo: d of its bracket, and the sharp images of the
    // differential wedges with one slot removed. With these, one residual
    // costs n+1 one-form/vector pairings.
    struct FData {
        Form dbr;
        std::vector<Multivector> y;
    };
    std::vector<FData> fdata;
    fdata.reserve(fcombos.size());
    for (const auto& c : fcombos) {
        std::vector<Form> pre(n + 1, unit), suf(n + 1, unit);
        for (int i = 0; i < n; ++i) pre[i + 1] = wedge(pre[i], batt[c[i]].df);
        for (int i = n - 1; i >= 0; --i) suf[i] = wedge(batt[c[i]].df, suf[i + 1]);
        FData fd{differential(pair(pre[n], tensor)), {}};
        fd.y.reserve(n);
        for (int k = 0; k < n; ++k)
            fd.y.push_back(interior_form(wedge(pre[k], suf[k + 1]), tensor));
        fdata.push_back(std::move(fd));
    }

    // Per outer combo: its Hamiltonian field X, and d{g_1..g_{n-1}, u} for
    // every battery monomial u.
    struct GData {
        Multivector x;
        std::vector<Form> dh;
    };
    std::vector<GData> gdata;
    gdata.reserve(gcombos.size());
    for (const auto& c : gcombos) {
        Form w = unit;
        for (int i : c) w = wedge(w, batt[i].df);
        GData gd{interior_form(w, tensor), {}};
        gd.dh.reserve(bsz);
        for (int u = 0; u < bsz; ++u)
            gd.dh.push_back(differential(pair(batt[u].df, gd.x)));
        gdata.push_back(std::move(gd));
    }

    const std::uint64_t gcount = gcombos.size();
    const std::uint64_t fcount = fcombos.size();
    const std::uint64_t total = gcount * fcount;

    // Flat position t = g_index * fcount + f_index. Nonzero test for one
    // residual; pure, so positions can be scanned in any partition.
    auto fails_at = [&](std::uint64_t t) {
        const GData& gd = gdata[t / fcount];
        const std::uint64_t fi = t % fcount;
        const FData& fd = fdata[fi];
        RationalFunction r = pair(fd.dbr, gd.x);
        for (int k = 0; k < n; ++k) {
            RationalFunction term = pair(gd.dh[fcombos[fi][k]], fd.y[k]);
            // h sits in slot k; moving its differential last crosses
            // n-1-k factors.
            if ((n - 1 - k) % 2 == 0)
                r -= term;
            else
                r += term;
        }
        return !r.is_zero();
    };

    std::atomic<std::uint64_t> best{total};
    std::uint64_t workers = jobs == 0 ? 1 : jobs;
    if (workers > total) workers = total ? total : 1;
    if (workers <= 1) {
        for (std::uint64_t t = 0; t < total; ++t)
            if (fails_at(t)) {
                best.store(t);
                break;
            }
    } else {
        // Strided scan; each worker walks increasing positions and stops
        // past the current global minimum, so the merged minimum is the
        // true first failure whatever the worker count.
        std::vector<std::thread> pool;
        for (std::uint64_t w = 0; w < workers; ++w)
            pool.emplace_back([&, w] {
                for (std::uint64_t t = w; t < total; t += workers) {
                    if (t >= best.load(std::memory_order_relaxed)) break;
                    if (!fails_at(t)) continue;
                    std::uint64_t cur = best.load();
                    while (t < cur && !best.compare_exchange_weak(cur, t)) {
                    }
                    break;
                }
            });
        for (auto& th : pool) th.join();
    }

    FiReport rep;
    const std::uint64_t found = best.load();
    if (found == total) {
        rep.verified = true;
        rep.pairs_checked = total;
    } else {
        FiWitness wit;
        for (int i : gcombos[found / fcount]) wit.g.push_back(batt[i].fn);
        for (int i : fcombos[found % fcount]) wit.f.push_back(batt[i].fn);
        wit.residual = fi_residual(pi, wit.g, wit.f);
        rep.verified = false;
        rep.witness = std::move(wit);
        rep.pairs_checked = found + 1;
    }

    std::lock_guard<std::mutex> lock(pi.cache_->mu);
    if (!pi.cache_->report) pi.cache_->report = rep;
    return *pi.cache_->report;
}

DecomposabilityReport check_decomposable(const NambuStructure& pi) {
    if (pi.order() < 3) throw OrderTooSmall("decomposability test needs order >= 3");
    const int n = pi.order();
    const int m = static_cast<int>(pi.chart()->coord_count());
    const Multivector& p = pi.tensor();

    DecomposabilityReport rep;
    rep.decomposable = true;
    for (const auto& fixed : combinations(m, n - 1)) {
        for (const auto& moving : combinations(m, n + 1)) {
            RationalFunction s = RationalFunction::zero(pi.chart());
            for (int i = 0; i <= n; ++i) {
                MultiIndex left = fixed;
                left.push_back(moving[i]);
                MultiIndex right;
                for (int j = 0; j <= n; ++j)
                    if (j != i) right.push_back(moving[j]);
                RationalFunction term = p.coeff(std::move(left)) * p.coeff(std::move(right));
                if (i % 2)
                    s -= term;
                else
                    s += term;
            }
            if (!s.is_zero()) {
                rep.decomposable = false;
                rep.witness = PluckerWitness{fixed, moving, std::move(s)};
                return rep;
            }
        }
    }
    return rep;
}

DorfmanPair::DorfmanPair(Multivector v, Form a) : vec(std::move(v)), form(std::move(a)) {
    require_same_chart(vec.chart(), form.chart(), "Dorfman pair");
    if (vec.degree() != 1) throw DegreeMismatch("Dorfman pair vector part must have degree 1");
}

DorfmanPair dorfman(const DorfmanPair& a, const DorfmanPair& b) {
    require_same_chart(a.vec.chart(), b.vec.chart(), "Dorfman bracket");
    if (a.form.degree() != b.form.degree())
        throw DegreeMismatch("Dorfman bracket needs equal form degrees");
    Multivector v = lie_bracket(a.vec, b.vec);
    Form w = lie_derivative(a.vec, b.form) - interior(b.vec, exterior_d(a.form));
    return DorfmanPair(std::move(v), std::move(w));
}

Form leibniz_bracket(const NambuStructure& pi, const Form& alpha, const Form& beta) {
    const int want = pi.order() - 1;
    if (alpha.degree() != want || beta.degree() != want)
        throw DegreeMismatch("Leibniz bracket expects forms of degree order-1");
    Multivector xa = sharp(pi, alpha);
    Multivector xb = sharp(pi, beta);
    return lie_derivative(xa, beta) - interior(xb, exterior_d(alpha));
}

bool graph_closed(const NambuStructure& pi) {
    if (pi.tensor().is_zero()) return true;
    const ChartPtr& chart = pi.chart();
    const int n = pi.order();
    const int m = static_cast<int>(chart->coord_count());
    const RationalFunction one = RationalFunction::constant(chart, Rational(1));

    const auto combos = combinations(m, n - 1);
    std::vector<Form> basis;
    std::vector<Multivector> xs;
    basis.reserve(combos.size());
    xs.reserve(combos.size());
    for (const auto& c : combos) {
        basis.push_back(Form::blade(chart, c, one));
        xs.push_back(sharp(pi, basis.back()));
    }

    const std::size_t count = basis.size();
    for (std::size_t i = 0; i < count; ++i)
        for (std::size_t j = 0; j < count; ++j) {
            Form dform = lie_derivative(xs[i], basis[j]) - interior(xs[j], exterior_d(basis[i]));
            if (lie_bracket(xs[i], xs[j]) != sharp(pi, dform)) return false;
        }

    // Scaling a section by a function adds df ^ (i_{X_I} dx^J + i_{X_J} dx^I)
    // to the form part with no vector counterpart, so closure over all
    // sections also needs these images to vanish.
    for (std::size_t i = 0; i < count; ++i)
        for (std::size_t j = i; j < count; ++j) {
            Form s = interior(xs[i], basis[j]) + interior(xs[j], basis[i]);
            if (s.is_zero()) continue;
            for (int k = 0; k < m; ++k) {
                Form lead = Form::blade(chart, MultiIndex{k}, one);
                if (!sharp(pi, wedge(lead, s)).is_zero()) return false;
            }
        }
    return true;
}

} // namespace nambukit
