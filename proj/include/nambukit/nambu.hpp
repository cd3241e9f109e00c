#ifndef NAMBUKIT_NAMBU_HPP
#define NAMBUKIT_NAMBU_HPP

#include <cstdint>
#include <memory>
#include <mutex>
#include <optional>
#include <vector>

#include "nambukit/calculus.hpp"

namespace nambukit {

enum class FiStatus { unverified, verified, refuted };

// Failing instance of the fundamental identity: n-1 outer functions g,
// n inner functions f, and the nonzero residual
// {g_1..g_{n-1},{f_1..f_n}} - sum_k {f_1..{g_1..g_{n-1},f_k}..f_n}.
struct FiWitness {
    std::vector<RationalFunction> g;
    std::vector<RationalFunction> f;
    RationalFunction residual;
};

struct FiReport {
    bool verified = false;
    std::optional<FiWitness> witness;
    // Enumeration positions scanned: total pair count when verified, the
    // 1-based position of the minimal witness when refuted. Independent of
    // the worker count.
    std::uint64_t pairs_checked = 0;
};

// First violated quadratic Plucker relation
// sum_i (-1)^i P_{fixed + moving[i]} P_{moving - moving[i]} = 0.
struct PluckerWitness {
    MultiIndex fixed;   // n-1 indices
    MultiIndex moving;  // n+1 indices
    RationalFunction residual;
};

struct DecomposabilityReport {
    bool decomposable = false;
    std::optional<PluckerWitness> witness;
};

// An alternating n-tensor together with its declared order and a shared
// cache of the fundamental-identity verdict. Values are immutable; copies
// share the cache, so re-checking a pipeline output is free.
class NambuStructure {
public:
    NambuStructure(int order, Multivector tensor);

    int order() const { return order_; }
    const Multivector& tensor() const { return tensor_; }
    const ChartPtr& chart() const { return tensor_.chart(); }

    FiStatus fi_status() const;

private:
    friend FiReport check_fi(const NambuStructure&, unsigned);

    int order_;
    Multivector tensor_;

    struct FiCache {
        std::mutex mu;
        std::optional<FiReport> report;
    };
    std::shared_ptr<FiCache> cache_;
};

// {f_1, ..., f_n} = <df_1 ^ ... ^ df_n, tensor>. Expects exactly n entries.
RationalFunction bracket(const NambuStructure& pi, const std::vector<RationalFunction>& fs);

// Sharp map on (n-1)-forms, first-slots convention:
// <beta, sharp(eta)> = <eta ^ beta, tensor>.
Multivector sharp(const NambuStructure& pi, const Form& eta);

// Hamiltonian vector field of n-1 functions: sharp(df_1 ^ ... ^ df_{n-1}).
Multivector hamiltonian(const NambuStructure& pi, const std::vector<RationalFunction>& fs);

// Fundamental-identity residual for explicit tuples, computed from the
// definition with no shortcuts. g has n-1 entries, f has n.
RationalFunction fi_residual(const NambuStructure& pi,
                             const std::vector<RationalFunction>& g,
                             const std::vector<RationalFunction>& f);

// Complete decision of the fundamental identity. The residual is
// R-multilinear in every slot and depends pointwise only on 2-jets of the
// f's and 1-jets of the g's, so vanishing on all monomials of degree <= 2
// in the chart coordinates decides exactly. Tuples are antisymmetrized
// away by scanning sorted combinations only. The scan order is fixed
// (outer combos then inner combos, both lexicographic), and the returned
// witness is the minimal failing position regardless of jobs.
FiReport check_fi(const NambuStructure& pi, unsigned jobs = 1);

// Identically-vanishing Plucker quadratics over the rational-function
// field, equivalent to decomposability wherever the tensor is nonzero.
// Requires order >= 3; order 2 throws OrderTooSmall.
DecomposabilityReport check_decomposable(const NambuStructure& pi);

// Section (X, alpha) of TM + Lambda^{n-1} T*M. Same chart, vec degree 1.
struct DorfmanPair {
    Multivector vec;
    Form form;

    DorfmanPair(Multivector v, Form a);
};

// [[(X, alpha), (Y, beta)]] = ([X, Y], L_X beta - i_Y d alpha).
DorfmanPair dorfman(const DorfmanPair& a, const DorfmanPair& b);

// {alpha, beta} = L_{sharp alpha} beta - i_{sharp beta} d alpha on
// (n-1)-forms.
Form leibniz_bracket(const NambuStructure& pi, const Form& alpha, const Form& beta);

// Whether Graph(sharp) is closed under the Dorfman bracket over all
// function-coefficient sections. Checks basis pairs directly, plus the
// non-tensorial obstruction from scaling a section by a function:
// sharp(dx^k ^ (i_{X_I} dx^J + i_{X_J} dx^I)) = 0 for all k, I, J.
// Agrees with check_fi.
bool graph_closed(const NambuStructure& pi);

} // namespace nambukit

#endif
