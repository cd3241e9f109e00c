#ifndef NAMBUKIT_REDUCTION_HPP
#define NAMBUKIT_REDUCTION_HPP

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "nambukit/nambu.hpp"

namespace nambukit {

// Affine submanifold N = {l_1 = ... = l_c = 0} of the chart's coordinate
// space. Constraints must be affine in the coordinates with rational
// coefficients (parameters may not appear) and have independent gradients;
// independence makes N nonempty automatically.
class SubmanifoldSpec {
public:
    SubmanifoldSpec(ChartPtr chart, std::vector<MultiPoly> constraints);

    const ChartPtr& chart() const { return chart_; }
    const std::vector<MultiPoly>& constraints() const { return constraints_; }
    std::size_t codim() const { return constraints_.size(); }

    // l_j = gradients()[j] . x + offsets()[j], rows over chart coordinates.
    const std::vector<QVec>& gradients() const { return gradients_; }
    const std::vector<Rational>& offsets() const { return offsets_; }

    // Constant basis of TN = ker(gradient matrix).
    const std::vector<QVec>& tangent_basis() const { return tangent_; }

    // i*: substitutes the constraint solution, eliminating the pivot
    // coordinates. The result lives on the same chart but involves only the
    // free coordinates. Throws DivisionByZero when a denominator vanishes
    // identically on N.
    RationalFunction pull_back(const RationalFunction& f) const;
    Multivector pull_back(const Multivector& p) const;  // coefficientwise

    friend bool operator==(const SubmanifoldSpec& a, const SubmanifoldSpec& b) {
        return *a.chart_ == *b.chart_ && a.constraints_ == b.constraints_;
    }
    friend bool operator!=(const SubmanifoldSpec& a, const SubmanifoldSpec& b) {
        return !(a == b);
    }

private:
    ChartPtr chart_;
    std::vector<MultiPoly> constraints_;
    std::vector<QVec> gradients_;
    std::vector<Rational> offsets_;
    std::vector<QVec> tangent_;
    std::vector<MultiPoly> images_;  // substitution solving the constraints
};

// Constant-coefficient subbundle of TM along a submanifold: the span of
// independent constant vector fields. An empty spanning list is the zero
// bundle.
class SubbundleSpec {
public:
    SubbundleSpec(SubmanifoldSpec base, std::vector<Multivector> spanning);

    const SubmanifoldSpec& base() const { return base_; }
    const std::vector<Multivector>& spanning_vectors() const { return spanning_; }
    const std::vector<QVec>& span_rows() const { return rows_; }
    std::size_t rank() const { return rows_.size(); }

private:
    SubmanifoldSpec base_;
    std::vector<Multivector> spanning_;
    std::vector<QVec> rows_;
};

struct RangeCheck {
    bool holds = false;
    std::optional<Form> witness;  // first annihilator basis form whose sharp escapes
};

struct LieCheck {
    bool holds = false;
    std::optional<Multivector> frame_vector;  // failing frame field
    std::optional<Multivector> obstruction;   // its Lie derivative restricted to N
};

// Outcomes of every reducibility criterion that was run, plus which
// sufficient condition set licensed the reduction:
//   "strengthened"    sharp(Ann1 E) in TN everywhere on N, and the Lie
//                     derivative of the tensor along the F-frame stays in
//                     E ^ (n-1)-vectors on N;
//   "falceto-zambon"  the relaxed pair with a transverse bundle D: sharp
//                     range in TN + D and the Lie criterion on the D-frame;
//   "none"            neither set passed. Reduction may still proceed when
//                     the bracket is well defined (range in TN + E); the
//                     report keeps the evidence either way.
struct HypothesisReport {
    RangeCheck sharp_in_tn;
    std::optional<RangeCheck> sharp_in_tn_plus_d;
    RangeCheck sharp_in_tn_plus_e;
    LieCheck lie_on_f;
    std::optional<LieCheck> lie_on_d;
    std::string licensed_by;

    std::string str() const;
};

// The full input of a reduction: tensor, submanifold, bundle E, optional
// transverse bundle D with F <= D <= E (F = E intersect TN), and an optional
// user-supplied adapting chart change. All pieces must share one chart and
// E/D must be based on the same submanifold.
class ReductionProblem {
public:
    ReductionProblem(NambuStructure pi, SubmanifoldSpec n, SubbundleSpec e,
                     std::optional<SubbundleSpec> d = std::nullopt,
                     std::optional<AffineMap> adapted = std::nullopt);

    const NambuStructure& structure() const { return pi_; }
    const SubmanifoldSpec& submanifold() const { return n_; }
    const SubbundleSpec& e_bundle() const { return e_; }
    const std::optional<SubbundleSpec>& d_bundle() const { return d_; }
    const std::optional<AffineMap>& adapted_map() const { return adapted_; }

    // Constant basis of F = E intersect TN.
    const std::vector<QVec>& f_rows() const { return f_rows_; }

private:
    NambuStructure pi_;
    SubmanifoldSpec n_;
    SubbundleSpec e_;
    std::optional<SubbundleSpec> d_;
    std::optional<AffineMap> adapted_;
    std::vector<QVec> f_rows_;
};

struct ReducedStructure {
    ChartPtr quotient_chart;
    NambuStructure tensor;  // fi_status verified by construction
    HypothesisReport hypothesis_report;
    AffineMap adapted_map;  // the chart change actually used
};

// Constant basis of Ann1 E = {eta in (n-1)-forms : i_v eta = 0 for v in E},
// listed over lexicographic basis blades. Requires order >= 2 and
// order - 1 <= coordinate count.
std::vector<Form> ann1(const SubbundleSpec& e, int order);

// Constant basis of the (n-1)-forms annihilated by every (n-1)-fold wedge
// of tangent vectors of N.
std::vector<Form> ann_top(const SubmanifoldSpec& n, int order);

// The bundle spanned along N by the sharp images of the ann_top basis. Only
// certified when some maximal minor of the restricted coefficient matrix is
// a nonzero constant, which pins the pointwise rank; otherwise throws
// NonConstantRank. Coefficients must restrict to polynomials.
SubbundleSpec canonical_bundle(const NambuStructure& pi, const SubmanifoldSpec& n);

// Whether df annihilates E at every point of the base submanifold.
bool in_ce(const RationalFunction& f, const SubbundleSpec& e);

enum class RangeTarget { tangent, tangent_plus_d, tangent_plus_e };

// Tests sharp(Ann1 E) <= target pointwise on N, exactly: restrict each sharp
// image to N and check every polynomial coefficient vector against the
// constant target space. Returns the first escaping basis form as witness.
RangeCheck check_sharp_range(const ReductionProblem& p, RangeTarget target);

enum class LieFrame { f_frame, d_frame };

// Tests (L_X Pi)|_N <= E ^ (n-1)-vectors for every constant frame field X
// of F (or of D). Vacuously true for an empty frame.
LieCheck check_lie_criterion(const ReductionProblem& p, LieFrame frame);

struct CanonicityWitness {
    std::vector<RationalFunction> tuple;
    RationalFunction bracket_value;
};

struct CanonicityReport {
    bool canonical_up_to_bound = false;
    std::optional<CanonicityWitness> counterexample;
};

// Searches coordinate monomials of total degree <= bound whose differentials
// annihilate E for a tuple whose bracket escapes that class. Finding none is
// evidence, not proof, of canonicity.
CanonicityReport falsify_canonicity(const NambuStructure& pi, const SubbundleSpec& e,
                                    int degree_bound);

// Quotient construction: adapts the chart (user map verified, otherwise
// built automatically), forms brackets of constant extensions of the
// quotient coordinates, restricts to N, and assembles the reduced tensor.
// Throws HypothesesFailed when the bracket is not well defined on the
// quotient (sharp range escapes TN + E, a bracket depends on an F
// coordinate, or an alternative extension family disagrees), NotAdapted
// when the supplied map does not put N and E in coordinate normal form,
// FIRefutedOnQuotient when the assembled tensor fails the fundamental
// identity (internal consistency, never expected).
ReducedStructure reduce(const ReductionProblem& p);

// Order n-k structure fixing the first k slots at the given functions:
// the new tensor is the contraction of the old one with df_1 ^ ... ^ df_k.
// Requires k <= n-2.
NambuStructure subordinate(const NambuStructure& pi,
                           const std::vector<RationalFunction>& fs);

// Certifies that constant extensions of quotient-coordinate monomials up to
// the degree bound are invariant along both theta_d (globally) and E (on N).
// Preconditions F <= theta_d and theta_d <= E are enforced.
bool check_compatible(const SubbundleSpec& theta_d, const SubbundleSpec& e,
                      const SubmanifoldSpec& n, int degree_bound);

} // namespace nambukit

#endif
