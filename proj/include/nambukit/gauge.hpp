#ifndef NAMBUKIT_GAUGE_HPP
#define NAMBUKIT_GAUGE_HPP

#include <optional>
#include <vector>

#include "nambukit/reduction.hpp"

namespace nambukit {

// Slot map of an n-form: X -> i_X B.
Form btilde(const Form& b, const Multivector& x);

// The endomorphism Id + btilde(B, -) o sharp of (n-1)-forms, expanded over
// the lexicographic blade basis, together with its determinant, inverse and
// the transported structure. Invertibility is decided over the
// rational-function field; the pointwise map degenerates exactly on the zero
// set of vanishing_locus (the determinant's numerator).
struct GaugeData {
    Form b;
    std::vector<MultiIndex> blades;  // row/column labels
    Mat<RationalFunction> matrix;
    RationalFunction det;
    MultiPoly vanishing_locus;
    Mat<RationalFunction> inverse;
    NambuStructure transported;
};

// Builds the full gauge package. Throws NotClosed when dB != 0,
// DegreeMismatch when deg B differs from the order, SingularEverywhere when
// the determinant vanishes identically. The transported tensor is
// reconstructed from the composite map sharp o inverse and the
// reconstruction is verified to reproduce that map on every basis form
// (SkewSymmetryViolated otherwise; the theory rules it out).
GaugeData gauge_matrix(const NambuStructure& pi, const Form& b);

// The transported structure alone.
NambuStructure gauge_transform(const NambuStructure& pi, const Form& b);

// Compares the pointwise column spans of the two sharp maps at sample_count
// random rational points, skipping points where any coefficient has a pole.
bool check_characteristic_match(const NambuStructure& a, const NambuStructure& b,
                                int sample_count, unsigned seed = 1u);

struct LeibnizPairWitness {
    MultiIndex alpha, beta;
};

struct LeibnizIsoReport {
    bool holds = false;
    std::optional<LeibnizPairWitness> witness;  // first failing basis pair
};

// Verifies that alpha -> alpha + btilde(B, sharp alpha) intertwines the
// anchors and the form brackets of the structures before and after the
// gauge, on all pairs of basis (n-1)-forms.
LeibnizIsoReport check_leibniz_iso(const NambuStructure& pi, const Form& b);

struct CommuteReport {
    bool equal = false;
    NambuStructure gauged_then_reduced;  // reduce(gauge(Pi, B))
    NambuStructure reduced_then_gauged;  // gauge(reduce(Pi), projected B)
    Form projected_b;                    // B restricted to N and pushed to the quotient
};

// Runs the two pipeline orders and compares the quotient tensors exactly.
// Throws HypothesesFailed naming the failing hypothesis: contraction of B
// along TN must kill E on N ("hypothesis (a)"), B must restrict to a form
// pulled back from the quotient ("hypothesis (b)"), the gauge map must be
// invertible ("invertibility"), and the underlying problem must reduce
// ("reducibility").
CommuteReport gauge_reduce_commute(const ReductionProblem& p, const Form& b);

} // namespace nambukit

#endif
