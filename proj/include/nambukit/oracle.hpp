#ifndef NAMBUKIT_ORACLE_HPP
#define NAMBUKIT_ORACLE_HPP

#include <optional>
#include <random>
#include <string>

#include "nambukit/gauge.hpp"

namespace nambukit {

// Independent numeric back end: every symbolic verdict can be re-checked by
// exact evaluation at random rational points. A mismatch against a verdict
// the symbolic engine reported as verified indicates an engine bug.
struct OracleOutcome {
    int points = 0;      // sample points actually evaluated
    int skipped = 0;     // points abandoned after the pole-retry cap
    int mismatches = 0;
    std::optional<std::string> first_mismatch;

    bool ok() const { return mismatches == 0; }
    std::string str() const;
};

// Small-height random rationals: numerators and denominators drawn from
// [-9, 9], zero denominators rejected. One value per chart variable
// (coordinates and parameters).
class PointSampler {
public:
    PointSampler(ChartPtr chart, unsigned seed);

    std::vector<Rational> next();
    Rational next_scalar();

private:
    ChartPtr chart_;
    std::mt19937 rng_;
};

// Evaluates the fundamental-identity residual on random affine functions at
// random points; expects zero everywhere when the structure is Nambu.
OracleOutcome oracle_fi(const NambuStructure& pi, int points, unsigned seed);

// pair(beta, sharp(eta)) = pair(eta ^ beta, tensor) on random constant
// (n-1)-forms eta and 1-forms beta.
OracleOutcome oracle_pair_adjunction(const NambuStructure& pi, int points, unsigned seed);

// sharp_T((Id + btilde o sharp) alpha) = sharp_Pi(alpha) for the gauge
// transport T of pi by b, on random constant (n-1)-forms, off the
// degeneracy locus (poles skipped).
OracleOutcome oracle_anchor(const NambuStructure& pi, const Form& b, int points,
                            unsigned seed);

// Exact equality of two scalars at random points.
OracleOutcome oracle_scalar_equal(const RationalFunction& a, const RationalFunction& b,
                                  int points, unsigned seed);

// Coefficientwise equality of two alternating tensors at random points.
OracleOutcome oracle_tensor_equal(const Multivector& a, const Multivector& b, int points,
                                  unsigned seed);

} // namespace nambukit

#endif
