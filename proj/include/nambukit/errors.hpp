#ifndef NAMBUKIT_ERRORS_HPP
#define NAMBUKIT_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace nambukit {

// Base for all domain errors thrown by the library. The CLI maps these to
// negative verdicts (exit 1); parse errors map to usage failures (exit 2).
class NambuError : public std::runtime_error {
public:
    explicit NambuError(const std::string& what) : std::runtime_error(what) {}
};

class DivisionByZero : public NambuError {
public:
    DivisionByZero() : NambuError("division by zero rational function") {}
};

class PoleAtPoint : public NambuError {
public:
    explicit PoleAtPoint(const std::string& where)
        : NambuError("denominator vanishes at evaluation point: " + where) {}
};

class ChartMismatch : public NambuError {
public:
    explicit ChartMismatch(const std::string& detail)
        : NambuError("operands live on different charts: " + detail) {}
};

class DegreeMismatch : public NambuError {
public:
    explicit DegreeMismatch(const std::string& detail)
        : NambuError("degree mismatch: " + detail) {}
};

class OrderTooSmall : public NambuError {
public:
    explicit OrderTooSmall(const std::string& detail)
        : NambuError("order too small: " + detail) {}
};

class SingularMap : public NambuError {
public:
    explicit SingularMap(const std::string& detail)
        : NambuError("affine map is not invertible: " + detail) {}
};

class NonConstantRank : public NambuError {
public:
    explicit NonConstantRank(const std::string& detail)
        : NambuError("image rank is not certified constant along N: " + detail) {}
};

class NotAdapted : public NambuError {
public:
    explicit NotAdapted(const std::string& detail)
        : NambuError("no adapted chart normal form: " + detail) {}
};

class HypothesesFailed : public NambuError {
public:
    explicit HypothesesFailed(const std::string& report)
        : NambuError("reduction hypotheses failed: " + report) {}
};

class FIRefutedOnQuotient : public NambuError {
public:
    explicit FIRefutedOnQuotient(const std::string& detail)
        : NambuError("quotient tensor fails the fundamental identity: " + detail) {}
};

class NotClosed : public NambuError {
public:
    explicit NotClosed(const std::string& detail)
        : NambuError("gauge form is not closed: " + detail) {}
};

class SingularEverywhere : public NambuError {
public:
    explicit SingularEverywhere(const std::string& detail)
        : NambuError("gauge matrix is singular identically: " + detail) {}
};

// Internal-consistency failure: the transformed sharp map did not assemble
// into a skew tensor. Indicates an engine bug, never user input.
class SkewSymmetryViolated : public NambuError {
public:
    explicit SkewSymmetryViolated(const std::string& detail)
        : NambuError("transformed sharp map is not skew: " + detail) {}
};

class SyntaxError : public NambuError {
public:
    SyntaxError(int line, int col, const std::string& detail)
        : NambuError("syntax error at " + std::to_string(line) + ":" +
                     std::to_string(col) + ": " + detail),
          line_(line), col_(col) {}
    int line() const { return line_; }
    int col() const { return col_; }

private:
    int line_;
    int col_;
};

class UnknownName : public NambuError {
public:
    explicit UnknownName(const std::string& name)
        : NambuError("unknown name: " + name) {}
};

class DuplicateName : public NambuError {
public:
    explicit DuplicateName(const std::string& name)
        : NambuError("name already declared: " + name) {}
};

} // namespace nambukit

#endif
