#ifndef NAMBUKIT_DSL_HPP
#define NAMBUKIT_DSL_HPP

#include <map>
#include <memory>
#include <string>
#include <utility>
#include <vector>

#include "nambukit/oracle.hpp"

namespace nambukit {

// Outcome of one executed command. `fields` preserves insertion order, so a
// report serializes the same way every run.
struct CommandResult {
    std::string echo;     // canonical command text
    std::string verdict;  // short outcome word: verified, reduced, error, ...
    bool pass = true;
    std::vector<std::pair<std::string, std::string>> fields;
    double seconds = 0.0;  // wall time, human report only
};

struct Report {
    unsigned seed = 1;
    std::vector<std::string> warnings;
    std::vector<CommandResult> commands;

    bool all_pass() const;
    // Human-readable block per command, including timing.
    std::string text() const;
    // Compact single-line JSON, schema 1. Timing is deliberately excluded:
    // two runs with the same session and seed are byte-identical.
    std::string json() const;
};

struct RunOptions {
    unsigned seed = 1;
    unsigned jobs = 1;
};

namespace dsl {
struct Statement;
}

// A parsed and semantically checked session: one chart declaration, named
// value/geometry declarations (evaluated eagerly), and a command list
// (arguments resolved when run, since reduction and gauge commands may
// register new objects on quotient charts).
class Session {
public:
    static Session parse(const std::string& source);

    // Canonical text of the whole session. Fixed point of parse:
    // Session::parse(s.render()).render() == s.render().
    std::string render() const;

    // Executes every command in order. Domain errors are captured in the
    // failing command's result; later commands still run.
    Report run(const RunOptions& opts = {}) const;

    const ChartPtr& chart() const { return chart_; }
    const std::vector<std::string>& warnings() const { return warnings_; }

    // Declared objects, by name. Throw UnknownName when absent.
    const NambuStructure& structure(const std::string& name) const;
    const RationalFunction& fn(const std::string& name) const;
    const Form& form(const std::string& name) const;
    const SubmanifoldSpec& submanifold(const std::string& name) const;
    const SubbundleSpec& bundle(const std::string& name) const;
    const AffineMap& chart_map(const std::string& name) const;

    Session(Session&&) noexcept;
    Session& operator=(Session&&) noexcept;
    ~Session();

private:
    Session();

    ChartPtr chart_;
    std::vector<dsl::Statement> statements_;
    std::vector<std::string> warnings_;

    std::map<std::string, RationalFunction> fns_;
    std::map<std::string, Form> forms_;
    std::map<std::string, NambuStructure> structures_;
    std::map<std::string, SubmanifoldSpec> submanifolds_;
    std::map<std::string, SubbundleSpec> bundles_;
    std::map<std::string, AffineMap> maps_;

    friend struct SessionBuilder;
    friend struct Runner;
};

} // namespace nambukit

#endif
