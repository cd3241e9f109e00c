// Command line front end: parses a session file, runs every command and
// prints the report. Exit status 0 means every command passed, 1 means a
// negative verdict or domain error, 2 means the input could not be parsed.
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>

#include "nambukit/dsl.hpp"

namespace {

int usage(const char* argv0) {
    std::cerr << "usage: " << argv0 << " run <session-file> [--seed N] [--json] [--jobs K]\n";
    return 2;
}

} // namespace

int main(int argc, char** argv) {
    if (argc < 3 || std::string(argv[1]) != "run") return usage(argv[0]);
    std::string path = argv[2];
    nambukit::RunOptions opts;
    bool json = false;
    for (int i = 3; i < argc; ++i) {
        std::string arg = argv[i];
        if (arg == "--json") {
            json = true;
        } else if (arg == "--seed" && i + 1 < argc) {
            try {
                opts.seed = static_cast<unsigned>(std::stoul(argv[++i]));
            } catch (const std::exception&) {
                return usage(argv[0]);
            }
        } else if (arg == "--jobs" && i + 1 < argc) {
            try {
                opts.jobs = static_cast<unsigned>(std::stoul(argv[++i]));
            } catch (const std::exception&) {
                return usage(argv[0]);
            }
        } else {
            return usage(argv[0]);
        }
    }

    std::ifstream in(path);
    if (!in) {
        std::cerr << "error: cannot open " << path << "\n";
        return 2;
    }
    std::ostringstream buf;
    buf << in.rdbuf();

    try {
        nambukit::Session session = nambukit::Session::parse(buf.str());
        nambukit::Report report = session.run(opts);
        std::cout << (json ? report.json() : report.text());
        if (json) std::cout << "\n";
        return report.all_pass() ? 0 : 1;
    } catch (const nambukit::SyntaxError& e) {
        std::cerr << e.what() << "\n";
        return 2;
    } catch (const nambukit::NambuError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
}
