#ifndef NESTOPT_ERRORS_HPP
#define NESTOPT_ERRORS_HPP

#include <cstdint>
#include <stdexcept>
#include <string>

namespace nestopt {

// Bad user-supplied configuration (config files, flag values, generator
// parameters). The CLI maps this to exit code 2.
struct ConfigError : std::runtime_error {
    explicit ConfigError(const std::string &msg) : std::runtime_error(msg) {}
};

// Filesystem problems: unreadable input, unwritable output. Exit code 3.
struct IoError : std::runtime_error {
    explicit IoError(const std::string &msg) : std::runtime_error(msg) {}
};

// Exhaustive enumeration refused because the state count exceeded the guard
// bound. Carries how many states were seen when the guard tripped. Exit 4.
struct GuardError : std::runtime_error {
    size_t states;
    explicit GuardError(size_t n)
        : std::runtime_error("exhaustive enumeration refused: candidate space exceeds guard (" +
                             std::to_string(n) + " states reached)"),
          states(n) {}
};

// A malformed record in a JSON Lines file. Line numbers are 1-based. Exit 5.
struct SchemaError : std::runtime_error {
    size_t line;
    SchemaError(size_t line_no, const std::string &msg)
        : std::runtime_error("line " + std::to_string(line_no) + ": " + msg), line(line_no) {}
};

// A transformation that fails the dependence-based legality check.
struct LegalityError : std::runtime_error {
    explicit LegalityError(const std::string &msg) : std::runtime_error(msg) {}
};

}  // namespace nestopt

#endif
