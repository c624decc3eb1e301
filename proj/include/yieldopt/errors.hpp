#pragma once

#include <iostream>
#include <stdexcept>
#include <string>

namespace yieldopt {

/// Raised when an input violates an operation's precondition.
class InvalidInput : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Raised when a numerical routine cannot complete (e.g. lost positive definiteness).
class NumericalError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

namespace log {

enum class Level { quiet = 0, warn = 1, info = 2 };

inline Level& level() {
    static Level lvl = Level::warn;
    return lvl;
}

inline void warn(const std::string& msg) {
    if (level() >= Level::warn) std::clog << "[yieldopt] warning: " << msg << '\n';
}

inline void info(const std::string& msg) {
    if (level() >= Level::info) std::clog << "[yieldopt] " << msg << '\n';
}

} // namespace log

} // namespace yieldopt
