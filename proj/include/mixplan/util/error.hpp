#pragma once

#include <stdexcept>
#include <string>

namespace mixplan {

// Base class for all errors raised by the library.
struct Error : std::runtime_error {
    explicit Error(const std::string& what) : std::runtime_error(what) {}
};

// Raised by the parsers; carries a source position.
struct ParseError : Error {
    ParseError(const std::string& what, int line, int col)
        : Error("parse error at " + std::to_string(line) + ":" + std::to_string(col) + ": " + what),
          line(line),
          col(col) {}
    int line;
    int col;
};

// Raised when a declaration or a cross-reference is invalid.
struct ValidationError : Error {
    using Error::Error;
};

// Raised when grounding or solving exceeds a configured resource cap.
struct ResourceError : Error {
    using Error::Error;
};

}  // namespace mixplan
