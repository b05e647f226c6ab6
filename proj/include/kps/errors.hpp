#pragma once

#include <stdexcept>
#include <string>

namespace kps {

/// Base class for all engine errors.
struct error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Expression-text parse failure; carries the byte offset of the problem.
struct parse_error : error {
    std::size_t position;
    parse_error(const std::string& msg, std::size_t pos)
        : error(msg + " (at offset " + std::to_string(pos) + ")"), position(pos) {}
};

/// Unknown symbol, duplicate name, or cross-environment mixup.
struct symbol_error : error {
    using error::error;
};

/// Division by an identically zero expression, or a substitution whose
/// resulting denominator is identically zero.
struct pole_error : error {
    using error::error;
};

/// Attempt to differentiate an expression containing an opaque free-function
/// symbol.
struct opaque_derivative_error : error {
    using error::error;
};

/// A Groebner computation exceeded its degree or pair budget.
struct resource_error : error {
    using error::error;
};

/// A linear-solve pivot is nonzero modulo the current ideal but could not be
/// certified a unit: no sound determination exists without case analysis.
struct undecidable_pivot_error : error {
    std::string pivot;
    explicit undecidable_pivot_error(const std::string& pivot_text)
        : error("undecidable pivot: " + pivot_text + " is nonzero but not a unit modulo the current ideal"),
          pivot(pivot_text) {}
};

/// Malformed system-spec input (.kps file or SystemSpec contents).
struct input_error : error {
    using error::error;
};

} // namespace kps
