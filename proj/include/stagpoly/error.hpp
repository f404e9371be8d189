#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace stagpoly {

enum class ErrorKind {
    validation,     // malformed input document or arguments
    orientation,    // clockwise or self-intersecting cell
    non_manifold,   // edge shared by more than two cells
    degenerate_cell,
    star_shape,     // fan triangle with (near) zero or negative area
    generation,     // mesh generator could not produce a valid mesh
    capability,     // request outside the supported range (quadrature degree, ...)
    coefficient,    // coefficient tensor not SPD
    boundary,       // inconsistent boundary specification
    singular,       // numerically singular matrix
    not_spd,        // CG detected p^T A p <= 0
    non_convergence,
    condensation,
    io,
    config,
};

constexpr std::string_view to_string(ErrorKind kind)
{
    switch (kind) {
    case ErrorKind::validation: return "validation";
    case ErrorKind::orientation: return "orientation";
    case ErrorKind::non_manifold: return "non-manifold";
    case ErrorKind::degenerate_cell: return "degenerate cell";
    case ErrorKind::star_shape: return "star-shape violation";
    case ErrorKind::generation: return "generation";
    case ErrorKind::capability: return "capability";
    case ErrorKind::coefficient: return "coefficient";
    case ErrorKind::boundary: return "boundary";
    case ErrorKind::singular: return "singular matrix";
    case ErrorKind::not_spd: return "not SPD";
    case ErrorKind::non_convergence: return "non-convergence";
    case ErrorKind::condensation: return "condensation";
    case ErrorKind::io: return "io";
    case ErrorKind::config: return "config";
    }
    return "unknown";
}

/// Single exception type for the library; `kind()` tells callers what failed.
class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& what)
        : std::runtime_error(std::string(to_string(kind)) + " error: " + what), kind_(kind)
    {}

    ErrorKind kind() const noexcept { return kind_; }

private:
    ErrorKind kind_;
};

[[noreturn]] inline void fail(ErrorKind kind, const std::string& what)
{
    throw Error(kind, what);
}

} // namespace stagpoly
