#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace beb {

/// Failure categories raised by the library. Each names the hypothesis
/// that was violated so callers (and the CLI) can report it verbatim.
enum class errc {
    convergence_failure,
    ambiguous_eigenvalue,
    schema_error,
    dimension_mismatch,
    non_unit_d1,
    off_surface,
    not_sliding_region,
    degenerate_denominator,
    zero_c1,
    singular_a,
    singular_mtilde,
    non_transversal,
    internal_inconsistency,
    zero_rho_c,
    degenerate_scenario,
    not_observable,
    zero_s,
    tangency_stop,
    repelling_forward_flow,
    undefined_orbit,
    inconclusive,
    invalid_argument,
};

std::string_view to_string(errc code) noexcept;

/// True for refusals caused by degenerate input (tangency, loss of
/// observability or transversality, zero eigenvalues, ...), as opposed to
/// malformed input.
bool is_degeneracy(errc code) noexcept;

class error : public std::runtime_error {
public:
    error(errc code, const std::string& what)
        : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code)
    {
    }

    errc code() const noexcept { return code_; }

private:
    errc code_;
};

} // namespace beb
