#include "beb/error.hpp"

namespace beb {

std::string_view to_string(errc code) noexcept
{
    switch (code) {
    case errc::convergence_failure: return "ConvergenceFailure";
    case errc::ambiguous_eigenvalue: return "AmbiguousEigenvalue";
    case errc::schema_error: return "SchemaError";
    case errc::dimension_mismatch: return "DimensionMismatch";
    case errc::non_unit_d1: return "NonUnitD1";
    case errc::off_surface: return "OffSurface";
    case errc::not_sliding_region: return "NotSlidingRegion";
    case errc::degenerate_denominator: return "DegenerateDenominator";
    case errc::zero_c1: return "ZeroC1";
    case errc::singular_a: return "SingularA";
    case errc::singular_mtilde: return "SingularMtilde";
    case errc::non_transversal: return "NonTransversal";
    case errc::internal_inconsistency: return "InternalInconsistency";
    case errc::zero_rho_c: return "ZeroRhoC";
    case errc::degenerate_scenario: return "DegenerateScenario";
    case errc::not_observable: return "NotObservable";
    case errc::zero_s: return "ZeroS";
    case errc::tangency_stop: return "TangencyStop";
    case errc::repelling_forward_flow: return "RepellingForwardFlow";
    case errc::undefined_orbit: return "UndefinedOrbit";
    case errc::inconclusive: return "Inconclusive";
    case errc::invalid_argument: return "InvalidArgument";
    }
    return "Unknown";
}

bool is_degeneracy(errc code) noexcept
{
    switch (code) {
    case errc::ambiguous_eigenvalue:
    case errc::zero_c1:
    case errc::singular_a:
    case errc::singular_mtilde:
    case errc::non_transversal:
    case errc::zero_rho_c:
    case errc::degenerate_scenario:
    case errc::not_observable:
    case errc::zero_s:
    case errc::degenerate_denominator:
    case errc::tangency_stop:
    case errc::repelling_forward_flow:
    case errc::inconclusive:
        return true;
    default:
        return false;
    }
}

} // namespace beb
