#pragma once

// The truncated local Filippov system
//
//     x' = A x + b mu   (x_1 < 0),      x' = c   (x_1 > 0),
//
// with discontinuity surface x_1 = 0, and the companion-matrix normal form
// (A = C(a), b = e_n, c = d, d_1 = +-1).

#include <optional>
#include <string>
#include <string_view>
#include <variant>

#include <json.hpp>

#include "beb/smallmat.hpp"

namespace beb {

struct PWLSystem {
    Matrix A;
    Vector b;
    Vector c;

    std::size_t dim() const noexcept { return A.size(); }

    /// Throws errc::dimension_mismatch / errc::schema_error on inconsistent
    /// sizes or non-finite entries.
    void validate() const;

    /// F^L(x; mu) = A x + b mu.
    Vector left_field(std::span<const double> x, double mu) const;
};

/// Parameters of the normal form. d_1 is an exact sign; the rest of d is
/// stored separately so |d_1| = 1 holds by construction.
struct NormalFormParams {
    Vector a;          // a_1..a_n
    int d1 = -1;       // +1 or -1
    Vector d_tail;     // d_2..d_n
    double mu = 0.0;

    NormalFormParams() = default;
    /// Throws errc::non_unit_d1 unless |d[0]| == 1, errc::dimension_mismatch
    /// if a and d differ in length.
    NormalFormParams(Vector a_coeffs, const Vector& d, double mu_value);

    std::size_t dim() const noexcept { return a.size(); }
    Vector d() const;
    void validate() const;
};

/// Normal form in two dimensions, d_1 = -1: C = [[tau_L, 1], [-delta_L, 0]].
struct TraceParams2D {
    double tau_L = 0.0;
    double delta_L = 0.0;
    double d2 = 0.0;

    friend bool operator==(const TraceParams2D&, const TraceParams2D&) = default;
};

/// Normal form in three dimensions, d_1 = -1: tau_L, sigma_L, delta_L are the
/// trace, second trace and determinant of C; tau_S, delta_S the trace and
/// determinant of the sliding Jacobian.
struct TraceParams3D {
    double tau_L = 0.0;
    double sigma_L = 0.0;
    double delta_L = 0.0;
    double tau_S = 0.0;
    double delta_S = 0.0;

    friend bool operator==(const TraceParams3D&, const TraceParams3D&) = default;
};

NormalFormParams from_traces(const TraceParams2D& p, double mu);
NormalFormParams from_traces(const TraceParams3D& p, double mu);

/// Inverse of from_traces. Throws errc::invalid_argument unless the normal
/// form has the matching dimension and d_1 = -1.
TraceParams2D to_traces_2d(const NormalFormParams& nf);
TraceParams3D to_traces_3d(const NormalFormParams& nf);

/// A = C(a), b = e_n, c = d.
PWLSystem embed(const NormalFormParams& nf);

/// Result of reading a system document: either a general system with its
/// parameter value, or a normal form (which carries mu itself).
struct SystemDocument {
    std::variant<PWLSystem, NormalFormParams> model;
    double mu = 0.0;
    /// Optional command configuration (the "run" object), passed through
    /// untouched.
    std::optional<nlohmann::json> run;

    bool is_normal_form() const noexcept { return std::holds_alternative<NormalFormParams>(model); }
    /// The system to analyse: the model itself, or embed() of the normal form.
    PWLSystem system() const;
};

/// Parse the JSON schema: exactly one of
///   "system":      {"A": [[...]], "b": [...], "c": [...], "mu": x}
///   "normal_form": {"a": [...], "d": [...], "mu": x}
///   "traces":      {"tau_L", "delta_L", "d2", "mu"}                  (n = 2)
///                  {"tau_L", "sigma_L", "delta_L", "tau_S", "delta_S", "mu"}  (n = 3)
/// plus an optional "run" object. "mu" defaults to 0 where omitted.
/// Errors: errc::schema_error, errc::dimension_mismatch, errc::non_unit_d1.
SystemDocument parse_system(std::string_view text);
SystemDocument parse_system(const nlohmann::json& doc);
inline SystemDocument parse_system(const char* text) { return parse_system(std::string_view(text)); }
inline SystemDocument parse_system(const std::string& text) { return parse_system(std::string_view(text)); }
SystemDocument load_system(const std::string& path);

nlohmann::json to_json(const PWLSystem& sys, double mu);
nlohmann::json to_json(const NormalFormParams& nf);

} // namespace beb
