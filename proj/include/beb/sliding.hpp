#pragma once

// Region typing on the switching surface x_1 = 0 and the Filippov sliding
// vector field, in true time and in the rescaled (linear) form.

#include <string_view>

#include "beb/model.hpp"

namespace beb {

enum class RegionType { Crossing, AttractingSliding, RepellingSliding, Tangency };

std::string_view to_string(RegionType r) noexcept;

/// 1e-9 (1 + ||x||): below this a first component counts as zero.
double tangency_tolerance(std::span<const double> x) noexcept;

/// chi = F^L_1 * F^R_1 at a point of the surface. Throws errc::off_surface
/// when |x_1| exceeds tangency_tolerance(x).
double chi(const PWLSystem& sys, std::span<const double> x, double mu);

RegionType region_type(const PWLSystem& sys, std::span<const double> x, double mu);

/// Filippov's convex combination (F^L_1 F^R - F^R_1 F^L) / (F^L_1 - F^R_1),
/// with the first component set to exactly zero.
/// Errors: errc::off_surface, errc::not_sliding_region (chi >= 0),
/// errc::degenerate_denominator.
Vector sliding_field_true_time(const PWLSystem& sys, std::span<const double> x, double mu);

/// Weight alpha with F^S = alpha F^L + (1 - alpha) F^R.
double convex_weight(const PWLSystem& sys, std::span<const double> x, double mu);

/// The sliding field with denominator -F^R_1 = -c_1 instead of
/// F^L_1 - F^R_1: (I - c e_1^T / c_1)(A x + b mu). Linear in (x, mu).
Vector scaled_sliding_field(const PWLSystem& sys, std::span<const double> x, double mu);

/// Positive factor k with F^S(true time) = k * scaled field on sliding regions.
double time_rescale_factor(const PWLSystem& sys, std::span<const double> x, double mu);

struct SlidingSystem {
    /// (I - c e_1^T / c_1) A. Its first row is zero.
    Matrix M;
    /// Lower-right (n-1) x (n-1) block of M.
    Matrix Mtilde;
    /// mu-coefficient of the reduced field: components 2..n of
    /// (I - c e_1^T / c_1) b.
    Vector forcing;

    /// Reduced scaled field Mtilde y + forcing * mu, y = (x_2..x_n).
    Vector reduced_field(std::span<const double> y, double mu) const;
};

/// Throws errc::zero_c1.
SlidingSystem scaled_sliding_system(const PWLSystem& sys);

} // namespace beb
