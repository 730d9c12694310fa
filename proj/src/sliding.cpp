#include "beb/sliding.hpp"

#include <cmath>

#include "beb/error.hpp"

namespace beb {

std::string_view to_string(RegionType r) noexcept
{
    switch (r) {
    case RegionType::Crossing:
        return "crossing";
    case RegionType::AttractingSliding:
        return "attracting_sliding";
    case RegionType::RepellingSliding:
        return "repelling_sliding";
    case RegionType::Tangency:
        return "tangency";
    }
    return "unknown";
}

double tangency_tolerance(std::span<const double> x) noexcept { return 1e-9 * (1.0 + norm2(x)); }

namespace {

void require_on_surface(std::span<const double> x)
{
    if (x.empty() || std::abs(x[0]) > tangency_tolerance(x)) {
        throw error(errc::off_surface, "point is not on the switching surface x_1 = 0");
    }
}

void require_c1(const PWLSystem& sys)
{
    if (sys.c.at(0) == 0.0) {
        throw error(errc::zero_c1, "c_1 = 0: the right-hand field is tangent to the surface");
    }
}

double left_first(const PWLSystem& sys, std::span<const double> x, double mu)
{
    return dot(sys.A.row(0), x) + sys.b[0] * mu;
}

} // namespace

double chi(const PWLSystem& sys, std::span<const double> x, double mu)
{
    require_on_surface(x);
    return left_first(sys, x, mu) * sys.c[0];
}

RegionType region_type(const PWLSystem& sys, std::span<const double> x, double mu)
{
    require_on_surface(x);
    const double tol = tangency_tolerance(x);
    const double fl = left_first(sys, x, mu);
    const double fr = sys.c[0];
    if (std::abs(fl) <= tol || std::abs(fr) <= tol) {
        return RegionType::Tangency;
    }
    if (fl * fr > 0.0) {
        return RegionType::Crossing;
    }
    return fl > 0.0 ? RegionType::AttractingSliding : RegionType::RepellingSliding;
}

Vector sliding_field_true_time(const PWLSystem& sys, std::span<const double> x, double mu)
{
    require_on_surface(x);
    const Vector fl = sys.left_field(x, mu);
    const double fl1 = fl[0];
    const double fr1 = sys.c[0];
    if (!(fl1 * fr1 < 0.0)) {
        throw error(errc::not_sliding_region, "chi >= 0: the point is not in a sliding region");
    }
    const double denom = fl1 - fr1;
    if (std::abs(denom) < tangency_tolerance(x)) {
        throw error(errc::degenerate_denominator, "F^L_1 - F^R_1 vanishes");
    }
    Vector fs(fl.size());
    for (std::size_t i = 0; i < fl.size(); ++i) {
        fs[i] = (fl1 * sys.c[i] - fr1 * fl[i]) / denom;
    }
    fs[0] = 0.0;
    return fs;
}

double convex_weight(const PWLSystem& sys, std::span<const double> x, double mu)
{
    const double fl1 = left_first(sys, x, mu);
    const double fr1 = sys.c.at(0);
    return -fr1 / (fl1 - fr1);
}

Vector scaled_sliding_field(const PWLSystem& sys, std::span<const double> x, double mu)
{
    require_c1(sys);
    Vector f = sys.left_field(x, mu);
    const double g = f[0] / sys.c[0];
    for (std::size_t i = 0; i < f.size(); ++i) {
        f[i] -= g * sys.c[i];
    }
    f[0] = 0.0;
    return f;
}

double time_rescale_factor(const PWLSystem& sys, std::span<const double> x, double mu)
{
    require_c1(sys);
    const double fr1 = sys.c[0];
    return -fr1 / (left_first(sys, x, mu) - fr1);
}

Vector SlidingSystem::reduced_field(std::span<const double> y, double mu) const
{
    Vector f = Mtilde * y;
    for (std::size_t i = 0; i < f.size(); ++i) {
        f[i] += forcing[i] * mu;
    }
    return f;
}

SlidingSystem scaled_sliding_system(const PWLSystem& sys)
{
    sys.validate();
    require_c1(sys);
    const auto n = sys.dim();
    const double c1 = sys.c[0];

    // P = I - c e_1^T / c_1
    Matrix p = Matrix::identity(n);
    for (std::size_t i = 0; i < n; ++i) {
        p(i, 0) -= sys.c[i] / c1;
    }
    p(0, 0) = 0.0;

    SlidingSystem s;
    s.M = p * sys.A;
    for (std::size_t j = 0; j < n; ++j) {
        s.M(0, j) = 0.0;
    }
    s.Mtilde = s.M.lower_right(1);
    const Vector pb = p * std::span<const double>(sys.b);
    s.forcing.assign(pb.begin() + 1, pb.end());
    return s;
}

} // namespace beb
