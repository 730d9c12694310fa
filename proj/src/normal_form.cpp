#include "beb/normal_form.hpp"

#include <cmath>

#include "beb/error.hpp"

namespace beb {

namespace {

// PBH: A is observable iff no eigenvector v has e_1^T v = 0.
bool pbh_test(const Matrix& a)
{
    const auto n = a.size();
    Spectrum spec;
    try {
        spec = eigenvalues(a);
    } catch (const error&) {
        return false;
    }
    for (const auto& lambda : spec.eigenvalues) {
        std::vector<std::vector<Complex>> m(n, std::vector<Complex>(n));
        for (std::size_t i = 0; i < n; ++i) {
            for (std::size_t j = 0; j < n; ++j) {
                m[i][j] = a(i, j) - (i == j ? lambda : Complex(0.0));
            }
        }
        const auto v = null_vector(std::move(m));
        if (std::abs(v[0]) <= 1e-7) {
            return false;
        }
    }
    return true;
}

} // namespace

Observability observability(const Matrix& a)
{
    const auto n = a.size();
    Observability out;
    out.Phi = Matrix(n);
    Vector row = unit_vector(n, 0);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) {
            out.Phi(i, j) = row[j];
        }
        row = left_multiply(row, a);
    }
    out.det_phi = determinant(out.Phi);
    const double exponent = static_cast<double>(n * (n - 1)) / 2.0;
    const double tol = 1e-9 * std::pow(std::max(1.0, a.norm_inf()), exponent);
    out.observable = std::abs(out.det_phi) > tol;
    out.pbh_observable = pbh_test(a);
    return out;
}

NormalFormResult to_normal_form(const PWLSystem& sys, double mu)
{
    sys.validate();
    const auto n = sys.dim();
    if (sys.c[0] == 0.0) {
        throw error(errc::zero_c1, "c_1 = 0: cannot scale d_1 to +-1");
    }
    auto obs = observability(sys.A);
    if (!obs.observable) {
        throw error(errc::not_observable,
                    "det(Phi) = 0: PBH observability fails (A has an eigenvector orthogonal to e_1)");
    }
    const auto poly = faddeev_leverrier(sys.A).poly;

    TransformRecord rec;
    rec.Psi = Matrix(n);
    for (std::size_t i = 0; i < n; ++i) {
        rec.Psi(i, i) = 1.0;
        for (std::size_t j = 0; j < i; ++j) {
            rec.Psi(i, j) = poly.coeffs[i - j - 1];
        }
    }
    rec.Phi = std::move(obs.Phi);
    rec.Q = rec.Psi * rec.Phi;
    const Vector qb = rec.Q * std::span<const double>(sys.b);
    // J^T v shifts v down by one.
    rec.r.assign(n, 0.0);
    for (std::size_t i = 1; i < n; ++i) {
        rec.r[i] = qb[i - 1];
    }
    rec.s = qb[n - 1];
    const double s_tol = 1e-12 * (1.0 + rec.Q.norm_inf() * norm2(sys.b));
    if (std::abs(rec.s) <= s_tol) {
        throw error(errc::zero_s, "s = 0: transversality fails (s = (-1)^(n+1) rho^T b)");
    }

    const Matrix c = Matrix::companion(poly.coeffs);
    const Matrix q_inv = inverse(rec.Q);
    rec.conjugation_residual = (rec.Q * sys.A * q_inv - c).norm_inf();
    if (rec.conjugation_residual > 1e-8 * (1.0 + sys.A.norm_inf())) {
        throw error(errc::internal_inconsistency,
                    "Q A Q^-1 differs from the companion matrix by " + std::to_string(rec.conjugation_residual));
    }
    Vector fr = qb;
    const Vector cr = c * std::span<const double>(rec.r);
    for (std::size_t i = 0; i < n; ++i) {
        fr[i] -= cr[i];
    }
    fr[n - 1] -= rec.s;
    rec.forcing_residual = norm_inf(fr);

    Vector d = rec.Q * std::span<const double>(sys.c);
    rec.scale = 1.0 / std::abs(d[0]);
    for (auto& v : d) {
        v *= rec.scale;
    }
    d[0] = d[0] > 0.0 ? 1.0 : -1.0;
    return {NormalFormParams(poly.coeffs, d, rec.s * mu * rec.scale), std::move(rec)};
}

Vector to_normal_coordinates(const TransformRecord& rec, std::span<const double> x, double mu)
{
    Vector y = rec.Q * x;
    for (std::size_t i = 0; i < y.size(); ++i) {
        y[i] = (y[i] + rec.r[i] * mu) * rec.scale;
    }
    return y;
}

} // namespace beb
