#include "beb/smallmat.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "beb/error.hpp"

namespace beb {

Matrix::Matrix(std::initializer_list<std::initializer_list<double>> rows) : n_(rows.size()), data_()
{
    data_.reserve(n_ * n_);
    for (const auto& r : rows) {
        if (r.size() != n_) {
            throw error(errc::dimension_mismatch, "matrix rows must have as many entries as there are rows");
        }
        data_.insert(data_.end(), r.begin(), r.end());
    }
}

Matrix Matrix::identity(std::size_t n)
{
    Matrix m(n);
    for (std::size_t i = 0; i < n; ++i) {
        m(i, i) = 1.0;
    }
    return m;
}

Matrix Matrix::companion(std::span<const double> a)
{
    const auto n = a.size();
    Matrix m(n);
    for (std::size_t i = 0; i < n; ++i) {
        m(i, 0) = -a[i];
        if (i + 1 < n) {
            m(i, i + 1) = 1.0;
        }
    }
    return m;
}

Matrix Matrix::transpose() const
{
    Matrix t(n_);
    for (std::size_t i = 0; i < n_; ++i) {
        for (std::size_t j = 0; j < n_; ++j) {
            t(j, i) = (*this)(i, j);
        }
    }
    return t;
}

double Matrix::trace() const
{
    double s = 0.0;
    for (std::size_t i = 0; i < n_; ++i) {
        s += (*this)(i, i);
    }
    return s;
}

Matrix Matrix::lower_right(std::size_t k) const
{
    const auto m = n_ >= k ? n_ - k : 0;
    Matrix b(m);
    for (std::size_t i = 0; i < m; ++i) {
        for (std::size_t j = 0; j < m; ++j) {
            b(i, j) = (*this)(i + k, j + k);
        }
    }
    return b;
}

double Matrix::norm_inf() const
{
    double best = 0.0;
    for (std::size_t i = 0; i < n_; ++i) {
        double s = 0.0;
        for (double v : row(i)) {
            s += std::abs(v);
        }
        best = std::max(best, s);
    }
    return best;
}

bool Matrix::all_finite() const
{
    return std::all_of(data_.begin(), data_.end(), [](double v) { return std::isfinite(v); });
}

Matrix& Matrix::operator+=(const Matrix& rhs)
{
    for (std::size_t k = 0; k < data_.size(); ++k) {
        data_[k] += rhs.data_[k];
    }
    return *this;
}

Matrix& Matrix::operator-=(const Matrix& rhs)
{
    for (std::size_t k = 0; k < data_.size(); ++k) {
        data_[k] -= rhs.data_[k];
    }
    return *this;
}

Matrix& Matrix::operator*=(double s)
{
    for (auto& v : data_) {
        v *= s;
    }
    return *this;
}

Matrix operator+(Matrix lhs, const Matrix& rhs) { return lhs += rhs; }
Matrix operator-(Matrix lhs, const Matrix& rhs) { return lhs -= rhs; }
Matrix operator*(Matrix lhs, double s) { return lhs *= s; }
Matrix operator*(double s, Matrix rhs) { return rhs *= s; }

Matrix operator*(const Matrix& lhs, const Matrix& rhs)
{
    const auto n = lhs.size();
    Matrix p(n);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t k = 0; k < n; ++k) {
            const double l = lhs(i, k);
            if (l == 0.0) {
                continue;
            }
            for (std::size_t j = 0; j < n; ++j) {
                p(i, j) += l * rhs(k, j);
            }
        }
    }
    return p;
}

Vector operator*(const Matrix& m, std::span<const double> v)
{
    Vector out(m.size(), 0.0);
    for (std::size_t i = 0; i < m.size(); ++i) {
        out[i] = dot(m.row(i), v);
    }
    return out;
}

Vector left_multiply(std::span<const double> v, const Matrix& m)
{
    Vector out(m.size(), 0.0);
    for (std::size_t i = 0; i < m.size(); ++i) {
        for (std::size_t j = 0; j < m.size(); ++j) {
            out[j] += v[i] * m(i, j);
        }
    }
    return out;
}

Matrix outer(std::span<const double> u, std::span<const double> v)
{
    Matrix m(u.size());
    for (std::size_t i = 0; i < u.size(); ++i) {
        for (std::size_t j = 0; j < v.size(); ++j) {
            m(i, j) = u[i] * v[j];
        }
    }
    return m;
}

double dot(std::span<const double> u, std::span<const double> v)
{
    return std::inner_product(u.begin(), u.end(), v.begin(), 0.0);
}

double norm2(std::span<const double> v) { return std::sqrt(dot(v, v)); }

double norm_inf(std::span<const double> v)
{
    double best = 0.0;
    for (double x : v) {
        best = std::max(best, std::abs(x));
    }
    return best;
}

Vector unit_vector(std::size_t n, std::size_t k)
{
    Vector e(n, 0.0);
    e.at(k) = 1.0;
    return e;
}

Complex CharPoly::operator()(Complex lambda) const
{
    Complex p = 1.0;
    for (double a : coeffs) {
        p = p * lambda + a;
    }
    return p;
}

double CharPoly::operator()(double lambda) const
{
    double p = 1.0;
    for (double a : coeffs) {
        p = p * lambda + a;
    }
    return p;
}

FaddeevLeverrier faddeev_leverrier(const Matrix& a)
{
    const auto n = a.size();
    FaddeevLeverrier out;
    out.poly.coeffs.resize(n);
    if (n == 0) {
        out.det = 1.0;
        return out;
    }

    // M_1 = I; a_k = -tr(A M_k) / k; M_{k+1} = A M_k + a_k I.
    Matrix m = Matrix::identity(n);
    Matrix m_last = m;
    for (std::size_t k = 1; k <= n; ++k) {
        Matrix am = a * m;
        const double ak = -am.trace() / static_cast<double>(k);
        out.poly.coeffs[k - 1] = ak;
        if (k == n) {
            m_last = m;
            break;
        }
        for (std::size_t i = 0; i < n; ++i) {
            am(i, i) += ak;
        }
        m = std::move(am);
    }
    const double sign = (n % 2 == 0) ? 1.0 : -1.0;
    out.det = sign * out.poly.coeffs[n - 1];
    // adj(A) = (-1)^(n-1) M_n
    out.adjugate = m_last * (-sign);
    return out;
}

double determinant(const Matrix& a) { return faddeev_leverrier(a).det; }

Vector solve(const Matrix& a, std::span<const double> rhs)
{
    const auto n = a.size();
    if (rhs.size() != n) {
        throw error(errc::dimension_mismatch, "right-hand side length differs from matrix dimension");
    }
    Matrix lu = a;
    Vector x(rhs.begin(), rhs.end());
    const double scale = std::max(1.0, a.norm_inf());
    for (std::size_t k = 0; k < n; ++k) {
        std::size_t piv = k;
        for (std::size_t i = k + 1; i < n; ++i) {
            if (std::abs(lu(i, k)) > std::abs(lu(piv, k))) {
                piv = i;
            }
        }
        if (std::abs(lu(piv, k)) <= std::numeric_limits<double>::epsilon() * scale) {
            throw error(errc::singular_a, "matrix is singular to working precision");
        }
        if (piv != k) {
            for (std::size_t j = 0; j < n; ++j) {
                std::swap(lu(k, j), lu(piv, j));
            }
            std::swap(x[k], x[piv]);
        }
        for (std::size_t i = k + 1; i < n; ++i) {
            const double f = lu(i, k) / lu(k, k);
            if (f == 0.0) {
                continue;
            }
            for (std::size_t j = k; j < n; ++j) {
                lu(i, j) -= f * lu(k, j);
            }
            x[i] -= f * x[k];
        }
    }
    for (std::size_t k = n; k-- > 0;) {
        double s = x[k];
        for (std::size_t j = k + 1; j < n; ++j) {
            s -= lu(k, j) * x[j];
        }
        x[k] = s / lu(k, k);
    }
    return x;
}

Matrix inverse(const Matrix& a, double tol)
{
    const auto fl = faddeev_leverrier(a);
    if (std::abs(fl.det) <= tol || fl.det == 0.0) {
        throw error(errc::singular_a, "det = 0: matrix has no inverse");
    }
    return fl.adjugate * (1.0 / fl.det);
}

double default_spectrum_tol(const Matrix& a) { return 1e-9 * (1.0 + a.norm_inf()); }

namespace {

constexpr int max_root_iterations = 100;

Complex eval_poly(std::span<const double> p, Complex x)
{
    // p holds the full coefficient list with leading 1 at p[0].
    Complex v = p[0];
    for (std::size_t k = 1; k < p.size(); ++k) {
        v = v * x + p[k];
    }
    return v;
}

// Value, first and second derivative by Horner.
void eval_poly_derivs(std::span<const double> p, Complex x, Complex& f, Complex& df, Complex& d2f)
{
    f = p[0];
    df = 0.0;
    d2f = 0.0;
    for (std::size_t k = 1; k < p.size(); ++k) {
        d2f = d2f * x + df;
        df = df * x + f;
        f = f * x + p[k];
    }
    d2f *= 2.0;
}

double error_bound(std::span<const double> p, double ax)
{
    // Rounding-error bound of Horner's scheme at |x| = ax.
    double e = std::abs(p[0]);
    for (std::size_t k = 1; k < p.size(); ++k) {
        e = e * ax + std::abs(p[k]);
    }
    return e * std::numeric_limits<double>::epsilon() * 4.0 * static_cast<double>(p.size());
}

Complex laguerre(std::span<const double> p, Complex x)
{
    const auto deg = static_cast<double>(p.size() - 1);
    // Fractional steps break limit cycles (as in the classic implementation).
    static constexpr double frac[] = {0.5, 0.25, 0.75, 0.13, 0.38, 0.62, 0.88, 1.0};
    for (int it = 1; it <= max_root_iterations; ++it) {
        Complex f, df, d2f;
        eval_poly_derivs(p, x, f, df, d2f);
        if (std::abs(f) <= error_bound(p, std::abs(x))) {
            return x;
        }
        const Complex g = df / f;
        const Complex h = g * g - d2f / f;
        const Complex sq = std::sqrt((deg - 1.0) * (deg * h - g * g));
        Complex gp = g + sq;
        const Complex gm = g - sq;
        if (std::abs(gm) > std::abs(gp)) {
            gp = gm;
        }
        const Complex dx = std::abs(gp) > 0.0 ? deg / gp
                                              : std::polar(1.0 + std::abs(x), static_cast<double>(it));
        const Complex x1 = x - dx;
        if (x1 == x) {
            return x;
        }
        if (it % 10 != 0) {
            x = x1;
        } else {
            x -= frac[(it / 10) % 8] * dx;
        }
    }
    return x;
}

Complex newton_polish(std::span<const double> p, Complex x)
{
    Complex best = x;
    double best_res = std::abs(eval_poly(p, x));
    for (int it = 0; it < 8; ++it) {
        Complex f, df, d2f;
        eval_poly_derivs(p, x, f, df, d2f);
        if (std::abs(df) == 0.0) {
            break;
        }
        x -= f / df;
        const double res = std::abs(eval_poly(p, x));
        if (res < best_res) {
            best_res = res;
            best = x;
        } else {
            break;
        }
    }
    return best;
}

} // namespace

std::vector<Complex> polynomial_roots(std::span<const double> coeffs, double tol, double scale)
{
    const auto n = coeffs.size();
    std::vector<double> full(n + 1);
    full[0] = 1.0;
    std::copy(coeffs.begin(), coeffs.end(), full.begin() + 1);
    for (double c : full) {
        if (!std::isfinite(c)) {
            throw error(errc::convergence_failure, "polynomial has non-finite coefficients");
        }
    }

    std::vector<Complex> roots;
    roots.reserve(n);
    std::vector<double> work = full;

    auto deflate_linear = [&](double r) {
        // synthetic division by (x - r)
        std::vector<double> q(work.size() - 1);
        double carry = work[0];
        q[0] = carry;
        for (std::size_t k = 1; k + 1 < work.size(); ++k) {
            carry = work[k] + carry * r;
            q[k] = carry;
        }
        work = std::move(q);
    };
    auto deflate_quadratic = [&](double s, double p) {
        // division by x^2 - s x + p
        const auto m = work.size() - 1;
        std::vector<double> q(m - 1);
        double q1 = 0.0;
        double q2 = 0.0;
        for (std::size_t k = 0; k + 1 < m; ++k) {
            const double v = work[k] + s * q1 - p * q2;
            q[k] = v;
            q2 = q1;
            q1 = v;
        }
        work = std::move(q);
    };

    while (work.size() > 3) {
        Complex r = laguerre(work, Complex(0.0, 0.0));
        r = newton_polish(full, r);
        if (std::abs(r.imag()) <= 1e-10 * std::max(1.0, std::abs(r))) {
            const double rr = newton_polish(full, Complex(r.real(), 0.0)).real();
            roots.emplace_back(rr, 0.0);
            deflate_linear(rr);
        } else {
            roots.push_back(r);
            roots.push_back(std::conj(r));
            deflate_quadratic(2.0 * r.real(), std::norm(r));
        }
    }
    if (work.size() == 3) {
        const double b = work[1];
        const double c = work[2];
        const double disc = b * b - 4.0 * c;
        if (disc >= 0.0) {
            const double q = -0.5 * (b + std::copysign(std::sqrt(disc), b));
            const double r1 = q;
            const double r2 = q != 0.0 ? c / q : 0.0;
            roots.emplace_back(newton_polish(full, Complex(r1, 0.0)).real(), 0.0);
            roots.emplace_back(newton_polish(full, Complex(r2, 0.0)).real(), 0.0);
        } else {
            Complex r(-0.5 * b, 0.5 * std::sqrt(-disc));
            r = newton_polish(full, r);
            roots.push_back(r);
            roots.push_back(std::conj(r));
        }
    } else if (work.size() == 2) {
        roots.emplace_back(newton_polish(full, Complex(-work[1], 0.0)).real(), 0.0);
    }

    const double bound = tol * std::pow(std::max(1.0, scale), static_cast<double>(n));
    for (const auto& r : roots) {
        const double res = std::abs(eval_poly(full, r));
        if (!std::isfinite(res) || res > bound) {
            throw error(errc::convergence_failure,
                        "root refinement did not reach the residual tolerance (|p(lambda)| = " + std::to_string(res) +
                            ")");
        }
    }
    return roots;
}

Spectrum eigenvalues(const Matrix& a, double tol, double tol_real, double tol_zero)
{
    if (!(tol > 0.0)) {
        throw error(errc::invalid_argument, "eigenvalue tolerance must be positive");
    }
    const auto fl = faddeev_leverrier(a);
    Spectrum s;
    s.eigenvalues = polynomial_roots(fl.poly.coeffs, tol, a.norm_inf());
    const double def = default_spectrum_tol(a);
    s.tol_real = tol_real >= 0.0 ? tol_real : def;
    s.tol_zero = tol_zero >= 0.0 ? tol_zero : def;
    return s;
}

int count_real_positive(const Spectrum& s)
{
    int count = 0;
    for (const auto& l : s.eigenvalues) {
        if (std::abs(l.imag()) > s.tol_real) {
            continue;
        }
        if (std::abs(l.real()) <= s.tol_zero) {
            throw error(errc::ambiguous_eigenvalue, "eigenvalue within tolerance of zero; parity is undecidable");
        }
        if (l.real() > 0.0) {
            ++count;
        }
    }
    return count;
}

int count_positive_real_part(const Spectrum& s)
{
    int count = 0;
    for (const auto& l : s.eigenvalues) {
        if (std::abs(l.real()) <= s.tol_zero) {
            throw error(errc::ambiguous_eigenvalue, "eigenvalue on the imaginary axis within tolerance");
        }
        if (l.real() > 0.0) {
            ++count;
        }
    }
    return count;
}

double min_abs_real_part(const Spectrum& s)
{
    double best = std::numeric_limits<double>::infinity();
    for (const auto& l : s.eigenvalues) {
        best = std::min(best, std::abs(l.real()));
    }
    return best;
}

std::vector<Complex> null_vector(std::vector<std::vector<Complex>> m)
{
    const auto n = m.size();
    std::vector<std::size_t> col(n);
    std::iota(col.begin(), col.end(), 0);
    for (std::size_t k = 0; k < n; ++k) {
        // complete pivoting over the trailing block
        std::size_t pi = k;
        std::size_t pj = k;
        double best = -1.0;
        for (std::size_t i = k; i < n; ++i) {
            for (std::size_t j = k; j < n; ++j) {
                if (std::abs(m[i][j]) > best) {
                    best = std::abs(m[i][j]);
                    pi = i;
                    pj = j;
                }
            }
        }
        if (k == n - 1) {
            // The smallest pivot is treated as zero: this is the rank-deficient direction.
            break;
        }
        std::swap(m[k], m[pi]);
        for (auto& r : m) {
            std::swap(r[k], r[pj]);
        }
        std::swap(col[k], col[pj]);
        for (std::size_t i = k + 1; i < n; ++i) {
            const Complex f = m[i][k] / m[k][k];
            for (std::size_t j = k; j < n; ++j) {
                m[i][j] -= f * m[k][j];
            }
        }
    }
    // Free variable is the last permuted column.
    std::vector<Complex> y(n, 0.0);
    y[n - 1] = 1.0;
    for (std::size_t k = n - 1; k-- > 0;) {
        Complex s = 0.0;
        for (std::size_t j = k + 1; j < n; ++j) {
            s += m[k][j] * y[j];
        }
        y[k] = -s / m[k][k];
    }
    std::vector<Complex> v(n);
    for (std::size_t k = 0; k < n; ++k) {
        v[col[k]] = y[k];
    }
    double nrm = 0.0;
    for (const auto& c : v) {
        nrm += std::norm(c);
    }
    nrm = std::sqrt(nrm);
    for (auto& c : v) {
        c /= nrm;
    }
    return v;
}

} // namespace beb
