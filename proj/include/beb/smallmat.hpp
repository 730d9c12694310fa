#pragma once

// Dense real linear algebra for the small matrices (n <= ~8) that appear in
// boundary-equilibrium analysis: Jacobians of the smooth piece, sliding
// Jacobians, companion and observability matrices.

#include <complex>
#include <cstddef>
#include <initializer_list>
#include <span>
#include <vector>

namespace beb {

using Vector = std::vector<double>;
using Complex = std::complex<double>;

/// Square, row-major, heap-backed n x n matrix.
class Matrix {
public:
    Matrix() = default;
    explicit Matrix(std::size_t n) : n_(n), data_(n * n, 0.0) {}

    /// Throws errc::dimension_mismatch unless every row has as many entries
    /// as there are rows.
    Matrix(std::initializer_list<std::initializer_list<double>> rows);

    static Matrix identity(std::size_t n);

    /// Companion layout: first column (-a_1, ..., -a_n), ones on the
    /// superdiagonal, zeros elsewhere. Its characteristic polynomial is
    /// lambda^n + a_1 lambda^(n-1) + ... + a_n.
    static Matrix companion(std::span<const double> a);

    std::size_t size() const noexcept { return n_; }
    bool empty() const noexcept { return n_ == 0; }

    double& operator()(std::size_t i, std::size_t j) { return data_[i * n_ + j]; }
    double operator()(std::size_t i, std::size_t j) const { return data_[i * n_ + j]; }

    std::span<const double> row(std::size_t i) const { return {data_.data() + i * n_, n_}; }
    std::span<const double> data() const noexcept { return data_; }

    Matrix transpose() const;
    double trace() const;

    /// The (n-k) x (n-k) block in the lower-right corner.
    Matrix lower_right(std::size_t k = 1) const;

    /// Max absolute row sum.
    double norm_inf() const;

    bool all_finite() const;

    Matrix& operator+=(const Matrix& rhs);
    Matrix& operator-=(const Matrix& rhs);
    Matrix& operator*=(double s);

    friend bool operator==(const Matrix&, const Matrix&) = default;

private:
    std::size_t n_ = 0;
    std::vector<double> data_;
};

Matrix operator+(Matrix lhs, const Matrix& rhs);
Matrix operator-(Matrix lhs, const Matrix& rhs);
Matrix operator*(Matrix lhs, double s);
Matrix operator*(double s, Matrix rhs);
Matrix operator*(const Matrix& lhs, const Matrix& rhs);
Vector operator*(const Matrix& m, std::span<const double> v);

/// Row vector times matrix, v^T M.
Vector left_multiply(std::span<const double> v, const Matrix& m);

/// Outer product u v^T.
Matrix outer(std::span<const double> u, std::span<const double> v);

double dot(std::span<const double> u, std::span<const double> v);
double norm2(std::span<const double> v);
double norm_inf(std::span<const double> v);
Vector unit_vector(std::size_t n, std::size_t k);

/// Monic characteristic polynomial lambda^n + a_1 lambda^(n-1) + ... + a_n,
/// stored as (a_1, ..., a_n).
struct CharPoly {
    std::vector<double> coeffs;

    std::size_t degree() const noexcept { return coeffs.size(); }
    Complex operator()(Complex lambda) const;
    double operator()(double lambda) const;
};

struct FaddeevLeverrier {
    CharPoly poly;
    Matrix adjugate;
    double det = 0.0;
};

/// Characteristic polynomial, adjugate and determinant in one recurrence.
/// Total on finite input; the adjugate is returned for singular A as well.
FaddeevLeverrier faddeev_leverrier(const Matrix& a);

double determinant(const Matrix& a);

/// Solve A x = rhs by Gaussian elimination with partial pivoting.
/// Throws errc::singular_a when a pivot vanishes.
Vector solve(const Matrix& a, std::span<const double> rhs);

/// Inverse via adjugate and determinant. Throws errc::singular_a when
/// |det| <= tol.
Matrix inverse(const Matrix& a, double tol = 0.0);

struct Spectrum {
    std::vector<Complex> eigenvalues;
    /// |Im| at or below this counts as real.
    double tol_real = 0.0;
    /// |Re| at or below this counts as zero.
    double tol_zero = 0.0;
};

/// 1e-9 (1 + ||A||_inf): default for both Spectrum tolerances.
double default_spectrum_tol(const Matrix& a);

/// Roots of lambda^n + a_1 lambda^(n-1) + ... + a_n. Laguerre iteration with
/// deflation (real linear or real quadratic factors, so complex roots come
/// out as exact conjugate pairs), then Newton polishing on the undeflated
/// polynomial. Each root gets at most 100 iterations; every root must meet
/// |p(lambda)| <= tol * max(1, scale)^n or errc::convergence_failure is
/// thrown.
std::vector<Complex> polynomial_roots(std::span<const double> coeffs, double tol = 1e-9, double scale = 1.0);

/// Eigenvalues as roots of the Faddeev-LeVerrier characteristic polynomial.
/// The residual bound is tol * max(1, ||A||)^n; tol_real / tol_zero default
/// to default_spectrum_tol(A) when negative.
Spectrum eigenvalues(const Matrix& a, double tol = 1e-9, double tol_real = -1.0, double tol_zero = -1.0);

/// Eigenvalues with |Im| <= tol_real and Re > tol_zero. Throws
/// errc::ambiguous_eigenvalue when a real eigenvalue sits within tol_zero of 0.
int count_real_positive(const Spectrum& s);

/// Eigenvalues with Re > tol_zero, counted with multiplicity. Throws
/// errc::ambiguous_eigenvalue when any |Re| <= tol_zero.
int count_positive_real_part(const Spectrum& s);

/// Smallest |Re lambda| over the spectrum.
double min_abs_real_part(const Spectrum& s);

/// Null vector of a (near-)singular complex matrix, by complete-pivoting
/// elimination. Used for eigenvector tests.
std::vector<Complex> null_vector(std::vector<std::vector<Complex>> m);

} // namespace beb
