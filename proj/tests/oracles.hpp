#pragma once

// Reference computations that share no code with the library: cofactor
// expansion, Cramer's rule, Eigen's LU and QR eigensolver, and a bordered
// solve for the pseudo-equilibrium. Used to check the library against.

#include <cmath>
#include <complex>
#include <random>
#include <vector>

#include <Eigen/Dense>

#include "beb/model.hpp"

namespace oracle {

using Dense = std::vector<std::vector<double>>;

inline Dense to_dense(const beb::Matrix& m)
{
    Dense d(m.size(), std::vector<double>(m.size()));
    for (std::size_t i = 0; i < m.size(); ++i) {
        for (std::size_t j = 0; j < m.size(); ++j) {
            d[i][j] = m(i, j);
        }
    }
    return d;
}

inline Dense minor_of(const Dense& a, std::size_t row, std::size_t col)
{
    Dense m;
    for (std::size_t i = 0; i < a.size(); ++i) {
        if (i == row) {
            continue;
        }
        std::vector<double> r;
        for (std::size_t j = 0; j < a.size(); ++j) {
            if (j != col) {
                r.push_back(a[i][j]);
            }
        }
        m.push_back(std::move(r));
    }
    return m;
}

/// Laplace expansion along the first row.
inline double cofactor_det(const Dense& a)
{
    const std::size_t n = a.size();
    if (n == 0) {
        return 1.0;
    }
    if (n == 1) {
        return a[0][0];
    }
    double s = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
        const double sign = (j % 2 == 0) ? 1.0 : -1.0;
        s += sign * a[0][j] * cofactor_det(minor_of(a, 0, j));
    }
    return s;
}

/// adj(A)_{ij} = (-1)^{i+j} det(minor_{ji}).
inline Dense cofactor_adj(const Dense& a)
{
    const std::size_t n = a.size();
    Dense adj(n, std::vector<double>(n, 0.0));
    if (n == 1) {
        adj[0][0] = 1.0;
        return adj;
    }
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) {
            const double sign = ((i + j) % 2 == 0) ? 1.0 : -1.0;
            adj[i][j] = sign * cofactor_det(minor_of(a, j, i));
        }
    }
    return adj;
}

/// Cramer's rule.
inline std::vector<double> cramer(const Dense& a, const std::vector<double>& rhs)
{
    const double det = cofactor_det(a);
    std::vector<double> x(a.size());
    for (std::size_t k = 0; k < a.size(); ++k) {
        Dense ak = a;
        for (std::size_t i = 0; i < a.size(); ++i) {
            ak[i][k] = rhs[i];
        }
        x[k] = cofactor_det(ak) / det;
    }
    return x;
}

inline std::vector<std::complex<double>> eigenvalues(const Dense& a)
{
    const auto n = static_cast<Eigen::Index>(a.size());
    Eigen::MatrixXd m(n, n);
    for (Eigen::Index i = 0; i < n; ++i) {
        for (Eigen::Index j = 0; j < n; ++j) {
            m(i, j) = a[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)];
        }
    }
    Eigen::EigenSolver<Eigen::MatrixXd> es(m, false);
    std::vector<std::complex<double>> out;
    for (Eigen::Index i = 0; i < n; ++i) {
        out.push_back(es.eigenvalues()(i));
    }
    return out;
}

inline double min_abs_re(const std::vector<std::complex<double>>& ev)
{
    double m = INFINITY;
    for (const auto& z : ev) {
        m = std::min(m, std::abs(z.real()));
    }
    return m;
}

inline int count_re_positive(const std::vector<std::complex<double>>& ev)
{
    int k = 0;
    for (const auto& z : ev) {
        k += z.real() > 0.0 ? 1 : 0;
    }
    return k;
}

/// Dense solve by Eigen's full-pivoting LU.
inline std::vector<double> lu_solve(const Dense& a, const std::vector<double>& rhs)
{
    const auto n = static_cast<Eigen::Index>(a.size());
    Eigen::MatrixXd m(n, n);
    Eigen::VectorXd r(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        for (Eigen::Index j = 0; j < n; ++j) {
            m(i, j) = a[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)];
        }
        r(i) = rhs[static_cast<std::size_t>(i)];
    }
    const Eigen::VectorXd x = m.fullPivLu().solve(r);
    return {x.data(), x.data() + n};
}

/// x^L(mu) = -A^{-1} b mu.
inline std::vector<double> regular_eq(const beb::PWLSystem& s, double mu)
{
    std::vector<double> rhs(s.dim());
    for (std::size_t i = 0; i < s.dim(); ++i) {
        rhs[i] = -s.b[i] * mu;
    }
    return lu_solve(to_dense(s.A), rhs);
}

/// Pseudo-equilibrium as the bordered system A x + b mu = lambda c, x_1 = 0.
/// Returns (x, lambda); chi(x) = lambda c_1^2, so admissible iff lambda < 0.
inline std::pair<std::vector<double>, double> pseudo_eq(const beb::PWLSystem& s, double mu)
{
    const std::size_t n = s.dim();
    Dense m(n + 1, std::vector<double>(n + 1, 0.0));
    std::vector<double> rhs(n + 1, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) {
            m[i][j] = s.A(i, j);
        }
        m[i][n] = -s.c[i];
        rhs[i] = -s.b[i] * mu;
    }
    m[n][0] = 1.0;
    auto sol = lu_solve(m, rhs);
    const double lambda = sol[n];
    sol.pop_back();
    return {sol, lambda};
}

/// Persistence iff x^L and x^S are admissible on opposite signs of mu.
inline bool brute_force_persistence(const beb::PWLSystem& s, double eps)
{
    const bool l_plus = regular_eq(s, eps)[0] < 0.0;
    const bool s_plus = pseudo_eq(s, eps).second < 0.0;
    return l_plus != s_plus;
}

struct Population {
    std::mt19937_64 rng;
    explicit Population(std::uint64_t seed) : rng(seed) {}

    double uniform(double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(rng); }

    beb::PWLSystem draw(std::size_t n)
    {
        beb::PWLSystem s;
        s.A = beb::Matrix(n);
        s.b.resize(n);
        s.c.resize(n);
        for (std::size_t i = 0; i < n; ++i) {
            for (std::size_t j = 0; j < n; ++j) {
                s.A(i, j) = uniform(-2.0, 2.0);
            }
            s.b[i] = uniform(-2.0, 2.0);
            s.c[i] = uniform(-2.0, 2.0);
        }
        return s;
    }

    /// |det A| >= 1e-6 and |c_1| >= 0.1.
    beb::PWLSystem draw_regular(std::size_t n)
    {
        for (;;) {
            auto s = draw(n);
            if (std::abs(cofactor_det(to_dense(s.A))) >= 1e-6 && std::abs(s.c[0]) >= 0.1) {
                return s;
            }
        }
    }

    std::size_t dim(std::size_t lo, std::size_t hi)
    {
        return std::uniform_int_distribution<std::size_t>(lo, hi)(rng);
    }
};

/// Mtilde of the scaled sliding field, built entrywise:
/// M = A - c (e_1^T A) / c_1, lower-right block.
inline Dense mtilde(const beb::PWLSystem& s)
{
    const std::size_t n = s.dim();
    Dense m(n - 1, std::vector<double>(n - 1));
    for (std::size_t i = 1; i < n; ++i) {
        for (std::size_t j = 1; j < n; ++j) {
            m[i - 1][j - 1] = s.A(i, j) - s.c[i] * s.A(0, j) / s.c[0];
        }
    }
    return m;
}

/// Draws that also avoid eigenvalues within 1e-4 of the imaginary axis (for A
/// and Mtilde) and |rho^T b| < 1e-4.
inline beb::PWLSystem draw_generic(Population& pop, std::size_t n)
{
    for (;;) {
        auto s = pop.draw_regular(n);
        const auto a = to_dense(s.A);
        const auto mt = mtilde(s);
        if (min_abs_re(eigenvalues(a)) < 1e-4 || min_abs_re(eigenvalues(mt)) < 1e-4) {
            continue;
        }
        const auto adj = cofactor_adj(a);
        double rho_b = 0.0;
        for (std::size_t j = 0; j < n; ++j) {
            rho_b += adj[0][j] * s.b[j];
        }
        if (std::abs(rho_b) < 1e-4 || std::abs(cofactor_det(mt)) < 1e-6) {
            continue;
        }
        return s;
    }
}

} // namespace oracle
