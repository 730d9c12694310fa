#pragma once

// Reduction of a general truncated system to the companion-matrix normal
// form by the single coordinate change x -> Q x + r mu, mu -> s mu, followed
// by the scaling that makes |d_1| = 1.

#include "beb/model.hpp"

namespace beb {

struct Observability {
    /// Rows e_1^T, e_1^T A, ..., e_1^T A^(n-1).
    Matrix Phi;
    double det_phi = 0.0;
    bool observable = false;
    /// Independent check: no eigenvector of A is orthogonal to e_1.
    bool pbh_observable = false;
};

/// Observable iff |det Phi| > 1e-9 ||A||_inf^(n(n-1)/2) (the scale is floored
/// at 1).
Observability observability(const Matrix& a);

struct TransformRecord {
    /// Lower-triangular Toeplitz matrix of (1, a_1, ..., a_(n-1)).
    Matrix Psi;
    Matrix Phi;
    /// Q = Psi Phi
    Matrix Q;
    /// r = J^T Q b
    Vector r;
    /// s = e_n^T Q b
    double s = 0.0;
    /// 1 / |d_1| applied to x and mu after the main transformation.
    double scale = 1.0;
    /// ||Q A Q^{-1} - C||_inf, ||Q b - C r - s e_n||_inf
    double conjugation_residual = 0.0;
    double forcing_residual = 0.0;
};

struct NormalFormResult {
    NormalFormParams params;
    TransformRecord record;
};

/// Transform sys (at parameter mu) to normal form; the returned params carry
/// the transformed parameter s mu / |d_1|.
/// Errors: errc::zero_c1, errc::not_observable, errc::zero_s, and
/// errc::internal_inconsistency if Q A Q^{-1} misses C by more than
/// 1e-8 (1 + ||A||_inf).
NormalFormResult to_normal_form(const PWLSystem& sys, double mu = 0.0);

/// Map a state of the original system to normal-form coordinates.
Vector to_normal_coordinates(const TransformRecord& rec, std::span<const double> x, double mu);

} // namespace beb
