#pragma once

// Equilibria, admissibility and classification of the boundary equilibrium
// bifurcation at mu = 0 of the truncated system.
//
// x^L(mu) = -A^{-1} b mu is admissible when x^L_1 < 0; the pseudo-equilibrium
// x^S(mu) on x_1 = 0 is admissible when chi(x^S) < 0. Writing
// x^L_1 = alpha_L mu and chi(x^S) = alpha_S mu, the bifurcation is
// persistence when alpha_L alpha_S < 0 and a nonsmooth-fold when > 0.
//
// The sign of alpha_L alpha_S is available three independent ways: the
// closed forms alpha_L = -rho^T b / det(A), alpha_S = rho^T b c_1 / det(Mtilde)
// with rho^T = e_1^T adj(A); the eigenvalue parity
// (-1)^(N_L + N_S) sgn(c_1); and the admissibility pattern of the two
// equilibria at mu = +-eps. feigin_classify() insists the first two agree.

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "beb/model.hpp"
#include "beb/sliding.hpp"

namespace beb {

enum class Verdict { Persistence, NonsmoothFold };

std::string_view to_string(Verdict v) noexcept;

struct AnalysisOptions {
    /// |det| <= det_tol * max(1, ||X||_inf)^dim counts as singular.
    double det_tol = 1e-12;
    /// |rho^T b| <= transversal_tol * (1 + ||rho|| ||b||) refuses classification.
    double transversal_tol = 1e-12;
    /// Eigenvalue residual tolerance; Spectrum tolerances use their defaults.
    double eig_tol = 1e-9;
};

struct Equilibrium {
    Vector x;
    bool admissible = false;
};

/// x^L(mu) = -A^{-1} b mu; admissible iff x_1 < 0. Throws errc::singular_a.
Equilibrium regular_equilibrium(const PWLSystem& sys, double mu, const AnalysisOptions& opts = {});

/// Zero of the sliding field on x_1 = 0; admissible iff chi < 0.
/// Throws errc::singular_mtilde, errc::zero_c1.
Equilibrium pseudo_equilibrium(const PWLSystem& sys, double mu, const AnalysisOptions& opts = {});

struct Alphas {
    double alpha_L = 0.0;
    double alpha_S = 0.0;
    /// rho^T = e_1^T adj(A)
    Vector rho;
    double rho_b = 0.0;
    double rho_c = 0.0;
    double det_A = 0.0;
    double det_Mtilde = 0.0;
    bool transversal = false;
};

/// Errors: errc::singular_a, errc::singular_mtilde, errc::zero_c1,
/// errc::non_transversal.
Alphas alphas(const PWLSystem& sys, const AnalysisOptions& opts = {});

struct BEBReport {
    std::size_t n = 0;
    /// x^L(mu) = xL_per_mu * mu, x^S(mu) = xS_per_mu * mu (exact for the
    /// truncated system).
    Vector xL_per_mu;
    Vector xS_per_mu;
    Alphas alpha;
    std::vector<Complex> eig_A;
    std::vector<Complex> eig_Mtilde;
    int N_L = 0;
    int N_S = 0;
    /// Unstable-manifold dimensions; empty when an eigenvalue has zero real part.
    std::optional<int> D_L;
    std::optional<int> D_S;
    int c1_sign = 0;
    Verdict parity_verdict = Verdict::Persistence;
    Verdict direct_verdict = Verdict::Persistence;
    Verdict verdict = Verdict::Persistence;
    bool transversal = false;
    std::vector<std::string> notes;
};

/// Full classification. The parity verdict and the direct sign of
/// alpha_L alpha_S are computed separately; disagreement throws
/// errc::internal_inconsistency, as does a violation of
/// sgn(alpha_L alpha_S) = (-1)^(D_L + D_S + 1) when D_L, D_S are defined.
BEBReport feigin_classify(const PWLSystem& sys, const AnalysisOptions& opts = {});

/// Verdict from admissibility alone: x^L and x^S admissible on opposite
/// signs of mu -> persistence, same sign -> nonsmooth-fold.
Verdict admissibility_verdict(const PWLSystem& sys, double eps = 1e-3, const AnalysisOptions& opts = {});

struct IdentityCheck {
    double lhs = 0.0;
    double rhs = 0.0;
    double residual = 0.0;
};

/// det(Mtilde) against rho^T c / c_1; residual = |lhs - rhs| / (1 + |lhs|).
IdentityCheck lemma5_identity(const PWLSystem& sys, const AnalysisOptions& opts = {});

struct Lemma4Coefficient {
    /// rho^T b c_1 / rho^T c
    double coefficient = 0.0;
    /// central difference of F^L_1(x^S(mu); mu) at mu = 0
    double fd_slope = 0.0;
};

/// Throws errc::zero_rho_c.
Lemma4Coefficient lemma4_coefficient(const PWLSystem& sys, double h = 1e-6, const AnalysisOptions& opts = {});

enum class EquilibriumClass { Saddle, AttractingNode, RepellingNode, Focus };
enum class SlidingDirection { Toward, Away };

struct Scenario2D {
    EquilibriumClass equilibrium = EquilibriumClass::Saddle;
    SlidingDirection sliding = SlidingDirection::Toward;
    /// For a focus: +1 repelling (tau_L > 0), -1 attracting, 0 centre.
    int focus_stability = 0;

    friend bool operator==(const Scenario2D&, const Scenario2D&) = default;
};

std::string_view to_string(EquilibriumClass c) noexcept;
std::string_view to_string(SlidingDirection s) noexcept;
std::string name(const Scenario2D& s);

/// One of Filippov's eight boundary-equilibrium scenarios for the 2D normal
/// form with d_1 = -1. Throws errc::degenerate_scenario on
/// delta_L = 0, delta_L = tau_L^2 / 4 or d_2 = 0 (within tol).
Scenario2D classify_scenario_2d(const TraceParams2D& p, double tol = 1e-12);

/// Annotate points of a parameter path where det(A) or det(Mtilde) is
/// (near) zero, i.e. where one equilibrium has a zero eigenvalue. Returns one
/// entry per input; empty strings mean no annotation.
std::vector<std::string> scan_codim_two(std::span<const PWLSystem> path, double tol = 1e-8);

} // namespace beb
