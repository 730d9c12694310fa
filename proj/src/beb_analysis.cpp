#include "beb/beb_analysis.hpp"

#include <cmath>

#include "beb/error.hpp"

namespace beb {

std::string_view to_string(Verdict v) noexcept
{
    return v == Verdict::Persistence ? "persistence" : "nonsmooth_fold";
}

std::string_view to_string(EquilibriumClass c) noexcept
{
    switch (c) {
    case EquilibriumClass::Saddle:
        return "saddle";
    case EquilibriumClass::AttractingNode:
        return "attracting_node";
    case EquilibriumClass::RepellingNode:
        return "repelling_node";
    case EquilibriumClass::Focus:
        return "focus";
    }
    return "unknown";
}

std::string_view to_string(SlidingDirection s) noexcept
{
    return s == SlidingDirection::Toward ? "sliding_toward" : "sliding_away";
}

std::string name(const Scenario2D& s)
{
    std::string out(to_string(s.equilibrium));
    if (s.equilibrium == EquilibriumClass::Focus) {
        out = s.focus_stability > 0 ? "repelling_focus" : s.focus_stability < 0 ? "attracting_focus" : "centre";
    }
    return out + "/" + std::string(to_string(s.sliding));
}

namespace {

bool near_singular(double det, const Matrix& m, double tol)
{
    const double scale = std::pow(std::max(1.0, m.norm_inf()), static_cast<double>(m.size()));
    return std::abs(det) <= tol * scale;
}

int sgn(double v) { return (v > 0.0) - (v < 0.0); }

void require_c1(const PWLSystem& sys)
{
    if (sys.c[0] == 0.0) {
        throw error(errc::zero_c1, "c_1 = 0: the right-hand field is tangent to the surface");
    }
}

struct Pieces {
    FaddeevLeverrier fa;
    SlidingSystem slide;
    FaddeevLeverrier fm;
};

Pieces factor(const PWLSystem& sys, const AnalysisOptions& opts)
{
    sys.validate();
    require_c1(sys);
    Pieces p{faddeev_leverrier(sys.A), scaled_sliding_system(sys), {}};
    if (near_singular(p.fa.det, sys.A, opts.det_tol)) {
        throw error(errc::singular_a, "det(A) = 0: the regular equilibrium has a zero eigenvalue");
    }
    p.fm = faddeev_leverrier(p.slide.Mtilde);
    if (near_singular(p.fm.det, p.slide.Mtilde, opts.det_tol)) {
        throw error(errc::singular_mtilde, "det(Mtilde) = 0: the pseudo-equilibrium has a zero eigenvalue");
    }
    return p;
}

Vector xs_per_mu(const SlidingSystem& s)
{
    Vector x(s.forcing.size() + 1, 0.0);
    if (s.forcing.empty()) {
        return x;
    }
    Vector rhs = s.forcing;
    for (auto& v : rhs) {
        v = -v;
    }
    const Vector y = solve(s.Mtilde, rhs);
    std::copy(y.begin(), y.end(), x.begin() + 1);
    return x;
}

Vector scaled(const Vector& v, double mu)
{
    Vector out = v;
    for (auto& x : out) {
        x *= mu;
    }
    return out;
}

} // namespace

Equilibrium regular_equilibrium(const PWLSystem& sys, double mu, const AnalysisOptions& opts)
{
    sys.validate();
    if (near_singular(determinant(sys.A), sys.A, opts.det_tol)) {
        throw error(errc::singular_a, "det(A) = 0: no unique regular equilibrium");
    }
    Vector rhs = sys.b;
    for (auto& v : rhs) {
        v = -v * mu;
    }
    Equilibrium eq{solve(sys.A, rhs), false};
    eq.admissible = eq.x[0] < 0.0;
    return eq;
}

Equilibrium pseudo_equilibrium(const PWLSystem& sys, double mu, const AnalysisOptions& opts)
{
    sys.validate();
    require_c1(sys);
    const auto s = scaled_sliding_system(sys);
    if (near_singular(determinant(s.Mtilde), s.Mtilde, opts.det_tol)) {
        throw error(errc::singular_mtilde, "det(Mtilde) = 0: no unique pseudo-equilibrium");
    }
    Equilibrium eq{scaled(xs_per_mu(s), mu), false};
    eq.admissible = chi(sys, eq.x, mu) < 0.0;
    return eq;
}

Alphas alphas(const PWLSystem& sys, const AnalysisOptions& opts)
{
    const auto p = factor(sys, opts);
    Alphas out;
    out.rho = Vector(p.fa.adjugate.row(0).begin(), p.fa.adjugate.row(0).end());
    out.rho_b = dot(out.rho, sys.b);
    out.rho_c = dot(out.rho, sys.c);
    out.det_A = p.fa.det;
    out.det_Mtilde = p.fm.det;
    out.transversal = std::abs(out.rho_b) > opts.transversal_tol * (1.0 + norm2(out.rho) * norm2(sys.b));
    if (!out.transversal) {
        throw error(errc::non_transversal, "rho^T b = 0: transversality fails, alpha_L = 0");
    }
    out.alpha_L = -out.rho_b / out.det_A;
    out.alpha_S = out.rho_b * sys.c[0] / out.det_Mtilde;
    return out;
}

BEBReport feigin_classify(const PWLSystem& sys, const AnalysisOptions& opts)
{
    BEBReport r;
    r.alpha = alphas(sys, opts);
    r.n = sys.dim();
    r.transversal = r.alpha.transversal;
    r.c1_sign = sgn(sys.c[0]);

    const auto slide = scaled_sliding_system(sys);
    r.xL_per_mu = solve(sys.A, scaled(sys.b, -1.0));
    r.xS_per_mu = xs_per_mu(slide);

    const auto spec_a = eigenvalues(sys.A, opts.eig_tol);
    const auto spec_m = eigenvalues(slide.Mtilde, opts.eig_tol);
    r.eig_A = spec_a.eigenvalues;
    r.eig_Mtilde = spec_m.eigenvalues;
    r.N_L = count_real_positive(spec_a);
    r.N_S = count_real_positive(spec_m);

    try {
        r.D_L = count_positive_real_part(spec_a);
    } catch (const error&) {
        r.notes.emplace_back("A has an eigenvalue on the imaginary axis: D_L undefined");
    }
    try {
        r.D_S = count_positive_real_part(spec_m) + (r.c1_sign > 0 ? 1 : 0);
    } catch (const error&) {
        r.notes.emplace_back("Mtilde has an eigenvalue on the imaginary axis: D_S undefined");
    }

    const int parity_sign = (((r.N_L + r.N_S) % 2 == 0) ? 1 : -1) * r.c1_sign;
    r.parity_verdict = parity_sign > 0 ? Verdict::NonsmoothFold : Verdict::Persistence;
    const int direct_sign = sgn(r.alpha.alpha_L) * sgn(r.alpha.alpha_S);
    r.direct_verdict = direct_sign > 0 ? Verdict::NonsmoothFold : Verdict::Persistence;
    if (direct_sign == 0 || r.parity_verdict != r.direct_verdict) {
        throw error(errc::internal_inconsistency,
                    "eigenvalue parity and sgn(alpha_L alpha_S) disagree (N_L = " + std::to_string(r.N_L) +
                        ", N_S = " + std::to_string(r.N_S) + ")");
    }
    if (r.D_L && r.D_S) {
        const int unstable_sign = ((*r.D_L + *r.D_S + 1) % 2 == 0) ? 1 : -1;
        if (unstable_sign != direct_sign) {
            throw error(errc::internal_inconsistency, "(-1)^(D_L + D_S + 1) disagrees with sgn(alpha_L alpha_S)");
        }
    }
    r.verdict = r.direct_verdict;
    return r;
}

Verdict admissibility_verdict(const PWLSystem& sys, double eps, const AnalysisOptions& opts)
{
    const bool l_pos = regular_equilibrium(sys, eps, opts).admissible;
    const bool l_neg = regular_equilibrium(sys, -eps, opts).admissible;
    const bool s_pos = pseudo_equilibrium(sys, eps, opts).admissible;
    const bool s_neg = pseudo_equilibrium(sys, -eps, opts).admissible;
    if (l_pos == l_neg || s_pos == s_neg) {
        throw error(errc::internal_inconsistency,
                    "each equilibrium should be admissible for exactly one sign of mu");
    }
    return l_pos == s_pos ? Verdict::NonsmoothFold : Verdict::Persistence;
}

IdentityCheck lemma5_identity(const PWLSystem& sys, const AnalysisOptions& opts)
{
    sys.validate();
    require_c1(sys);
    const auto fa = faddeev_leverrier(sys.A);
    if (near_singular(fa.det, sys.A, opts.det_tol)) {
        throw error(errc::singular_a, "det(A) = 0");
    }
    const auto slide = scaled_sliding_system(sys);
    IdentityCheck out;
    out.lhs = determinant(slide.Mtilde);
    out.rhs = dot(fa.adjugate.row(0), sys.c) / sys.c[0];
    out.residual = std::abs(out.lhs - out.rhs) / (1.0 + std::abs(out.lhs));
    return out;
}

Lemma4Coefficient lemma4_coefficient(const PWLSystem& sys, double h, const AnalysisOptions& opts)
{
    sys.validate();
    require_c1(sys);
    const auto fa = faddeev_leverrier(sys.A);
    const double rho_b = dot(fa.adjugate.row(0), sys.b);
    const double rho_c = dot(fa.adjugate.row(0), sys.c);
    if (std::abs(rho_c) <= opts.det_tol * (1.0 + norm2(fa.adjugate.row(0)) * norm2(sys.c))) {
        throw error(errc::zero_rho_c, "rho^T c = 0");
    }
    Lemma4Coefficient out;
    out.coefficient = rho_b * sys.c[0] / rho_c;
    auto fl1 = [&](double mu) {
        const auto xs = pseudo_equilibrium(sys, mu, opts).x;
        return sys.left_field(xs, mu)[0];
    };
    out.fd_slope = (fl1(h) - fl1(-h)) / (2.0 * h);
    return out;
}

Scenario2D classify_scenario_2d(const TraceParams2D& p, double tol)
{
    const double disc = p.tau_L * p.tau_L / 4.0;
    if (std::abs(p.delta_L) <= tol) {
        throw error(errc::degenerate_scenario, "delta_L = 0: zero eigenvalue");
    }
    if (std::abs(p.delta_L - disc) <= tol * (1.0 + disc)) {
        throw error(errc::degenerate_scenario, "delta_L = tau_L^2 / 4: repeated eigenvalue (node/focus boundary)");
    }
    if (std::abs(p.d2) <= tol) {
        throw error(errc::degenerate_scenario, "d_2 = 0: degenerate sliding dynamics");
    }
    Scenario2D s;
    if (p.delta_L < 0.0) {
        s.equilibrium = EquilibriumClass::Saddle;
    } else if (p.delta_L < disc) {
        s.equilibrium = p.tau_L < 0.0 ? EquilibriumClass::AttractingNode : EquilibriumClass::RepellingNode;
    } else {
        s.equilibrium = EquilibriumClass::Focus;
        s.focus_stability = std::abs(p.tau_L) <= tol ? 0 : sgn(p.tau_L);
    }
    s.sliding = p.d2 < 0.0 ? SlidingDirection::Toward : SlidingDirection::Away;
    return s;
}

std::vector<std::string> scan_codim_two(std::span<const PWLSystem> path, double tol)
{
    std::vector<std::string> out;
    out.reserve(path.size());
    for (const auto& sys : path) {
        std::string note;
        if (near_singular(determinant(sys.A), sys.A, tol)) {
            note = "codimension-two: zero eigenvalue (det(A) = 0)";
        } else if (sys.c[0] != 0.0) {
            const auto s = scaled_sliding_system(sys);
            if (near_singular(determinant(s.Mtilde), s.Mtilde, tol)) {
                note = "codimension-two: zero eigenvalue (det(Mtilde) = 0)";
            }
        }
        out.push_back(std::move(note));
    }
    return out;
}

} // namespace beb
