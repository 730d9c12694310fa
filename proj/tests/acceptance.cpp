// Acceptance suite: one PASS/FAIL line per criterion. Exit status is the
// number of failed criteria.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <string>
#include <vector>

#include "beb/beb_analysis.hpp"
#include "beb/dynamics.hpp"
#include "beb/error.hpp"
#include "beb/normal_form.hpp"
#include "oracles.hpp"

using namespace beb;

namespace {

struct Verdict_ {
    bool pass = false;
    std::string detail;
};

std::string fmt(const char* f, auto... args)
{
    char buf[512];
    std::snprintf(buf, sizeof buf, f, args...);
    return buf;
}

std::string fixture(const std::string& name) { return std::string(FIXTURE_DIR) + "/" + name; }

NormalFormParams load_nf(const std::string& name)
{
    const auto doc = load_system(fixture(name));
    return std::get<NormalFormParams>(doc.model);
}

double seconds_since(std::chrono::steady_clock::time_point t0)
{
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

// 1. det(Mtilde) = rho^T c / c_1 on 1000 random systems.
Verdict_ c1_identity()
{
    const auto t0 = std::chrono::steady_clock::now();
    oracle::Population pop(1001);
    double worst = 0.0;
    for (int i = 0; i < 1000; ++i) {
        const auto s = pop.draw_regular(pop.dim(2, 6));
        worst = std::max(worst, lemma5_identity(s).residual);
    }
    const double dt = seconds_since(t0);
    return {worst <= 1e-8 && dt < 5.0, fmt("max residual %.3g, %.2f s", worst, dt)};
}

// Population shared by criteria 2 and 3.
std::vector<PWLSystem> generic_population()
{
    oracle::Population pop(1002);
    std::vector<PWLSystem> out;
    for (int i = 0; i < 1000; ++i) {
        out.push_back(oracle::draw_generic(pop, pop.dim(2, 6)));
    }
    return out;
}

// 2. parity verdict = direct alpha verdict = admissibility at mu = +-1e-3.
Verdict_ c2_triple(const std::vector<PWLSystem>& pop)
{
    const auto t0 = std::chrono::steady_clock::now();
    int agree = 0;
    int refused = 0;
    for (const auto& s : pop) {
        try {
            const auto r = feigin_classify(s);
            const double eps = 1e-3;
            const bool l_plus = oracle::regular_eq(s, eps)[0] < 0.0;
            const bool l_minus = oracle::regular_eq(s, -eps)[0] < 0.0;
            const bool s_plus = oracle::pseudo_eq(s, eps).second < 0.0;
            const bool s_minus = oracle::pseudo_eq(s, -eps).second < 0.0;
            const bool persistence = (l_plus && s_minus) || (l_minus && s_plus);
            const Verdict brute = persistence ? Verdict::Persistence : Verdict::NonsmoothFold;
            if (r.parity_verdict == r.direct_verdict && r.direct_verdict == brute &&
                admissibility_verdict(s) == brute) {
                ++agree;
            }
        } catch (const beb::error&) {
            ++refused;
        }
    }
    const double dt = seconds_since(t0);
    return {agree == static_cast<int>(pop.size()) && dt < 10.0,
            fmt("%d/%zu agree, %d refused, %.2f s", agree, pop.size(), refused, dt)};
}

// 3. (-1)^(D_L + D_S + 1) = sgn(alpha_L alpha_S).
Verdict_ c3_unstable_dims(const std::vector<PWLSystem>& pop)
{
    int agree = 0;
    for (const auto& s : pop) {
        const int dl = oracle::count_re_positive(oracle::eigenvalues(oracle::to_dense(s.A)));
        // repelling sliding adds the direction normal to the surface
        const int ds = oracle::count_re_positive(oracle::eigenvalues(oracle::mtilde(s))) + (s.c[0] > 0.0 ? 1 : 0);
        try {
            const auto a = alphas(s);
            const double lhs = ((dl + ds + 1) % 2 == 0) ? 1.0 : -1.0;
            const double rhs = a.alpha_L * a.alpha_S > 0.0 ? 1.0 : -1.0;
            const auto r = feigin_classify(s);
            if (lhs == rhs && r.D_L == dl && r.D_S == ds) {
                ++agree;
            }
        } catch (const beb::error&) {
        }
    }
    return {agree == static_cast<int>(pop.size()), fmt("%d/%zu agree", agree, pop.size())};
}

// 4. Normal form round trip on random observable systems.
Verdict_ c4_round_trip()
{
    oracle::Population pop(1004);
    int ok = 0, total = 0;
    double worst_conj = 0.0;
    for (int i = 0; i < 500; ++i) {
        const std::size_t n = pop.dim(2, 5);
        PWLSystem s;
        for (;;) {
            s = oracle::draw_generic(pop, n);
            if (observability(s.A).observable) {
                break;
            }
        }
        ++total;
        try {
            const auto res = to_normal_form(s, 0.0);
            const auto& rec = res.record;
            const Matrix c = Matrix::companion(res.params.a);
            const double conj = (rec.Q * s.A * inverse(rec.Q) - c).norm_inf();
            worst_conj = std::max(worst_conj, conj / (1.0 + s.A.norm_inf()));
            bool good = conj <= 1e-8 * (1.0 + s.A.norm_inf());
            for (std::size_t j = 0; j < n; ++j) {
                good = good && std::abs(rec.Q(0, j) - (j == 0 ? 1.0 : 0.0)) <= 1e-12;
            }
            good = good && std::abs(rec.r[0]) <= 1e-12;
            const auto adj = oracle::cofactor_adj(oracle::to_dense(s.A));
            double rho_b = 0.0;
            for (std::size_t j = 0; j < n; ++j) {
                rho_b += adj[0][j] * s.b[j];
            }
            const double sign = (n % 2 == 1) ? 1.0 : -1.0;
            good = good && std::abs(rec.s - sign * rho_b) <= 1e-10 * std::max(1.0, std::abs(rho_b));
            good = good && feigin_classify(s).verdict == feigin_classify(embed(res.params)).verdict;
            ok += good ? 1 : 0;
        } catch (const beb::error&) {
        }
    }
    return {ok == total, fmt("%d/%d pass, worst conjugation residual %.3g", ok, total, worst_conj)};
}

// 5. x^L_1 = mu / a_n.
Verdict_ c5_equilibrium()
{
    oracle::Population pop(1005);
    int ok = 0, total = 0;
    while (total < 100) {
        const std::size_t n = pop.dim(2, 5);
        Vector a(n), d(n);
        for (std::size_t i = 0; i < n; ++i) {
            a[i] = pop.uniform(-2, 2);
            d[i] = pop.uniform(-2, 2);
        }
        if (std::abs(a[n - 1]) <= 0.1) {
            continue;
        }
        d[0] = pop.uniform(0, 1) < 0.5 ? -1.0 : 1.0;
        const double mu = pop.uniform(-2, 2);
        ++total;
        const auto e = regular_equilibrium(embed(NormalFormParams(a, d, mu)), mu);
        const double want = mu / a[n - 1];
        ok += std::abs(e.x[0] - want) <= 1e-12 * std::max(1.0, std::abs(want)) ? 1 : 0;
    }
    return {ok == total, fmt("%d/%d", ok, total)};
}

// 6. The eight two-dimensional scenarios and the focus limit cycle.
Verdict_ c6_scenarios()
{
    using E = EquilibriumClass;
    using D = SlidingDirection;
    const struct {
        const char* file;
        E eq;
        D dir;
    } cases[] = {
        {"scenario2d_saddle_toward.json", E::Saddle, D::Toward},
        {"scenario2d_saddle_away.json", E::Saddle, D::Away},
        {"scenario2d_attracting_node_toward.json", E::AttractingNode, D::Toward},
        {"scenario2d_attracting_node_away.json", E::AttractingNode, D::Away},
        {"scenario2d_repelling_node_toward.json", E::RepellingNode, D::Toward},
        {"scenario2d_repelling_node_away.json", E::RepellingNode, D::Away},
        {"scenario2d_focus_toward.json", E::Focus, D::Toward},
        {"scenario2d_focus_away.json", E::Focus, D::Away},
    };
    int classified = 0;
    for (const auto& c : cases) {
        const auto sc = classify_scenario_2d(to_traces_2d(load_nf(c.file)));
        classified += (sc.equilibrium == c.eq && sc.sliding == c.dir) ? 1 : 0;
    }

    const auto focus = load_nf("scenario2d_focus_toward.json");
    const auto cycle = fixed_points(focus, 1e-3, 5.0);
    const bool repelling = classify_scenario_2d(to_traces_2d(focus)).focus_stability == 1;
    const bool has_cycle = repelling && focus.mu == -1.0 && cycle.points.size() == 1 &&
                           std::abs(cycle.points[0].multiplier) < 1.0;

    const auto attracting = load_nf("scenario2d_attracting_focus_toward.json");
    const auto none = fixed_points(attracting, 1e-3, 5.0);

    const bool pass = classified == 8 && has_cycle && none.points.empty();
    std::string detail = fmt("%d/8 classified", classified);
    if (!cycle.points.empty()) {
        detail += fmt(", cycle at s = %.6f multiplier %.4f", cycle.points[0].z, cycle.points[0].multiplier);
    }
    detail += fmt(", attracting focus: %zu fixed points", none.points.size());
    return {pass, detail};
}

// 7. Two attractors: three fixed points and a chaotic orbit.
Verdict_ c7_two_attractors()
{
    const auto t0 = std::chrono::steady_clock::now();
    const auto nf = load_nf("param3d_tau0275.json");
    const auto scan = fixed_points(nf, -3.5, -0.1);
    const double frozen[] = {-1.8010094956, -1.7515152990, -1.1677829125};
    int stable = 0;
    bool located = scan.points.size() == 3;
    for (std::size_t i = 0; i < scan.points.size(); ++i) {
        stable += scan.points[i].stable ? 1 : 0;
        if (located) {
            located = std::abs(scan.points[i].z - frozen[i]) <= 1e-7;
        }
    }
    const bool counts = scan.points.size() == 3 && stable == 1;

    double lyap = NAN;
    try {
        lyap = map_lyapunov(nf, -1.0, 5000);
    } catch (const beb::error&) {
    }

    // the orbit of z = -1 stays bounded and away from the stable cycle
    bool coexist = false;
    if (counts) {
        double z_star = 0.0;
        for (const auto& p : scan.points) {
            if (p.stable) {
                z_star = p.z;
            }
        }
        double z = -1.0, closest = INFINITY;
        bool defined = true;
        for (int k = 0; k < 2000 && defined; ++k) {
            const auto s = poincare_map(nf, z);
            defined = s.image.has_value();
            if (defined) {
                z = *s.image;
                if (k >= 500) {
                    closest = std::min(closest, std::abs(z - z_star));
                }
            }
        }
        coexist = defined && closest > 1e-3;
    }
    const double dt = seconds_since(t0);
    const bool pass = counts && located && lyap > 0.0 && coexist && dt < 120.0;
    return {pass, fmt("%zu fixed points (%d stable), frozen locations %s, Lyapunov %.4f, coexistence %s, %.1f s",
                      scan.points.size(), stable, located ? "match" : "differ", lyap, coexist ? "yes" : "no", dt)};
}

// 8. Adding-sliding points near tau_S = 0.142 and 0.163.
Verdict_ c8_adding_sliding()
{
    const auto base = load_nf("param3d_sweep.json");
    std::vector<double> grid;
    for (int i = 0; i <= 60; ++i) {
        grid.push_back(0.12 + 1e-3 * i);
    }
    SweepOptions so;
    const auto coarse = sweep(base, "tau_S", grid, so);
    const auto refined = locate_adding_sliding(base, "tau_S", coarse, so);

    auto first_touch = [&](double lo, double hi) -> std::optional<double> {
        for (const auto& c : coarse.columns) {
            if (c.touches_zero && c.value >= lo && c.value <= hi) {
                return c.value;
            }
        }
        for (const auto& p : refined) {
            if (p.touches_zero && p.value >= lo && p.value <= hi) {
                return p.value;
            }
        }
        return std::nullopt;
    };
    const auto a = first_touch(0.137, 0.147);
    const auto b = first_touch(0.158, 0.168);

    double coarse_min = INFINITY;
    for (const auto& c : coarse.columns) {
        coarse_min = std::min(coarse_min, c.min_abs_z);
    }
    std::string detail = fmt("grid min|z| %.4g; ", coarse_min);
    detail += a ? fmt("first window: touch at %.6f", *a) : std::string("first window: none");
    detail += b ? fmt(", second window: touch at %.6f", *b) : std::string(", second window: none");
    for (const auto& p : refined) {
        if (!p.touches_zero) {
            detail += fmt(" (near miss at %.6f, min|z| %.4g)", p.value, p.min_abs_z);
        }
    }
    return {a.has_value() && b.has_value(), detail};
}

// 9. Orbits converging to x^L accumulate near z = -2.21. They lie on the
// stable manifold of the saddle-focus, so a grid only brackets them: bisect
// every grid cell whose end points have different outcomes.
Verdict_ c9_accumulation()
{
    const auto nf = load_nf("param3d_tau0275.json");
    const double lo = -2.26, hi = -2.16;
    const int cells = 1000;
    std::vector<double> zs;
    std::vector<Outcome> out;
    for (int i = 0; i <= cells; ++i) {
        zs.push_back(lo + (hi - lo) * i / cells);
        out.push_back(poincare_map(nf, zs.back()).outcome);
    }
    std::vector<double> converged;
    int brackets = 0;
    for (int i = 0; i < cells; ++i) {
        if (out[i] == Outcome::ConvergedToXL) {
            converged.push_back(zs[i]);
            continue;
        }
        if (out[i] == out[i + 1]) {
            continue;
        }
        ++brackets;
        double a = zs[i], b = zs[i + 1];
        for (int k = 0; k < 60; ++k) {
            const double m = 0.5 * (a + b);
            const auto o = poincare_map(nf, m).outcome;
            if (o == Outcome::ConvergedToXL) {
                converged.push_back(m);
                break;
            }
            (o == out[i] ? a : b) = m;
        }
    }
    std::string detail = fmt("%d outcome changes bracketed, %zu converge to x^L", brackets, converged.size());
    if (!converged.empty()) {
        detail += fmt(" (first at z = %.10f)", converged.front());
    }
    return {!converged.empty(), detail};
}

// 10. Unstable origin despite stable eigenvalues.
Verdict_ c10_unstable_origin()
{
    const auto nf = load_nf("param3d2.json");
    const auto sys = embed(nf);
    const auto ev_c = oracle::eigenvalues(oracle::to_dense(sys.A));
    const auto ev_m = oracle::eigenvalues(oracle::mtilde(sys));
    bool all_negative = true;
    for (const auto& z : ev_c) {
        all_negative = all_negative && z.real() < 0.0;
    }
    for (const auto& z : ev_m) {
        all_negative = all_negative && z.real() < 0.0;
    }
    const auto lib_c = eigenvalues(sys.A);
    const auto lib_m = eigenvalues(scaled_sliding_system(sys).Mtilde);
    all_negative = all_negative && count_positive_real_part(lib_c) == 0 && count_positive_real_part(lib_m) == 0;

    const auto r = origin_stability_probe(nf, 1.0);
    std::size_t sustained = 0;
    double min_ratio = INFINITY;
    for (const auto& o : r.orbits) {
        bool growing = true;
        for (double q : o.ratios) {
            growing = growing && q > 1.0;
            min_ratio = std::min(min_ratio, q);
        }
        if (growing) {
            sustained = std::max(sustained, o.ratios.size());
        }
    }
    const bool pass = all_negative && r.verdict == Stability::Unstable && sustained >= 5;
    return {pass, fmt("eigenvalues %s, probe %s, %zu growing returns, min ratio %.4f",
                      all_negative ? "all stable" : "not all stable", std::string(to_string(r.verdict)).c_str(),
                      sustained, min_ratio)};
}

// 11. P_mu(mu z) = mu P_1(z) and fixed points scale with mu.
Verdict_ c11_homogeneity()
{
    const auto nf = load_nf("param3d_tau0275.json");
    oracle::Population pop(1011);
    int ok = 0, total = 0;
    double worst = 0.0;
    while (total < 20) {
        const double z = pop.uniform(-3.5, -0.1);
        const auto p1 = poincare_map(nf, z);
        if (!p1.image) {
            continue;
        }
        ++total;
        bool good = true;
        for (double mu : {0.5, 2.0}) {
            const auto pm = poincare_map(with_parameter(nf, "mu", mu), mu * z);
            if (!pm.image) {
                good = false;
                continue;
            }
            const double rel = std::abs(*pm.image - mu * *p1.image) / std::abs(mu * *p1.image);
            worst = std::max(worst, rel);
            good = good && rel <= 1e-6;
        }
        ok += good ? 1 : 0;
    }
    const auto f1 = fixed_points(nf, -3.5, -0.1);
    bool scale_ok = !f1.points.empty();
    for (double mu : {0.5, 2.0}) {
        const auto fm = fixed_points(with_parameter(nf, "mu", mu), -3.5 * mu, -0.1 * mu);
        scale_ok = scale_ok && fm.points.size() == f1.points.size();
        for (std::size_t i = 0; scale_ok && i < f1.points.size(); ++i) {
            scale_ok = std::abs(fm.points[i].z - mu * f1.points[i].z) <= 1e-6 * std::abs(mu * f1.points[i].z);
        }
    }
    return {ok == total && scale_ok,
            fmt("%d/%d samples, worst relative error %.3g, fixed points scale %s", ok, total, worst,
                scale_ok ? "linearly" : "wrongly")};
}

} // namespace

int main()
{
    const auto pop = generic_population();
    const std::vector<std::pair<const char*, std::function<Verdict_()>>> criteria = {
        {"sliding determinant identity", c1_identity},
        {"parity, direct and brute-force verdicts agree", [&] { return c2_triple(pop); }},
        {"unstable-manifold parity", [&] { return c3_unstable_dims(pop); }},
        {"normal form round trip", c4_round_trip},
        {"normal form equilibrium x1 = mu / a_n", c5_equilibrium},
        {"two-dimensional scenarios", c6_scenarios},
        {"two attractors at tau_S = 0.275", c7_two_attractors},
        {"adding-sliding bifurcations", c8_adding_sliding},
        {"accumulation of orbits converging to x^L", c9_accumulation},
        {"unstable origin with stable eigenvalues", c10_unstable_origin},
        {"mu-homogeneity of the return map", c11_homogeneity},
    };
    int failed = 0;
    for (std::size_t i = 0; i < criteria.size(); ++i) {
        Verdict_ v;
        try {
            v = criteria[i].second();
        } catch (const std::exception& e) {
            v = {false, std::string("exception: ") + e.what()};
        }
        failed += v.pass ? 0 : 1;
        std::printf("%s %2zu %s: %s\n", v.pass ? "PASS" : "FAIL", i + 1, criteria[i].first, v.detail.c_str());
        std::fflush(stdout);
    }
    return failed;
}
