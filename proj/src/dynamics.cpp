#include "beb/dynamics.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <exception>
#include <limits>
#include <thread>

#include "beb/error.hpp"
#include "beb/sliding.hpp"
#include "dopri5.hpp"

namespace beb {

std::string_view to_string(Mode m) noexcept
{
    switch (m) {
    case Mode::RegularLeft:
        return "regular_left";
    case Mode::RegularRight:
        return "regular_right";
    case Mode::Sliding:
        return "sliding";
    }
    return "unknown";
}

std::string_view to_string(EventKind k) noexcept
{
    switch (k) {
    case EventKind::CrossLtoR:
        return "CrossLtoR";
    case EventKind::CrossRtoL:
        return "CrossRtoL";
    case EventKind::EnterSliding:
        return "EnterSliding";
    case EventKind::ExitSliding:
        return "ExitSliding";
    case EventKind::HitEscapeRadius:
        return "HitEscapeRadius";
    case EventKind::TimeCap:
        return "TimeCap";
    case EventKind::TangencyStop:
        return "TangencyStop";
    case EventKind::ConvergedToEquilibrium:
        return "ConvergedToEquilibrium";
    case EventKind::SectionCrossing:
        return "SectionCrossing";
    }
    return "unknown";
}

std::string_view to_string(Outcome o) noexcept
{
    switch (o) {
    case Outcome::Returned:
        return "Returned";
    case Outcome::Escaped:
        return "Escaped";
    case Outcome::ConvergedToXL:
        return "ConvergedToXL";
    case Outcome::ConvergedToXS:
        return "ConvergedToXS";
    case Outcome::TangencyStop:
        return "TangencyStop";
    case Outcome::TimeCap:
        return "TimeCap";
    }
    return "unknown";
}

std::string_view to_string(Stability s) noexcept { return s == Stability::Stable ? "stable" : "unstable"; }

namespace {

constexpr int kMaxBisect = 200;

double length_scale(const FlowOptions& o, double mu)
{
    if (o.length_scale > 0.0) {
        return o.length_scale;
    }
    return mu != 0.0 ? std::abs(mu) : 1.0;
}

double distance(std::span<const double> a, std::span<const double> b)
{
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        s += (a[i] - b[i]) * (a[i] - b[i]);
    }
    return std::sqrt(s);
}

// Bisect the step fraction in (0, 1] for the first point on the far side of
// an event function. `after` tells whether a state is past the event;
// `value` is driven to |value| <= tol. Returns the fraction and the state
// (always on the far side).
template <class Stepper, class After, class Value>
double locate(Stepper& dp, const Vector& x0, double h, Vector& x_hi, After after, Value value, double tol)
{
    double lo = 0.0;
    double hi = 1.0;
    Vector xm(x0.size());
    for (int it = 0; it < kMaxBisect && std::abs(value(x_hi)) > tol && hi - lo > 1e-16; ++it) {
        const double mid = 0.5 * (lo + hi);
        dp.advance(x0, mid * h, xm);
        if (after(xm)) {
            hi = mid;
            x_hi = xm;
        } else {
            lo = mid;
        }
    }
    return hi;
}

class Engine {
public:
    Engine(const PWLSystem& sys, double mu, double t_max, const FlowOptions& o, const RunControl& ctl)
        : sys_(sys), mu_(mu), o_(o), ctl_(ctl), n_(sys.dim()), t_max_(t_max)
    {
        sys_.validate();
        if (sys_.c[0] == 0.0) {
            throw error(errc::zero_c1, "c_1 = 0: the right-hand field is tangent to the surface");
        }
        L_ = length_scale(o_, mu_);
        R_ = o_.escape_radius > 0.0 ? o_.escape_radius : 1e3 * std::max(1.0, std::abs(mu_));
        tol_ev_ = o_.tol_event * L_;
        conv_ = o_.converge_tol * L_;
        slide_ = scaled_sliding_system(sys_);
        try {
            Vector rhs = sys_.b;
            for (auto& v : rhs) {
                v *= -mu_;
            }
            Vector xl = solve(sys_.A, rhs);
            if (xl[0] <= 0.0) {
                xl_ = std::move(xl);
            }
        } catch (const error&) {
        }
        if (n_ > 1) {
            try {
                Vector rhs = slide_.forcing;
                for (auto& v : rhs) {
                    v *= -mu_;
                }
                const Vector y = solve(slide_.Mtilde, rhs);
                Vector xs(n_, 0.0);
                std::copy(y.begin(), y.end(), xs.begin() + 1);
                if (sys_.left_field(xs, mu_)[0] * sys_.c[0] <= 0.0) {
                    xs_ = std::move(xs);
                }
            } catch (const error&) {
            }
        }
    }

    Trajectory run(std::span<const double> x0)
    {
        if (x0.size() != n_) {
            throw error(errc::invalid_argument, "initial state has the wrong length");
        }
        if (!std::all_of(x0.begin(), x0.end(), [](double v) { return std::isfinite(v); })) {
            throw error(errc::invalid_argument, "initial state is not finite");
        }
        x_.assign(x0.begin(), x0.end());
        t_ = 0.0;
        Next next;
        if (std::abs(x_[0]) <= tol_ev_) {
            x_[0] = 0.0;
            next = on_surface(From::Start);
        } else {
            next = x_[0] < 0.0 ? Next::Left : Next::Right;
        }
        while (next != Next::Stop) {
            switch (next) {
            case Next::Left:
                next = flow_left();
                break;
            case Next::Right:
                next = flow_right();
                break;
            case Next::Slide:
                next = flow_sliding();
                break;
            case Next::Stop:
                break;
            }
        }
        tr_.final_state = x_;
        tr_.final_time = t_;
        return std::move(tr_);
    }

private:
    enum class Next { Left, Right, Slide, Stop };
    enum class From { Start, Left, Right, Sliding };

    bool emit(EventKind kind)
    {
        tr_.events.push_back({t_, x_, kind});
        const bool terminal = kind == EventKind::HitEscapeRadius || kind == EventKind::TimeCap ||
                              kind == EventKind::TangencyStop || kind == EventKind::ConvergedToEquilibrium;
        if (terminal || (ctl_.stop_when && ctl_.stop_when(tr_.events.back()))) {
            tr_.termination = kind;
            tr_.final_mode = mode_;
            return true;
        }
        if (tr_.events.size() >= o_.max_events) {
            tr_.events.push_back({t_, x_, EventKind::TimeCap});
            tr_.termination = EventKind::TimeCap;
            tr_.final_mode = mode_;
            return true;
        }
        return false;
    }

    void begin_segment(Mode m)
    {
        mode_ = m;
        if (o_.record) {
            tr_.segments.push_back({m, {{t_, x_}}});
        }
    }

    void record()
    {
        if (o_.record) {
            tr_.segments.back().samples.push_back({t_, x_});
        }
    }

    double fl1(std::span<const double> x) const
    {
        double g = sys_.b[0] * mu_;
        for (std::size_t j = 0; j < n_; ++j) {
            g += sys_.A(0, j) * x[j];
        }
        return g;
    }

    Next on_surface(From from)
    {
        x_[0] = 0.0;
        const double g = fl1(x_);
        double tol = tangency_tolerance(x_);
        if (from == From::Sliding) {
            tol = std::max(tol, 2.0 * tol_ev_);
        }
        if (sys_.c[0] < 0.0) {
            if (g > tol) {
                if (from == From::Sliding) {
                    return Next::Slide;
                }
                return emit(EventKind::EnterSliding) ? Next::Stop : Next::Slide;
            }
            if (g < -tol) {
                return emit(EventKind::CrossRtoL) ? Next::Stop : Next::Left;
            }
            const Vector f = sys_.left_field(x_, mu_);
            double gd = 0.0;
            for (std::size_t j = 0; j < n_; ++j) {
                gd += sys_.A(0, j) * f[j];
            }
            if (gd < -tangency_tolerance(x_)) {
                if (from == From::Sliding) {
                    return emit(EventKind::ExitSliding) ? Next::Stop : Next::Left;
                }
                if (from == From::Right) {
                    return emit(EventKind::CrossRtoL) ? Next::Stop : Next::Left;
                }
                return Next::Left;
            }
            emit(EventKind::TangencyStop);
            return Next::Stop;
        }
        if (g > tol) {
            return emit(EventKind::CrossLtoR) ? Next::Stop : Next::Right;
        }
        if (g < -tol) {
            throw error(errc::repelling_forward_flow,
                        "trajectory reached a repelling sliding region (c_1 > 0, F^L_1 < 0) at t = " +
                            std::to_string(t_));
        }
        emit(EventKind::TangencyStop);
        return Next::Stop;
    }

    Next flow_left()
    {
        begin_segment(Mode::RegularLeft);
        auto field = [this](const double* x, double* dx) {
            for (std::size_t i = 0; i < n_; ++i) {
                double s = sys_.b[i] * mu_;
                for (std::size_t j = 0; j < n_; ++j) {
                    s += sys_.A(i, j) * x[j];
                }
                dx[i] = s;
            }
        };
        detail::Dopri5 dp(field, n_);
        const Section* sec = ctl_.section;
        Vector xn(n_);
        Vector xe(n_);
        double h = std::min(o_.h_init, o_.h_max);
        int near = 0;
        while (true) {
            if (t_ >= t_max_) {
                emit(EventKind::TimeCap);
                return Next::Stop;
            }
            const double ht = std::min({h, o_.h_max, t_max_ - t_});
            const double err = dp.step(x_, ht, xn, o_.abs_tol * L_, o_.rel_tol);
            if (!(err <= 1.0)) {
                h = std::isfinite(err) ? ht * std::max(0.2, 0.9 * std::pow(err, -0.2)) : 0.2 * ht;
                if (h < 1e-14 * std::max(1.0, t_)) {
                    throw error(errc::convergence_failure, "step size underflow in regular flow");
                }
                continue;
            }

            double theta = 2.0;
            bool surface = false;
            if (x_[0] < 0.0 && xn[0] >= 0.0) {
                xe = xn;
                theta = locate(
                    dp, x_, ht, xe, [](const Vector& x) { return x[0] >= 0.0; },
                    [](const Vector& x) { return x[0]; }, tol_ev_);
                surface = true;
            }
            if (sec) {
                const double dir = sec->direction >= 0 ? 1.0 : -1.0;
                const double v0 = dir * sec->value(x_);
                const double v1 = dir * sec->value(xn);
                if (v0 < 0.0 && v1 >= 0.0) {
                    Vector xs = xn;
                    const double th = locate(
                        dp, x_, ht, xs, [&](const Vector& x) { return dir * sec->value(x) >= 0.0; },
                        [&](const Vector& x) { return sec->value(x); }, tol_ev_);
                    if (th < theta && (!sec->accept || sec->accept(xs))) {
                        t_ += th * ht;
                        x_ = xs;
                        record();
                        if (emit(EventKind::SectionCrossing)) {
                            return Next::Stop;
                        }
                        continue;
                    }
                }
            }
            if (surface) {
                t_ += theta * ht;
                x_ = xe;
                x_[0] = 0.0;
                record();
                return on_surface(From::Left);
            }

            t_ += ht;
            std::swap(x_, xn);
            record();
            if (norm2(x_) > R_) {
                emit(EventKind::HitEscapeRadius);
                return Next::Stop;
            }
            if (xl_ && distance(x_, *xl_) <= conv_) {
                if (++near >= o_.converge_steps) {
                    emit(EventKind::ConvergedToEquilibrium);
                    return Next::Stop;
                }
            } else {
                near = 0;
            }
            h = ht * std::min(5.0, std::max(0.2, 0.9 * std::pow(std::max(err, 1e-10), -0.2)));
        }
    }

    Next flow_right()
    {
        begin_segment(Mode::RegularRight);
        const Vector& c = sys_.c;
        const double inf = std::numeric_limits<double>::infinity();
        const double t_hit = c[0] < 0.0 ? x_[0] / -c[0] : inf;
        const double cc = dot(c, c);
        const double xc = dot(x_, c);
        const double q = dot(x_, x_) - R_ * R_;
        double t_esc = inf;
        if (q >= 0.0) {
            t_esc = 0.0;
        } else {
            t_esc = (-xc + std::sqrt(xc * xc - cc * q)) / cc;
        }
        const double t_left = t_max_ - t_;
        const double t_end = std::min({t_hit, t_esc, t_left});
        const Vector x0 = x_;
        const double t0 = t_;
        constexpr int pieces = 8;
        for (int k = 1; k <= pieces; ++k) {
            const double s = t_end * k / pieces;
            for (std::size_t i = 0; i < n_; ++i) {
                x_[i] = x0[i] + c[i] * s;
            }
            t_ = t0 + s;
            if (k < pieces) {
                record();
            }
        }
        if (t_end == t_hit) {
            x_[0] = 0.0;
            record();
            return on_surface(From::Right);
        }
        record();
        emit(t_end == t_esc ? EventKind::HitEscapeRadius : EventKind::TimeCap);
        return Next::Stop;
    }

    Next flow_sliding()
    {
        begin_segment(Mode::Sliding);
        if (n_ == 1) {
            emit(EventKind::ConvergedToEquilibrium);
            return Next::Stop;
        }
        const std::size_t m = n_ - 1;
        const double c1 = sys_.c[0];
        auto g_of = [this](const double* y) {
            double g = sys_.b[0] * mu_;
            for (std::size_t j = 1; j < n_; ++j) {
                g += sys_.A(0, j) * y[j - 1];
            }
            return g;
        };
        auto field = [this, m, c1, g_of](const double* y, double* dy) {
            for (std::size_t i = 0; i < m; ++i) {
                double s = slide_.forcing[i] * mu_;
                for (std::size_t j = 0; j < m; ++j) {
                    s += slide_.Mtilde(i, j) * y[j];
                }
                dy[i] = s;
            }
            if (o_.true_time_sliding) {
                const double k = -c1 / (g_of(y) - c1);
                for (std::size_t i = 0; i < m; ++i) {
                    dy[i] *= k;
                }
            }
        };
        detail::Dopri5 dp(field, m);
        Vector y(x_.begin() + 1, x_.end());
        Vector yn(m);
        Vector full(n_, 0.0);
        auto lift = [&](const Vector& v) {
            x_[0] = 0.0;
            std::copy(v.begin(), v.end(), x_.begin() + 1);
        };
        double h = std::min(o_.h_init, o_.h_max);
        int near = 0;
        while (true) {
            if (t_ >= t_max_) {
                emit(EventKind::TimeCap);
                return Next::Stop;
            }
            const double ht = std::min({h, o_.h_max, t_max_ - t_});
            const double err = dp.step(y, ht, yn, o_.abs_tol * L_, o_.rel_tol);
            if (!(err <= 1.0)) {
                h = std::isfinite(err) ? ht * std::max(0.2, 0.9 * std::pow(err, -0.2)) : 0.2 * ht;
                if (h < 1e-14 * std::max(1.0, t_)) {
                    throw error(errc::convergence_failure, "step size underflow in sliding flow");
                }
                continue;
            }
            if (g_of(y.data()) > 0.0 && g_of(yn.data()) <= 0.0) {
                const double theta = locate(
                    dp, y, ht, yn, [&](const Vector& v) { return g_of(v.data()) <= 0.0; },
                    [&](const Vector& v) { return g_of(v.data()); }, tol_ev_);
                t_ += theta * ht;
                lift(yn);
                record();
                return on_surface(From::Sliding);
            }
            t_ += ht;
            std::swap(y, yn);
            lift(y);
            record();
            if (norm2(x_) > R_) {
                emit(EventKind::HitEscapeRadius);
                return Next::Stop;
            }
            if (xs_ && distance(x_, *xs_) <= conv_) {
                if (++near >= o_.converge_steps) {
                    emit(EventKind::ConvergedToEquilibrium);
                    return Next::Stop;
                }
            } else {
                near = 0;
            }
            h = ht * std::min(5.0, std::max(0.2, 0.9 * std::pow(std::max(err, 1e-10), -0.2)));
        }
    }

    const PWLSystem& sys_;
    double mu_;
    FlowOptions o_;
    const RunControl& ctl_;
    std::size_t n_;
    double t_max_;
    double L_ = 1.0;
    double R_ = 1e3;
    double tol_ev_ = 1e-10;
    double conv_ = 1e-6;
    SlidingSystem slide_;
    std::optional<Vector> xl_;
    std::optional<Vector> xs_;
    Trajectory tr_;
    Mode mode_ = Mode::RegularLeft;
    double t_ = 0.0;
    Vector x_;
};

Outcome outcome_of(const Trajectory& tr, EventKind returned)
{
    if (tr.termination == returned) {
        return Outcome::Returned;
    }
    switch (tr.termination) {
    case EventKind::HitEscapeRadius:
        return Outcome::Escaped;
    case EventKind::ConvergedToEquilibrium:
        return tr.final_mode == Mode::Sliding ? Outcome::ConvergedToXS : Outcome::ConvergedToXL;
    case EventKind::TangencyStop:
        return Outcome::TangencyStop;
    default:
        return Outcome::TimeCap;
    }
}

PoincareSample to_sample(double z, const Trajectory& tr, EventKind returned)
{
    PoincareSample s;
    s.z = z;
    s.outcome = outcome_of(tr, returned);
    s.flight_time = tr.final_time;
    s.flight.reserve(tr.events.size());
    for (const auto& e : tr.events) {
        s.flight.push_back(e.kind);
    }
    return s;
}

void require_d1_minus(const NormalFormParams& nf, std::size_t n, const char* what)
{
    nf.validate();
    if (nf.dim() != n || nf.d1 != -1) {
        throw error(errc::invalid_argument, std::string(what) + " needs the " + std::to_string(n) +
                                                "D normal form with d_1 = -1");
    }
}

// Return map on the ray {p - s e_1 : s > 0}, crossed in the direction of the
// flow at its start.
PoincareSample ray_map(const NormalFormParams& nf, std::span<const double> p, double s, FlowOptions opts)
{
    const PWLSystem sys = embed(nf);
    Vector x0(p.begin(), p.end());
    x0[0] -= s;
    const double px = p[0];
    const double py = p[1];
    Section sec;
    sec.value = [py](std::span<const double> x) { return x[1] - py; };
    sec.accept = [px](std::span<const double> x) { return x[0] < px; };
    sec.direction = sys.left_field(x0, nf.mu)[1] >= 0.0 ? 1 : -1;
    RunControl ctl;
    ctl.section = &sec;
    ctl.stop_when = [](const Event& e) { return e.kind == EventKind::SectionCrossing; };
    opts.record = false;
    const auto tr = integrate(sys, nf.mu, x0, opts.t_max, opts, ctl);
    auto out = to_sample(s, tr, EventKind::SectionCrossing);
    if (out.outcome == Outcome::Returned) {
        out.image = px - tr.final_state[0];
    }
    return out;
}

double scale_of(double mu) { return mu != 0.0 ? std::abs(mu) : 1.0; }

std::optional<std::size_t> parse_index(std::string_view name, char prefix)
{
    if (name.size() < 2 || name[0] != prefix) {
        return std::nullopt;
    }
    std::size_t idx = 0;
    const auto* end = name.data() + name.size();
    const auto [ptr, ec] = std::from_chars(name.data() + 1, end, idx);
    if (ec != std::errc() || ptr != end) {
        return std::nullopt;
    }
    return idx;
}

} // namespace

Trajectory integrate(const PWLSystem& sys, double mu, std::span<const double> x0, double t_max,
                     const FlowOptions& opts, const RunControl& control)
{
    Engine engine(sys, mu, t_max, opts, control);
    return engine.run(x0);
}

Trajectory integrate(const NormalFormParams& nf, std::span<const double> x0, double t_max, const FlowOptions& opts,
                     const RunControl& control)
{
    return integrate(embed(nf), nf.mu, x0, t_max, opts, control);
}

PoincareSample poincare_map(const NormalFormParams& nf, double z, const FlowOptions& opts)
{
    require_d1_minus(nf, 3, "poincare_map");
    if (!(z < 0.0)) {
        throw error(errc::invalid_argument, "Gamma requires z < 0");
    }
    FlowOptions o = opts;
    o.record = false;
    RunControl ctl;
    ctl.stop_when = [](const Event& e) { return e.kind == EventKind::ExitSliding; };
    const Vector x0{0.0, 0.0, z};
    const auto tr = integrate(embed(nf), nf.mu, x0, o.t_max, o, ctl);
    auto out = to_sample(z, tr, EventKind::ExitSliding);
    if (out.outcome == Outcome::Returned) {
        out.image = tr.final_state[2];
    }
    return out;
}

PoincareSample return_map_2d(const NormalFormParams& nf, double s, const FlowOptions& opts)
{
    require_d1_minus(nf, 2, "return_map_2d");
    if (!(s > 0.0)) {
        throw error(errc::invalid_argument, "the ray parameter must be positive");
    }
    const double a2 = nf.a[1];
    if (a2 == 0.0) {
        throw error(errc::invalid_argument, "delta_L = 0: no regular equilibrium");
    }
    // C x + e_2 mu = 0
    const Vector xl{nf.mu / a2, nf.a[0] * nf.mu / a2};
    if (!(xl[0] < 0.0)) {
        throw error(errc::invalid_argument, "the regular equilibrium is not admissible");
    }
    return ray_map(nf, xl, s, opts);
}

FixedPointScan fixed_points(const ScalarMap& map, double lo, double hi, const FixedPointOptions& fp)
{
    if (!(hi > lo) || fp.grid < 2) {
        throw error(errc::invalid_argument, "fixed_points needs lo < hi and at least two grid points");
    }
    const double tol = fp.tol * fp.length_scale;
    const double h = fp.fd_step * fp.length_scale;
    FixedPointScan out;
    auto f = [&](double z) -> std::optional<double> {
        const auto p = map(z);
        if (!p) {
            return std::nullopt;
        }
        return *p - z;
    };
    auto finish = [&](double z, double residual) {
        FixedPoint pt;
        pt.z = z;
        pt.residual = residual;
        const auto up = map(z + h);
        const auto dn = map(z - h);
        if (up && dn) {
            pt.multiplier = (*up - *dn) / (2.0 * h);
            pt.stable = std::abs(pt.multiplier) < 1.0;
        } else {
            pt.multiplier = std::numeric_limits<double>::quiet_NaN();
        }
        out.points.push_back(pt);
    };

    const std::size_t n = fp.grid;
    std::vector<double> zs(n);
    std::vector<std::optional<double>> fs(n);
    for (std::size_t i = 0; i < n; ++i) {
        zs[i] = i + 1 == n ? hi : lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(n - 1);
        fs[i] = f(zs[i]);
    }
    for (std::size_t i = 0; i < n; ++i) {
        if (fs[i] && *fs[i] == 0.0) {
            finish(zs[i], 0.0);
        }
        if (i + 1 == n) {
            break;
        }
        if (!fs[i] || !fs[i + 1]) {
            out.undefined.emplace_back(zs[i], zs[i + 1]);
            continue;
        }
        double a = zs[i];
        double b = zs[i + 1];
        double fa = *fs[i];
        double fb = *fs[i + 1];
        if (!((fa < 0.0 && fb > 0.0) || (fa > 0.0 && fb < 0.0))) {
            continue;
        }
        bool done = false;
        for (int it = 0; it < kMaxBisect && !done; ++it) {
            const double m = 0.5 * (a + b);
            const auto fm = f(m);
            if (!fm) {
                out.undefined.emplace_back(a, b);
                done = true;
                break;
            }
            if (std::abs(*fm) <= tol) {
                finish(m, std::abs(*fm));
                done = true;
                break;
            }
            if ((*fm < 0.0) == (fa < 0.0)) {
                a = m;
                fa = *fm;
            } else {
                b = m;
                fb = *fm;
            }
            if (b - a <= 4.0 * std::numeric_limits<double>::epsilon() * (std::abs(a) + std::abs(b))) {
                break;
            }
        }
        if (!done) {
            if (std::min(std::abs(fa), std::abs(fb)) <= tol) {
                finish(std::abs(fa) <= std::abs(fb) ? a : b, std::min(std::abs(fa), std::abs(fb)));
            } else {
                out.discontinuities.emplace_back(a, b);
            }
        }
    }
    return out;
}

FixedPointScan fixed_points(const NormalFormParams& nf, double lo, double hi, const FlowOptions& opts,
                            FixedPointOptions fp)
{
    nf.validate();
    fp.length_scale = scale_of(nf.mu);
    if (nf.dim() == 3) {
        return fixed_points(
            [&](double z) -> std::optional<double> {
                if (!(z < 0.0)) {
                    return std::nullopt;
                }
                return poincare_map(nf, z, opts).image;
            },
            lo, hi, fp);
    }
    if (nf.dim() == 2) {
        return fixed_points(
            [&](double s) -> std::optional<double> {
                if (!(s > 0.0)) {
                    return std::nullopt;
                }
                return return_map_2d(nf, s, opts).image;
            },
            lo, hi, fp);
    }
    throw error(errc::invalid_argument, "fixed points are available for n = 2 and n = 3");
}

NormalFormParams with_parameter(const NormalFormParams& nf, std::string_view name, double value)
{
    NormalFormParams out = nf;
    const std::size_t n = nf.dim();
    if (name == "mu") {
        out.mu = value;
        return out;
    }
    if (const auto i = parse_index(name, 'a'); i && *i >= 1 && *i <= n) {
        out.a[*i - 1] = value;
        return out;
    }
    if (const auto i = parse_index(name, 'd'); i && *i >= 2 && *i <= n) {
        out.d_tail[*i - 2] = value;
        return out;
    }
    if (nf.d1 == -1 && n == 3) {
        auto tp = to_traces_3d(nf);
        if (name == "tau_L") {
            tp.tau_L = value;
        } else if (name == "sigma_L") {
            tp.sigma_L = value;
        } else if (name == "delta_L") {
            tp.delta_L = value;
        } else if (name == "tau_S") {
            tp.tau_S = value;
        } else if (name == "delta_S") {
            tp.delta_S = value;
        } else {
            throw error(errc::invalid_argument, "unknown parameter '" + std::string(name) + "'");
        }
        return from_traces(tp, nf.mu);
    }
    if (nf.d1 == -1 && n == 2) {
        auto tp = to_traces_2d(nf);
        if (name == "tau_L") {
            tp.tau_L = value;
        } else if (name == "delta_L") {
            tp.delta_L = value;
        } else {
            throw error(errc::invalid_argument, "unknown parameter '" + std::string(name) + "'");
        }
        return from_traces(tp, nf.mu);
    }
    throw error(errc::invalid_argument, "unknown parameter '" + std::string(name) + "'");
}

SweepColumn sweep_point(const NormalFormParams& nf, const SweepOptions& so, const FlowOptions& opts)
{
    SweepColumn col;
    col.min_abs_z = std::numeric_limits<double>::infinity();
    double z = so.z0;
    const double zero_tol = so.zero_tol * scale_of(nf.mu);
    for (std::size_t k = 0; k < so.transient + so.keep; ++k) {
        const auto s = poincare_map(nf, z, opts);
        if (!s.image) {
            col.gap = s.outcome;
            break;
        }
        z = *s.image;
        if (k >= so.transient) {
            col.samples.push_back(z);
            col.min_abs_z = std::min(col.min_abs_z, std::abs(z));
        }
    }
    col.touches_zero = col.min_abs_z <= zero_tol;
    return col;
}

SweepResult sweep(const NormalFormParams& base, std::string_view parameter, std::span<const double> grid,
                  const SweepOptions& so, const FlowOptions& opts)
{
    require_d1_minus(base, 3, "sweep");
    if (!(so.z0 < 0.0)) {
        throw error(errc::invalid_argument, "the sweep start must lie on Gamma (z0 < 0)");
    }
    SweepResult out;
    out.parameter = std::string(parameter);
    out.columns.resize(grid.size());
    if (grid.empty()) {
        return out;
    }
    (void)with_parameter(base, parameter, grid[0]);

    std::vector<std::exception_ptr> failures(grid.size());
    auto point = [&](std::size_t i) {
        auto col = sweep_point(with_parameter(base, parameter, grid[i]), so, opts);
        col.value = grid[i];
        return col;
    };
    unsigned threads = so.threads != 0 ? so.threads : std::max(1u, std::thread::hardware_concurrency());
    threads = static_cast<unsigned>(std::min<std::size_t>(threads, grid.size()));
    auto worker = [&](unsigned w) {
        for (std::size_t i = w; i < grid.size(); i += threads) {
            try {
                out.columns[i] = point(i);
            } catch (...) {
                failures[i] = std::current_exception();
            }
        }
    };
    if (threads == 1) {
        worker(0);
    } else {
        std::vector<std::jthread> pool;
        pool.reserve(threads);
        for (unsigned w = 0; w < threads; ++w) {
            pool.emplace_back(worker, w);
        }
    }
    for (const auto& f : failures) {
        if (f) {
            std::rethrow_exception(f);
        }
    }
    return out;
}

std::vector<AddingSlidingPoint> locate_adding_sliding(const NormalFormParams& base, std::string_view parameter,
                                                      const SweepResult& coarse, const SweepOptions& so,
                                                      const FlowOptions& opts, const RefineOptions& ro)
{
    std::vector<AddingSlidingPoint> out;
    const auto& cols = coarse.columns;
    const double zero_tol = so.zero_tol * scale_of(base.mu);
    auto usable = [](const SweepColumn& c) { return !c.gap && !c.samples.empty(); };
    for (std::size_t i = 0; i < cols.size(); ++i) {
        if (usable(cols[i]) && cols[i].touches_zero) {
            out.push_back({cols[i].value, cols[i].min_abs_z, true});
        }
        if (i + 1 == cols.size() || !usable(cols[i]) || !usable(cols[i + 1]) || cols[i].touches_zero ||
            cols[i + 1].touches_zero) {
            continue;
        }
        double a = cols[i].value;
        double b = cols[i + 1].value;
        double ma = cols[i].min_abs_z;
        double mb = cols[i + 1].min_abs_z;
        if (std::abs(ma - mb) <= ro.jump_tol) {
            continue;
        }
        bool jump = true;
        bool found = false;
        for (int it = 0; it < ro.max_bisect && !found; ++it) {
            const double c = 0.5 * (a + b);
            if (c <= a || c >= b) {
                break;
            }
            const auto col = sweep_point(with_parameter(base, parameter, c), so, opts);
            if (!usable(col)) {
                jump = false;
                break;
            }
            const double mc = col.min_abs_z;
            if (mc <= zero_tol) {
                out.push_back({c, mc, true});
                found = true;
                break;
            }
            const double left = std::abs(ma - mc);
            const double right = std::abs(mc - mb);
            if (std::max(left, right) <= 0.5 * ro.jump_tol) {
                jump = false;
                break;
            }
            if (left >= right) {
                b = c;
                mb = mc;
            } else {
                a = c;
                ma = mc;
            }
        }
        if (jump && !found) {
            const bool left_side = ma <= mb;
            out.push_back({left_side ? a : b, std::min(ma, mb), false});
        }
    }
    std::sort(out.begin(), out.end(), [](const auto& x, const auto& y) { return x.value < y.value; });
    return out;
}

double map_lyapunov(const NormalFormParams& nf, double z0, std::size_t n_iter, std::size_t transient,
                    double fd_step, const FlowOptions& opts)
{
    require_d1_minus(nf, 3, "map_lyapunov");
    if (n_iter == 0) {
        throw error(errc::invalid_argument, "n_iter must be positive");
    }
    const double h = fd_step * scale_of(nf.mu);
    auto step = [&](double z, std::size_t k) {
        if (!(z < 0.0)) {
            throw error(errc::undefined_orbit, "orbit left Gamma at iterate " + std::to_string(k));
        }
        const auto s = poincare_map(nf, z, opts);
        if (!s.image) {
            throw error(errc::undefined_orbit, "return map undefined at iterate " + std::to_string(k) + " (" +
                                                   std::string(to_string(s.outcome)) + ")");
        }
        return *s.image;
    };
    double z = z0;
    for (std::size_t k = 0; k < transient; ++k) {
        z = step(z, k);
    }
    double sum = 0.0;
    for (std::size_t k = 0; k < n_iter; ++k) {
        const double up = step(z + h, transient + k);
        const double dn = step(z - h, transient + k);
        sum += std::log(std::abs((up - dn) / (2.0 * h)));
        z = step(z, transient + k);
    }
    return sum / static_cast<double>(n_iter);
}

ProbeResult origin_stability_probe(const NormalFormParams& nf, double radius, const FlowOptions& opts,
                                   const ProbeOptions& po)
{
    nf.validate();
    if (nf.mu != 0.0) {
        throw error(errc::invalid_argument, "the origin probe needs mu = 0");
    }
    if (!(radius > 0.0) || po.starts < 1) {
        throw error(errc::invalid_argument, "the origin probe needs a positive radius and at least one start");
    }
    const std::size_t n = nf.dim();
    if (n == 3) {
        require_d1_minus(nf, 3, "origin_stability_probe");
    } else if (n == 2) {
        require_d1_minus(nf, 2, "origin_stability_probe");
    } else {
        throw error(errc::invalid_argument, "the origin probe is available for n = 2 and n = 3");
    }

    // Amplitude -> (next amplitude, outcome). Tolerances follow the amplitude
    // so every return is resolved alike.
    auto amp_map = [&](double amp) {
        FlowOptions o = opts;
        o.length_scale = amp;
        if (o.escape_radius <= 0.0) {
            o.escape_radius = 1e3 * radius;
        }
        if (n == 3) {
            const auto s = poincare_map(nf, -amp, o);
            return std::pair{s.image ? std::optional<double>(-*s.image) : std::nullopt, s.outcome};
        }
        const Vector origin{0.0, 0.0};
        const auto s = ray_map(nf, origin, amp, o);
        return std::pair{s.image, s.outcome};
    };

    ProbeResult res;
    bool all_growth = true;
    bool all_decay = true;
    for (int k = 1; k <= po.starts; ++k) {
        ProbeOrbit orb;
        orb.start = radius * std::pow(10.0, -k);
        double amp = orb.start;
        for (std::size_t r = 0; r < po.max_returns; ++r) {
            const auto [next, outcome] = amp_map(amp);
            if (outcome == Outcome::ConvergedToXL || outcome == Outcome::ConvergedToXS) {
                orb.converged = true;
                break;
            }
            if (outcome == Outcome::Escaped) {
                orb.exited = true;
                break;
            }
            if (!next) {
                orb.stopped_by = outcome;
                break;
            }
            orb.ratios.push_back(*next / amp);
            orb.amplitudes.push_back(*next);
            amp = *next;
            if (amp > radius) {
                orb.exited = true;
                break;
            }
            if (amp < 1e-12 * radius) {
                orb.converged = true;
                break;
            }
        }
        const bool growing = !orb.ratios.empty() &&
                             std::all_of(orb.ratios.begin(), orb.ratios.end(),
                                         [&](double q) { return q > 1.0 + po.ratio_tol; }) &&
                             (orb.exited || orb.ratios.size() >= 5);
        const bool shrinking = !orb.exited && !orb.stopped_by &&
                               (orb.converged ||
                                (orb.ratios.size() >= 5 &&
                                 std::all_of(orb.ratios.begin(), orb.ratios.end(),
                                             [&](double q) { return q < 1.0 - po.ratio_tol; })));
        const bool escaped_directly = orb.exited && orb.ratios.empty();
        all_growth = all_growth && (growing || escaped_directly);
        all_decay = all_decay && shrinking;
        res.orbits.push_back(std::move(orb));
    }
    if (all_growth) {
        res.verdict = Stability::Unstable;
    } else if (all_decay) {
        res.verdict = Stability::Stable;
    } else {
        throw error(errc::inconclusive, "return amplitudes neither grow nor decay consistently");
    }
    return res;
}

} // namespace beb
