#pragma once

// Forward simulation of the truncated Filippov system and the return maps
// built on it.
//
// Modes: regular flow in x_1 < 0 (adaptive Dormand-Prince 5(4)), the
// constant field in x_1 > 0 (closed form), and sliding on x_1 = 0 (the
// rescaled linear sliding field by default). Crossing, sliding entry and
// sliding exit are decided on the surface from the signs of F^L_1 and c_1.
// Only c_1 < 0 (attracting sliding) can be integrated past a sliding region;
// reaching a repelling sliding region throws.

#include <functional>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "beb/model.hpp"

namespace beb {

enum class Mode { RegularLeft, RegularRight, Sliding };

enum class EventKind {
    CrossLtoR,
    CrossRtoL,
    EnterSliding,
    ExitSliding,
    HitEscapeRadius,
    TimeCap,
    TangencyStop,
    ConvergedToEquilibrium,
    SectionCrossing,
};

std::string_view to_string(Mode m) noexcept;
std::string_view to_string(EventKind k) noexcept;

struct FlowOptions {
    /// |x_1| (or |F^L_1| at a sliding exit) at located events, in units of the
    /// length scale.
    double tol_event = 1e-10;
    double rel_tol = 1e-10;
    /// Absolute error tolerance, in units of the length scale.
    double abs_tol = 1e-12;
    double h_init = 1e-3;
    double h_max = 0.1;
    double t_max = 1e5;
    /// <= 0 selects 1e3 max(1, |mu|).
    double escape_radius = 0.0;
    /// Convergence to an equilibrium: within converge_tol (times the length
    /// scale) for converge_steps consecutive accepted steps.
    double converge_tol = 1e-6;
    int converge_steps = 10;
    /// <= 0 selects |mu| (or 1 when mu = 0).
    double length_scale = 0.0;
    bool record = true;
    /// Integrate sliding in true time instead of the rescaled linear field.
    bool true_time_sliding = false;
    std::size_t max_events = 100000;
};

struct Sample {
    double t = 0.0;
    Vector x;
};

struct Segment {
    Mode mode = Mode::RegularLeft;
    std::vector<Sample> samples;
};

struct Event {
    double t = 0.0;
    Vector x;
    EventKind kind = EventKind::TimeCap;
};

struct Trajectory {
    std::vector<Segment> segments;
    std::vector<Event> events;
    Vector final_state;
    double final_time = 0.0;
    /// Event that ended the run and the mode it ended in.
    EventKind termination = EventKind::TimeCap;
    Mode final_mode = Mode::RegularLeft;
};

/// Optional Poincare section crossed during regular left flow:
/// value(x) changes sign in direction `direction` while accept(x) holds.
struct Section {
    std::function<double(std::span<const double>)> value;
    std::function<bool(std::span<const double>)> accept;
    int direction = 1;
};

/// Run-level controls for the engine behind integrate().
struct RunControl {
    /// Return true to stop after recording the event.
    std::function<bool(const Event&)> stop_when;
    const Section* section = nullptr;
};

/// Errors: errc::zero_c1, errc::repelling_forward_flow,
/// errc::invalid_argument (non-finite x0, wrong length).
/// Tangencies end the run with termination == TangencyStop.
Trajectory integrate(const PWLSystem& sys, double mu, std::span<const double> x0, double t_max,
                     const FlowOptions& opts = {}, const RunControl& control = {});
Trajectory integrate(const NormalFormParams& nf, std::span<const double> x0, double t_max,
                     const FlowOptions& opts = {}, const RunControl& control = {});

enum class Outcome { Returned, Escaped, ConvergedToXL, ConvergedToXS, TangencyStop, TimeCap };

std::string_view to_string(Outcome o) noexcept;

struct PoincareSample {
    double z = 0.0;
    std::optional<double> image;
    Outcome outcome = Outcome::TimeCap;
    std::vector<EventKind> flight;
    double flight_time = 0.0;
};

/// Return map on Gamma = {x_1 = x_2 = 0, x_3 < 0} for the 3D normal form with
/// d_1 = -1. Throws errc::invalid_argument for n != 3, d_1 != -1 or z >= 0.
PoincareSample poincare_map(const NormalFormParams& nf, double z, const FlowOptions& opts = {});

/// Return map for the 2D normal form on the ray {x^L - s e_1 : s > 0}
/// (x^L admissible). Orbits circulating around a focus cross it once per
/// turn; sliding back to the tangency point at the origin and leaving it
/// again is part of one turn. Throws errc::invalid_argument unless n = 2,
/// d_1 = -1, x^L admissible and s > 0.
PoincareSample return_map_2d(const NormalFormParams& nf, double s, const FlowOptions& opts = {});

using ScalarMap = std::function<std::optional<double>(double)>;

struct FixedPoint {
    double z = 0.0;
    double multiplier = 0.0;
    bool stable = false;
    double residual = 0.0;
};

struct FixedPointOptions {
    std::size_t grid = 400;
    /// |P(z*) - z*| after refinement, in units of the length scale.
    double tol = 1e-8;
    /// Central-difference step for the multiplier, in units of the length scale.
    double fd_step = 1e-5;
    double length_scale = 1.0;
};

struct FixedPointScan {
    std::vector<FixedPoint> points;
    /// Grid intervals [z_i, z_{i+1}] where the map was undefined at one end.
    std::vector<std::pair<double, double>> undefined;
    /// Sign changes that refined onto a jump of the map instead of a root.
    std::vector<std::pair<double, double>> discontinuities;
};

/// Fixed points of a 1D map on [lo, hi]: sign changes of P(z) - z on a
/// uniform grid, refined by bisection. An empty result is not an error.
FixedPointScan fixed_points(const ScalarMap& map, double lo, double hi, const FixedPointOptions& fp = {});

/// Dispatches to poincare_map (n = 3) or return_map_2d (n = 2) and scales the
/// tolerances with |mu|.
FixedPointScan fixed_points(const NormalFormParams& nf, double lo, double hi, const FlowOptions& opts = {},
                            FixedPointOptions fp = {});

/// Copy of nf with one parameter replaced. Names: mu, a1..an, d2..dn, and for
/// d_1 = -1 normal forms the trace names (tau_L, delta_L, d2 in 2D; tau_L,
/// sigma_L, delta_L, tau_S, delta_S in 3D).
NormalFormParams with_parameter(const NormalFormParams& nf, std::string_view name, double value);

struct SweepColumn {
    double value = 0.0;
    std::vector<double> samples;
    /// Outcome that interrupted the orbit, if any.
    std::optional<Outcome> gap;
    /// Retained orbit includes z = 0 within the sweep tolerance.
    bool touches_zero = false;
    /// Smallest |z| over the retained orbit (infinite when empty).
    double min_abs_z = 0.0;
};

struct SweepResult {
    std::string parameter;
    std::vector<SweepColumn> columns;
};

struct SweepOptions {
    double z0 = -1.0;
    std::size_t transient = 500;
    std::size_t keep = 250;
    /// |z| <= zero_tol marks an adding-sliding signature.
    double zero_tol = 1e-3;
    /// 0 = hardware concurrency.
    unsigned threads = 0;
};

/// Long-term behaviour of the Gamma return map along a parameter grid.
/// Grid points whose orbit leaves the map's domain are recorded as gaps.
SweepResult sweep(const NormalFormParams& base, std::string_view parameter, std::span<const double> grid,
                  const SweepOptions& so = {}, const FlowOptions& opts = {});

/// Long-term Gamma-map orbit at one parameter point.
SweepColumn sweep_point(const NormalFormParams& nf, const SweepOptions& so = {}, const FlowOptions& opts = {});

struct AddingSlidingPoint {
    double value = 0.0;
    double min_abs_z = 0.0;
    /// min_abs_z within the sweep's zero tolerance.
    bool touches_zero = false;
};

struct RefineOptions {
    /// Grid cells whose min |z| differs by more than this are refined.
    double jump_tol = 0.05;
    int max_bisect = 48;
};

/// Candidate adding-sliding points of a coarse sweep. Columns already
/// touching zero are reported as they are; cells across which the smallest
/// |z| of the retained orbit jumps are bisected towards the jump, where an
/// attractor point passing through z = 0 shows up as min |z| -> 0 on one
/// side. Each refined jump is reported with the smaller min |z| of its two
/// sides, whether or not that reaches the zero tolerance. Sorted by
/// parameter value.
std::vector<AddingSlidingPoint> locate_adding_sliding(const NormalFormParams& base, std::string_view parameter,
                                                      const SweepResult& coarse, const SweepOptions& so = {},
                                                      const FlowOptions& opts = {}, const RefineOptions& ro = {});

/// (1/n_iter) sum log|P'(z_k)| along the Gamma-map orbit of z0 after
/// `transient` iterates; P' by central difference with step fd_step.
/// Throws errc::undefined_orbit.
double map_lyapunov(const NormalFormParams& nf, double z0, std::size_t n_iter, std::size_t transient = 100,
                    double fd_step = 1e-6, const FlowOptions& opts = {});

enum class Stability { Stable, Unstable };

std::string_view to_string(Stability s) noexcept;

struct ProbeOrbit {
    double start = 0.0;
    std::vector<double> amplitudes;
    std::vector<double> ratios;
    bool exited = false;
    bool converged = false;
    std::optional<Outcome> stopped_by;
};

struct ProbeResult {
    Stability verdict = Stability::Stable;
    std::vector<ProbeOrbit> orbits;
};

struct ProbeOptions {
    /// Orbits start at radius * 10^-k for k = 1..starts.
    int starts = 4;
    std::size_t max_returns = 200;
    /// Ratios within this of 1 are undecided.
    double ratio_tol = 1e-3;
};

/// Stability of the boundary equilibrium (mu = 0) from the growth or decay of
/// return amplitudes, on Gamma (n = 3) or on the 2D ray section (n = 2).
/// Throws errc::inconclusive, errc::invalid_argument (mu != 0).
ProbeResult origin_stability_probe(const NormalFormParams& nf, double radius, const FlowOptions& opts = {},
                                   const ProbeOptions& po = {});

} // namespace beb
