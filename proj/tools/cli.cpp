#include "cli.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <iomanip>
#include <map>
#include <optional>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "beb/beb_analysis.hpp"
#include "beb/dynamics.hpp"
#include "beb/error.hpp"
#include "beb/normal_form.hpp"
#include "beb/report.hpp"
#include "beb/sliding.hpp"

namespace beb::cli {

namespace {

using nlohmann::json;

std::string num(double v)
{
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

// Options shared by every subcommand. Values given on the command line win
// over the input file's "run" object, which wins over the defaults.
struct Common {
    std::string input;
    std::string output;
    double tol_event = 1e-10;
    double t_max = 1e5;
    std::size_t transient = 500;
    std::size_t keep = 250;
    double escape_radius = 0.0;
    std::uint64_t seed = 0;
};

class Resolver {
public:
    Resolver(CLI::App& app, const SystemDocument& doc) : app_(app), run_(doc.run) {}

    template <class T>
    T get(const std::string& flag, const std::string& key, const T& cli_value)
    {
        T value = cli_value;
        const auto* opt = app_.get_option_no_throw("--" + flag);
        const bool given = opt != nullptr && opt->count() > 0;
        if (!given && run_ && run_->contains(key)) {
            try {
                value = run_->at(key).get<T>();
            } catch (const json::exception& e) {
                throw error(errc::schema_error, "run." + key + ": " + e.what());
            }
        }
        record(key, value);
        return value;
    }

    template <class T>
    void record(const std::string& key, const T& value)
    {
        resolved_[key] = value;
    }

    const json& resolved() const { return resolved_; }

private:
    CLI::App& app_;
    std::optional<json> run_;
    json resolved_ = json::object();
};

void write_output(const std::string& path, const std::string& text, std::ostream& out)
{
    if (path.empty() || path == "-") {
        out << text;
        return;
    }
    std::ofstream f(path, std::ios::binary);
    if (!f) {
        throw error(errc::schema_error, "cannot write " + path);
    }
    f << text;
    if (!f) {
        throw error(errc::schema_error, "failed writing " + path);
    }
}

json meta(const std::string& command, const Common& c, const Resolver& r)
{
    return {{"tool", "bebtool"}, {"version", kVersion}, {"command", command}, {"input", c.input},
            {"options", r.resolved()}};
}

std::string csv_header(const std::string& command, const Common& c, const Resolver& r)
{
    std::ostringstream s;
    s << "# bebtool " << kVersion << ' ' << command << '\n';
    s << "# input " << c.input << '\n';
    for (const auto& [k, v] : r.resolved().items()) {
        s << "# option " << k << '=' << (v.is_string() ? v.get<std::string>() : v.dump()) << '\n';
    }
    return s.str();
}

FlowOptions flow_options(Resolver& r, const Common& c)
{
    FlowOptions o;
    o.tol_event = r.get("tol-event", "tol_event", c.tol_event);
    o.t_max = r.get("t-max", "t_max", c.t_max);
    o.escape_radius = r.get("escape-radius", "escape_radius", c.escape_radius);
    r.get("seed", "seed", c.seed);
    return o;
}

// Normal form of the document: as given, or via the coordinate change.
NormalFormParams normal_form_of(const SystemDocument& doc, Resolver& r)
{
    if (doc.is_normal_form()) {
        r.record("normalized", false);
        return std::get<NormalFormParams>(doc.model);
    }
    r.record("normalized", true);
    return to_normal_form(std::get<PWLSystem>(doc.model), doc.mu).params;
}

std::string table(const BEBReport& r)
{
    std::ostringstream s;
    auto line = [&](const std::string& k, const std::string& v) { s << std::left << std::setw(16) << k << v << '\n'; };
    auto opt = [](const std::optional<int>& v) { return v ? std::to_string(*v) : std::string("undefined"); };
    line("verdict", std::string(to_string(r.verdict)));
    line("n", std::to_string(r.n));
    line("alpha_L", num(r.alpha.alpha_L));
    line("alpha_S", num(r.alpha.alpha_S));
    line("rho^T b", num(r.alpha.rho_b));
    line("det A", num(r.alpha.det_A));
    line("det Mtilde", num(r.alpha.det_Mtilde));
    line("N_L", std::to_string(r.N_L));
    line("N_S", std::to_string(r.N_S));
    line("D_L", opt(r.D_L));
    line("D_S", opt(r.D_S));
    line("sgn c_1", std::to_string(r.c1_sign));
    for (const auto& n : r.notes) {
        line("note", n);
    }
    return s.str();
}

std::vector<double> parse_list(const std::string& text)
{
    std::vector<double> out;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
        try {
            std::size_t pos = 0;
            out.push_back(std::stod(item, &pos));
            if (pos != item.size()) {
                throw std::invalid_argument(item);
            }
        } catch (const std::exception&) {
            throw error(errc::invalid_argument, "not a number: '" + item + "'");
        }
    }
    return out;
}

} // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err)
{
    CLI::App app{"Boundary equilibrium bifurcations of Filippov systems"};
    app.set_version_flag("--version", std::string("bebtool ") + kVersion);
    app.require_subcommand(1);

    Common c;
    auto add_common = [&](CLI::App* sub) {
        sub->add_option("input", c.input, "System file (JSON)")->required();
        sub->add_option("-o,--output", c.output, "Output file (default: stdout)");
        sub->add_option("--tol-event", c.tol_event, "Event localisation tolerance, in units of |mu|")
            ->capture_default_str();
        sub->add_option("--t-max", c.t_max, "Time cap per integration")->capture_default_str();
        sub->add_option("--transient", c.transient, "Discarded map iterates")->capture_default_str();
        sub->add_option("--keep", c.keep, "Retained map iterates")->capture_default_str();
        sub->add_option("--escape-radius", c.escape_radius, "Escape radius; 0 selects 1e3 max(1, |mu|)")
            ->capture_default_str();
        sub->add_option("--seed", c.seed, "Recorded in the output header; no command draws random numbers")
            ->capture_default_str();
    };

    auto* classify = app.add_subcommand("classify", "Classify the boundary equilibrium bifurcation");
    add_common(classify);
    bool with_table = false;
    classify->add_flag("--table", with_table, "Print a text table (to stdout when -o is given)");

    auto* transform = app.add_subcommand("transform", "Transform a system to the companion normal form");
    add_common(transform);

    auto* slide = app.add_subcommand("slide", "Sliding matrices and the sliding region");
    add_common(slide);
    std::string point_text;
    slide->add_option("--point", point_text, "Comma-separated point on x_1 = 0 to classify");

    auto* simulate = app.add_subcommand("simulate", "Integrate one trajectory (CSV: t, x_1..x_n, mode)");
    add_common(simulate);
    std::string x0_text;
    bool true_time = false;
    simulate->add_option("--x0", x0_text, "Comma-separated initial state");
    simulate->add_flag("--true-time", true_time, "Integrate sliding in true time");

    auto* poincare = app.add_subcommand("poincare", "Sample the return map (CSV: z, P(z), outcome)");
    add_common(poincare);
    double z_min = -3.5;
    double z_max = -0.1;
    std::size_t samples = 400;
    std::string z_text;
    bool want_fixed = false;
    poincare->add_option("--z-min", z_min, "Lower end of the sample range")->capture_default_str();
    poincare->add_option("--z-max", z_max, "Upper end of the sample range")->capture_default_str();
    poincare->add_option("--samples", samples, "Uniform samples (endpoints included)")->capture_default_str();
    poincare->add_option("--z", z_text, "Comma-separated sample points instead of a grid");
    poincare->add_flag("--fixed-points", want_fixed, "Append fixed points of P on [z-min, z-max] as comments");

    auto* bifurcate = app.add_subcommand("bifurcate", "Bifurcation diagram of the return map (CSV: param, sample)");
    add_common(bifurcate);
    std::string param = "tau_S";
    double p_from = 0.1;
    double p_to = 0.3;
    double p_step = 1e-3;
    double z0 = -1.0;
    unsigned threads = 0;
    bool refine = false;
    bifurcate->add_option("--param", param, "Swept parameter")->capture_default_str();
    bifurcate->add_option("--from", p_from, "First grid value")->capture_default_str();
    bifurcate->add_option("--to", p_to, "Last grid value")->capture_default_str();
    bifurcate->add_option("--step", p_step, "Grid step")->capture_default_str();
    bifurcate->add_option("--z0", z0, "Initial point on Gamma")->capture_default_str();
    bifurcate->add_option("--threads", threads, "Worker threads; 0 = hardware concurrency")->capture_default_str();
    bifurcate->add_flag("--refine", refine, "Refine adding-sliding candidates between grid points");

    auto* scenario = app.add_subcommand("scenario2d", "Name the two-dimensional boundary-equilibrium scenario");
    add_common(scenario);

    auto* probe = app.add_subcommand("probe-origin", "Stability of the boundary equilibrium at mu = 0");
    add_common(probe);
    double radius = 1.0;
    int starts = 4;
    probe->add_option("--radius", radius, "Ball radius")->capture_default_str();
    probe->add_option("--starts", starts, "Starts at radius * 10^-k, k = 1..starts")->capture_default_str();

    std::vector<std::string> rev(args.rbegin(), args.rend());
    if (!rev.empty()) {
        rev.pop_back();
    }
    try {
        app.parse(rev);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? 0 : 1;
    }

    try {
        const auto doc = load_system(c.input);
        CLI::App* sub = app.get_subcommands().front();
        Resolver r(*sub, doc);
        const std::string name = sub->get_name();
        std::ostringstream text;

        if (name == "classify") {
            const auto sys = doc.system();
            const auto report = feigin_classify(sys);
            json j{{"meta", meta(name, c, r)}, {"report", to_json(report)}};
            if (c.output.empty() && with_table) {
                out << table(report);
                return 0;
            }
            write_output(c.output, j.dump(2) + "\n", out);
            if (!c.output.empty()) {
                out << table(report);
            }
            return 0;
        }
        if (name == "transform") {
            const auto sys = doc.system();
            const auto res = to_normal_form(sys, doc.mu);
            const auto before = feigin_classify(sys).verdict;
            const auto after = feigin_classify(embed(res.params)).verdict;
            if (before != after) {
                throw error(errc::internal_inconsistency, "the verdict changed under the transformation");
            }
            json nf = to_json(res.params);
            json j{{"meta", meta(name, c, r)},
                   {"normal_form", nf.at("normal_form")},
                   {"record", to_json(res.record)},
                   {"verdict", to_string(after)}};
            write_output(c.output, j.dump(2) + "\n", out);
            return 0;
        }
        if (name == "slide") {
            const auto sys = doc.system();
            const auto s = scaled_sliding_system(sys);
            const auto row = sys.A.row(0);
            json region{{"F_L1_coefficients", std::vector<double>(row.begin() + 1, row.end())},
                        {"F_L1_offset", sys.b[0] * doc.mu},
                        {"c1", sys.c[0]},
                        {"sliding_where", sys.c[0] < 0.0 ? "F_L1 > 0" : "F_L1 < 0"},
                        {"sliding_type", sys.c[0] < 0.0 ? "attracting" : "repelling"}};
            json j{{"meta", meta(name, c, r)},
                   {"M", to_json(s.M)},
                   {"Mtilde", to_json(s.Mtilde)},
                   {"forcing", s.forcing},
                   {"region", region}};
            try {
                const auto xs = pseudo_equilibrium(sys, doc.mu);
                j["pseudo_equilibrium"] = {{"x", xs.x}, {"admissible", xs.admissible}};
            } catch (const error& e) {
                j["pseudo_equilibrium"] = {{"error", e.what()}};
            }
            if (!point_text.empty()) {
                const auto p = parse_list(point_text);
                if (p.size() != sys.dim()) {
                    throw error(errc::dimension_mismatch, "--point needs " + std::to_string(sys.dim()) + " entries");
                }
                json pj{{"x", p}, {"region", to_string(region_type(sys, p, doc.mu))}, {"chi", chi(sys, p, doc.mu)}};
                if (region_type(sys, p, doc.mu) == RegionType::AttractingSliding ||
                    region_type(sys, p, doc.mu) == RegionType::RepellingSliding) {
                    pj["sliding_field"] = sliding_field_true_time(sys, p, doc.mu);
                    pj["scaled_sliding_field"] = scaled_sliding_field(sys, p, doc.mu);
                }
                j["point"] = pj;
            }
            write_output(c.output, j.dump(2) + "\n", out);
            return 0;
        }
        if (name == "simulate") {
            const auto sys = doc.system();
            auto o = flow_options(r, c);
            o.true_time_sliding = r.get("true-time", "true_time", true_time);
            std::vector<double> x0;
            if (!x0_text.empty()) {
                x0 = parse_list(x0_text);
                r.record("x0", x0);
            } else if (doc.run && doc.run->contains("x0")) {
                x0 = doc.run->at("x0").get<std::vector<double>>();
                r.record("x0", x0);
            } else {
                throw error(errc::invalid_argument, "simulate needs --x0 (or run.x0)");
            }
            const auto tr = integrate(sys, doc.mu, x0, o.t_max, o);
            text << csv_header(name, c, r);
            text << 't';
            for (std::size_t i = 1; i <= sys.dim(); ++i) {
                text << ",x" << i;
            }
            text << ",mode\n";
            for (const auto& seg : tr.segments) {
                for (const auto& smp : seg.samples) {
                    text << num(smp.t);
                    for (double v : smp.x) {
                        text << ',' << num(v);
                    }
                    text << ',' << to_string(seg.mode) << '\n';
                }
            }
            for (const auto& e : tr.events) {
                text << "# event," << num(e.t) << ',' << to_string(e.kind);
                for (double v : e.x) {
                    text << ',' << num(v);
                }
                text << '\n';
            }
            text << "# termination," << to_string(tr.termination) << '\n';
            write_output(c.output, text.str(), out);
            return 0;
        }
        if (name == "poincare") {
            const auto nf = normal_form_of(doc, r);
            const auto o = flow_options(r, c);
            auto map = [&](double z) {
                return nf.dim() == 2 ? return_map_2d(nf, z, o) : poincare_map(nf, z, o);
            };
            std::vector<double> zs;
            if (!z_text.empty()) {
                zs = parse_list(z_text);
                r.record("z", zs);
            } else {
                z_min = r.get("z-min", "z_min", z_min);
                z_max = r.get("z-max", "z_max", z_max);
                samples = r.get("samples", "samples", samples);
                if (samples < 2 || !(z_max > z_min)) {
                    throw error(errc::invalid_argument, "need z-min < z-max and at least two samples");
                }
                for (std::size_t i = 0; i < samples; ++i) {
                    zs.push_back(i + 1 == samples ? z_max
                                                  : z_min + (z_max - z_min) * static_cast<double>(i) /
                                                                static_cast<double>(samples - 1));
                }
            }
            want_fixed = r.get("fixed-points", "fixed_points", want_fixed);
            text << csv_header(name, c, r) << "z,P(z),outcome\n";
            for (double z : zs) {
                const auto s = map(z);
                text << num(z) << ',' << (s.image ? num(*s.image) : std::string()) << ',' << to_string(s.outcome)
                     << '\n';
            }
            if (want_fixed) {
                const auto scan = fixed_points(nf, z_min, z_max, o);
                for (const auto& p : scan.points) {
                    text << "# fixed_point," << num(p.z) << ',' << num(p.multiplier) << ','
                         << (p.stable ? "stable" : "unstable") << '\n';
                }
                for (const auto& [a, b] : scan.discontinuities) {
                    text << "# discontinuity," << num(a) << ',' << num(b) << '\n';
                }
            }
            write_output(c.output, text.str(), out);
            return 0;
        }
        if (name == "bifurcate") {
            const auto nf = normal_form_of(doc, r);
            const auto o = flow_options(r, c);
            SweepOptions so;
            so.transient = r.get("transient", "transient", c.transient);
            so.keep = r.get("keep", "keep", c.keep);
            so.z0 = r.get("z0", "z0", z0);
            so.threads = threads;
            param = r.get("param", "param", param);
            p_from = r.get("from", "from", p_from);
            p_to = r.get("to", "to", p_to);
            p_step = r.get("step", "step", p_step);
            refine = r.get("refine", "refine", refine);
            if (!(p_step > 0.0) || p_to < p_from) {
                throw error(errc::invalid_argument, "need from <= to and step > 0");
            }
            std::vector<double> grid;
            const auto count = static_cast<std::size_t>(std::floor((p_to - p_from) / p_step + 1e-9)) + 1;
            for (std::size_t i = 0; i < count; ++i) {
                grid.push_back(p_from + p_step * static_cast<double>(i));
            }
            const auto res = sweep(nf, param, grid, so, o);
            text << csv_header(name, c, r) << "param,sample\n";
            for (const auto& col : res.columns) {
                for (double v : col.samples) {
                    text << num(col.value) << ',' << num(v) << '\n';
                }
                if (col.gap) {
                    text << "# gap," << num(col.value) << ',' << to_string(*col.gap) << '\n';
                }
                if (col.touches_zero) {
                    text << "# adding_sliding," << num(col.value) << ',' << num(col.min_abs_z) << '\n';
                }
            }
            if (refine) {
                for (const auto& p : locate_adding_sliding(nf, param, res, so, o)) {
                    text << "# refined_candidate," << num(p.value) << ',' << num(p.min_abs_z) << ','
                         << (p.touches_zero ? "touches_zero" : "near_miss") << '\n';
                }
            }
            write_output(c.output, text.str(), out);
            return 0;
        }
        if (name == "scenario2d") {
            const auto nf = normal_form_of(doc, r);
            const auto s = classify_scenario_2d(to_traces_2d(nf));
            json j{{"meta", meta(name, c, r)}};
            j.update(to_json(s));
            write_output(c.output, j.dump(2) + "\n", out);
            return 0;
        }
        if (name == "probe-origin") {
            auto nf = normal_form_of(doc, r);
            const auto o = flow_options(r, c);
            ProbeOptions po;
            po.starts = r.get("starts", "starts", starts);
            radius = r.get("radius", "radius", radius);
            const auto res = origin_stability_probe(nf, radius, o, po);
            json j{{"meta", meta(name, c, r)}};
            j.update(to_json(res));
            write_output(c.output, j.dump(2) + "\n", out);
            return 0;
        }
        err << "unknown subcommand " << name << '\n';
        return 1;
    } catch (const error& e) {
        err << "bebtool: " << e.what() << '\n';
        return is_degeneracy(e.code()) ? 2 : 1;
    } catch (const std::exception& e) {
        err << "bebtool: " << e.what() << '\n';
        return 1;
    }
}

} // namespace beb::cli
