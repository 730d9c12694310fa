#include "beb/report.hpp"

namespace beb {

using nlohmann::json;

json to_json(const Matrix& m)
{
    json rows = json::array();
    for (std::size_t i = 0; i < m.size(); ++i) {
        const auto r = m.row(i);
        rows.push_back(std::vector<double>(r.begin(), r.end()));
    }
    return rows;
}

json to_json(const std::vector<Complex>& v)
{
    json out = json::array();
    for (const auto& z : v) {
        out.push_back({z.real(), z.imag()});
    }
    return out;
}

json to_json(const BEBReport& r)
{
    json j;
    j["n"] = r.n;
    j["verdict"] = to_string(r.verdict);
    j["parity_verdict"] = to_string(r.parity_verdict);
    j["direct_verdict"] = to_string(r.direct_verdict);
    j["alpha_L"] = r.alpha.alpha_L;
    j["alpha_S"] = r.alpha.alpha_S;
    j["rho"] = r.alpha.rho;
    j["rho_b"] = r.alpha.rho_b;
    j["rho_c"] = r.alpha.rho_c;
    j["det_A"] = r.alpha.det_A;
    j["det_Mtilde"] = r.alpha.det_Mtilde;
    j["xL_per_mu"] = r.xL_per_mu;
    j["xS_per_mu"] = r.xS_per_mu;
    j["eig_A"] = to_json(r.eig_A);
    j["eig_Mtilde"] = to_json(r.eig_Mtilde);
    j["N_L"] = r.N_L;
    j["N_S"] = r.N_S;
    j["D_L"] = r.D_L ? json(*r.D_L) : json();
    j["D_S"] = r.D_S ? json(*r.D_S) : json();
    j["c1_sign"] = r.c1_sign;
    j["transversal"] = r.transversal;
    j["notes"] = r.notes;
    return j;
}

json to_json(const TransformRecord& r)
{
    return {{"Psi", to_json(r.Psi)},
            {"Phi", to_json(r.Phi)},
            {"Q", to_json(r.Q)},
            {"r", r.r},
            {"s", r.s},
            {"scale", r.scale},
            {"conjugation_residual", r.conjugation_residual},
            {"forcing_residual", r.forcing_residual}};
}

json to_json(const PoincareSample& s)
{
    json flight = json::array();
    for (auto k : s.flight) {
        flight.push_back(to_string(k));
    }
    return {{"z", s.z},
            {"image", s.image ? json(*s.image) : json()},
            {"outcome", to_string(s.outcome)},
            {"flight", flight},
            {"flight_time", s.flight_time}};
}

json to_json(const FixedPointScan& s)
{
    json pts = json::array();
    for (const auto& p : s.points) {
        pts.push_back({{"z", p.z},
                       {"multiplier", std::isfinite(p.multiplier) ? json(p.multiplier) : json()},
                       {"stable", p.stable},
                       {"residual", p.residual}});
    }
    auto pairs = [](const std::vector<std::pair<double, double>>& v) {
        json out = json::array();
        for (const auto& [a, b] : v) {
            out.push_back({a, b});
        }
        return out;
    };
    return {{"fixed_points", pts}, {"undefined", pairs(s.undefined)}, {"discontinuities", pairs(s.discontinuities)}};
}

json to_json(const ProbeResult& r)
{
    json orbits = json::array();
    for (const auto& o : r.orbits) {
        orbits.push_back({{"start", o.start},
                          {"amplitudes", o.amplitudes},
                          {"ratios", o.ratios},
                          {"exited", o.exited},
                          {"converged", o.converged},
                          {"stopped_by", o.stopped_by ? json(to_string(*o.stopped_by)) : json()}});
    }
    return {{"verdict", to_string(r.verdict)}, {"orbits", orbits}};
}

json to_json(const Scenario2D& s)
{
    return {{"scenario", name(s)},
            {"equilibrium", to_string(s.equilibrium)},
            {"sliding", to_string(s.sliding)},
            {"focus_stability", s.focus_stability}};
}

} // namespace beb
