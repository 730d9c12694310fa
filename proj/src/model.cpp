#include "beb/model.hpp"

#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include "beb/error.hpp"

namespace beb {

using nlohmann::json;

void PWLSystem::validate() const
{
    const auto n = A.size();
    if (n == 0) {
        throw error(errc::dimension_mismatch, "system dimension must be at least 1");
    }
    if (b.size() != n || c.size() != n) {
        throw error(errc::dimension_mismatch, "b and c must have length n = " + std::to_string(n));
    }
    auto finite = [](const Vector& v) {
        for (double x : v) {
            if (!std::isfinite(x)) {
                return false;
            }
        }
        return true;
    };
    if (!A.all_finite() || !finite(b) || !finite(c)) {
        throw error(errc::schema_error, "system entries must be finite");
    }
}

Vector PWLSystem::left_field(std::span<const double> x, double mu) const
{
    Vector f = A * x;
    for (std::size_t i = 0; i < f.size(); ++i) {
        f[i] += b[i] * mu;
    }
    return f;
}

NormalFormParams::NormalFormParams(Vector a_coeffs, const Vector& d, double mu_value)
    : a(std::move(a_coeffs)), mu(mu_value)
{
    if (d.size() != a.size() || a.empty()) {
        throw error(errc::dimension_mismatch, "normal form needs len(a) == len(d) >= 1");
    }
    if (d[0] == 1.0) {
        d1 = 1;
    } else if (d[0] == -1.0) {
        d1 = -1;
    } else {
        throw error(errc::non_unit_d1, "normal form requires d_1 = +1 or -1, got " + std::to_string(d[0]));
    }
    d_tail.assign(d.begin() + 1, d.end());
}

Vector NormalFormParams::d() const
{
    Vector out;
    out.reserve(d_tail.size() + 1);
    out.push_back(static_cast<double>(d1));
    out.insert(out.end(), d_tail.begin(), d_tail.end());
    return out;
}

void NormalFormParams::validate() const
{
    if (a.empty() || d_tail.size() + 1 != a.size()) {
        throw error(errc::dimension_mismatch, "normal form needs len(a) == len(d) >= 1");
    }
    if (d1 != 1 && d1 != -1) {
        throw error(errc::non_unit_d1, "normal form requires d_1 = +1 or -1");
    }
    for (double v : a) {
        if (!std::isfinite(v)) {
            throw error(errc::schema_error, "normal form coefficients must be finite");
        }
    }
    for (double v : d_tail) {
        if (!std::isfinite(v)) {
            throw error(errc::schema_error, "normal form coefficients must be finite");
        }
    }
    if (!std::isfinite(mu)) {
        throw error(errc::schema_error, "mu must be finite");
    }
}

NormalFormParams from_traces(const TraceParams2D& p, double mu)
{
    return NormalFormParams({-p.tau_L, p.delta_L}, {-1.0, p.d2}, mu);
}

NormalFormParams from_traces(const TraceParams3D& p, double mu)
{
    return NormalFormParams({-p.tau_L, p.sigma_L, -p.delta_L}, {-1.0, p.tau_S, -p.delta_S}, mu);
}

TraceParams2D to_traces_2d(const NormalFormParams& nf)
{
    if (nf.dim() != 2 || nf.d1 != -1) {
        throw error(errc::invalid_argument, "2D trace parameters need n = 2 and d_1 = -1");
    }
    return {-nf.a[0], nf.a[1], nf.d_tail[0]};
}

TraceParams3D to_traces_3d(const NormalFormParams& nf)
{
    if (nf.dim() != 3 || nf.d1 != -1) {
        throw error(errc::invalid_argument, "3D trace parameters need n = 3 and d_1 = -1");
    }
    return {-nf.a[0], nf.a[1], -nf.a[2], nf.d_tail[0], -nf.d_tail[1]};
}

PWLSystem embed(const NormalFormParams& nf)
{
    nf.validate();
    const auto n = nf.dim();
    return PWLSystem{Matrix::companion(nf.a), unit_vector(n, n - 1), nf.d()};
}

PWLSystem SystemDocument::system() const
{
    if (const auto* nf = std::get_if<NormalFormParams>(&model)) {
        return embed(*nf);
    }
    return std::get<PWLSystem>(model);
}

namespace {

void require_keys(const json& obj, std::string_view where, const std::set<std::string>& required,
                  const std::set<std::string>& optional)
{
    if (!obj.is_object()) {
        throw error(errc::schema_error, std::string(where) + " must be an object");
    }
    for (const auto& [key, value] : obj.items()) {
        if (!required.count(key) && !optional.count(key)) {
            throw error(errc::schema_error, "unexpected field \"" + key + "\" in " + std::string(where));
        }
    }
    for (const auto& key : required) {
        if (!obj.contains(key)) {
            throw error(errc::schema_error, "missing field \"" + key + "\" in " + std::string(where));
        }
    }
}

double number(const json& v, std::string_view what)
{
    if (!v.is_number()) {
        throw error(errc::schema_error, std::string(what) + " must be a number");
    }
    const double x = v.get<double>();
    if (!std::isfinite(x)) {
        throw error(errc::schema_error, std::string(what) + " must be finite");
    }
    return x;
}

Vector number_array(const json& v, std::string_view what)
{
    if (!v.is_array()) {
        throw error(errc::schema_error, std::string(what) + " must be an array of numbers");
    }
    Vector out;
    out.reserve(v.size());
    for (const auto& x : v) {
        out.push_back(number(x, what));
    }
    return out;
}

PWLSystem parse_pwl(const json& obj)
{
    require_keys(obj, "\"system\"", {"A", "b", "c"}, {"mu"});
    const auto& rows = obj.at("A");
    if (!rows.is_array() || rows.empty()) {
        throw error(errc::schema_error, "\"A\" must be a non-empty array of rows");
    }
    const auto n = rows.size();
    Matrix a(n);
    for (std::size_t i = 0; i < n; ++i) {
        const auto row = number_array(rows[i], "rows of \"A\"");
        if (row.size() != n) {
            throw error(errc::dimension_mismatch,
                        "\"A\" must be square: row " + std::to_string(i) + " has " + std::to_string(row.size()) +
                            " entries, expected " + std::to_string(n));
        }
        for (std::size_t j = 0; j < n; ++j) {
            a(i, j) = row[j];
        }
    }
    PWLSystem sys{std::move(a), number_array(obj.at("b"), "\"b\""), number_array(obj.at("c"), "\"c\"")};
    sys.validate();
    return sys;
}

NormalFormParams parse_normal_form(const json& obj)
{
    require_keys(obj, "\"normal_form\"", {"a", "d"}, {"mu"});
    auto a = number_array(obj.at("a"), "\"a\"");
    auto d = number_array(obj.at("d"), "\"d\"");
    const double mu = obj.contains("mu") ? number(obj.at("mu"), "\"mu\"") : 0.0;
    return NormalFormParams(std::move(a), d, mu);
}

NormalFormParams parse_traces(const json& obj)
{
    if (!obj.is_object()) {
        throw error(errc::schema_error, "\"traces\" must be an object");
    }
    const double mu = obj.contains("mu") ? number(obj.at("mu"), "\"mu\"") : 0.0;
    if (obj.contains("d2")) {
        require_keys(obj, "\"traces\" (2D)", {"tau_L", "delta_L", "d2"}, {"mu"});
        TraceParams2D p{number(obj.at("tau_L"), "tau_L"), number(obj.at("delta_L"), "delta_L"),
                        number(obj.at("d2"), "d2")};
        return from_traces(p, mu);
    }
    require_keys(obj, "\"traces\" (3D)", {"tau_L", "sigma_L", "delta_L", "tau_S", "delta_S"}, {"mu"});
    TraceParams3D p{number(obj.at("tau_L"), "tau_L"), number(obj.at("sigma_L"), "sigma_L"),
                    number(obj.at("delta_L"), "delta_L"), number(obj.at("tau_S"), "tau_S"),
                    number(obj.at("delta_S"), "delta_S")};
    return from_traces(p, mu);
}

} // namespace

SystemDocument parse_system(const json& doc)
{
    require_keys(doc, "document", {}, {"system", "normal_form", "traces", "run"});
    const int kinds = static_cast<int>(doc.contains("system")) + static_cast<int>(doc.contains("normal_form")) +
                      static_cast<int>(doc.contains("traces"));
    if (kinds != 1) {
        throw error(errc::schema_error, "document needs exactly one of \"system\", \"normal_form\", \"traces\"");
    }
    SystemDocument out{PWLSystem{}, 0.0, std::nullopt};
    if (doc.contains("system")) {
        const auto& obj = doc.at("system");
        out.model = parse_pwl(obj);
        out.mu = obj.contains("mu") ? number(obj.at("mu"), "\"mu\"") : 0.0;
    } else {
        auto nf = doc.contains("normal_form") ? parse_normal_form(doc.at("normal_form")) : parse_traces(doc.at("traces"));
        out.mu = nf.mu;
        out.model = std::move(nf);
    }
    if (doc.contains("run")) {
        if (!doc.at("run").is_object()) {
            throw error(errc::schema_error, "\"run\" must be an object");
        }
        out.run = doc.at("run");
    }
    return out;
}

SystemDocument parse_system(std::string_view text)
{
    json doc;
    try {
        doc = json::parse(text);
    } catch (const json::parse_error& e) {
        throw error(errc::schema_error, std::string("invalid JSON: ") + e.what());
    }
    return parse_system(doc);
}

SystemDocument load_system(const std::string& path)
{
    std::ifstream in(path);
    if (!in) {
        throw error(errc::schema_error, "cannot open " + path);
    }
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_system(std::string_view(ss.str()));
}

json to_json(const PWLSystem& sys, double mu)
{
    json rows = json::array();
    for (std::size_t i = 0; i < sys.dim(); ++i) {
        rows.push_back(Vector(sys.A.row(i).begin(), sys.A.row(i).end()));
    }
    return json{{"system", {{"A", rows}, {"b", sys.b}, {"c", sys.c}, {"mu", mu}}}};
}

json to_json(const NormalFormParams& nf)
{
    return json{{"normal_form", {{"a", nf.a}, {"d", nf.d()}, {"mu", nf.mu}}}};
}

} // namespace beb
