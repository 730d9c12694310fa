#pragma once

// JSON views of analysis and simulation results.

#include <json.hpp>

#include "beb/beb_analysis.hpp"
#include "beb/dynamics.hpp"
#include "beb/normal_form.hpp"

namespace beb {

nlohmann::json to_json(const Matrix& m);
nlohmann::json to_json(const std::vector<Complex>& v);
nlohmann::json to_json(const BEBReport& r);
nlohmann::json to_json(const TransformRecord& r);
nlohmann::json to_json(const PoincareSample& s);
nlohmann::json to_json(const FixedPointScan& s);
nlohmann::json to_json(const ProbeResult& r);
nlohmann::json to_json(const Scenario2D& s);

} // namespace beb
