#pragma once

#include <json.hpp>

#include "mmcount/compensation.hpp"
#include "mmcount/types.hpp"

namespace mmcount {

using json = nlohmann::json;

void to_json(json& j, const SensorSetup& s);
void from_json(const json& j, SensorSetup& s);

void to_json(json& j, const ScenarioDescriptor& s);
void from_json(const json& j, ScenarioDescriptor& s);

void to_json(json& j, const Detection& d);
void from_json(const json& j, Detection& d);

}  // namespace mmcount

namespace mmcount::compensation {

// Wire shape shared with the remote-agent strategy protocol.
void to_json(json& j, const CompensationStrategy& s);
void from_json(const json& j, CompensationStrategy& s);

void to_json(json& j, const ScoreBreakdown& sb);

}  // namespace mmcount::compensation
