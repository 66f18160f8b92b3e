#pragma once

// nlohmann::json views of library types, shared by the IO and CLI layers.

#include <json.hpp>

#include "spincat/fit.hpp"
#include "spincat/metrology.hpp"
#include "spincat/sequence.hpp"

namespace spincat::detail {

nlohmann::ordered_json to_json(const FringeRecord& r);
nlohmann::ordered_json to_json(const FitResult& fit);
nlohmann::ordered_json to_json(const SensitivityReport& report);
nlohmann::ordered_json to_json(const WignerMap& map);

}  // namespace spincat::detail
