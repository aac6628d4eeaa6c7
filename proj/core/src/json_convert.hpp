#pragma once

// Private JSON conversions shared by the sources; not installed.

#include <json.hpp>

#include "mdprec/config.hpp"
#include "mdprec/probgen.hpp"

namespace mdprec::detail {

using nlohmann::json;

probgen::GenConfig gen_from_json(const json& j, const std::string& path);
json gen_to_json(const probgen::GenConfig& cfg);
block::BlockPrecConfig prec_from_json(const json& j, const std::string& path);
json prec_to_json(const block::BlockPrecConfig& cfg);
json report_to_json(const krylov::SolveReport& r);

} // namespace mdprec::detail
