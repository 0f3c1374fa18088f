#pragma once

#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "duphist/model/params.hpp"

namespace duphist {

// key=value lines, '#' comments. Unknown keys and bad values raise ParseError
// with the line and column of the offending token.
RunConfig parse_config(std::string_view text, RunConfig base = {});
RunConfig load_config(const std::string& path, RunConfig base = {});

// Canonical key=value rendering of every setting (used for manifests).
std::vector<std::pair<std::string, std::string>> config_entries(const RunConfig& c);
std::string config_text(const RunConfig& c);

}  // namespace duphist
