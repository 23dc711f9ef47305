#pragma once

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "dpnls/io.hpp"

namespace dpnls::cli {

/// Exit codes: scientific outcomes (blowup, escape) are successes.
inline constexpr int kExitOk = 0;
inline constexpr int kExitNumerical = 2;
inline constexpr int kExitValidation = 3;

/// Every key a config file may set, with its default.
json default_config();

std::vector<std::string> preset_names();
/// Partial config overriding the defaults; throws InvalidParams for unknown names.
json preset(const std::string& name);

/// defaults, then the preset, then the file. Keys absent from the defaults are rejected.
json resolve_config(const std::optional<std::string>& preset_name,
                    const std::optional<std::filesystem::path>& config_file);

/// Entry point shared by the executable and the tests.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace dpnls::cli
