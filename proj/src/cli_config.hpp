#pragma once

#include <memory>

#include "CLI11.hpp"

namespace kframes::cli {

/// Reads JSON config files (anything starting with '{') and falls back to
/// CLI11's TOML/INI reader otherwise. Keys for a subcommand live under an
/// object named after it, e.g. {"select": {"k": 8}}.
std::shared_ptr<CLI::Config> make_config_formatter();

}  // namespace kframes::cli
