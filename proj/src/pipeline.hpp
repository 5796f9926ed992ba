#pragma once

#include <functional>
#include <string>
#include <string_view>
#include <vector>

#include "config.hpp"

namespace kpforge {

/// Receives human-readable progress and report lines.
using MessageSink = std::function<void(std::string_view)>;

const std::vector<std::string>& command_names();

/// Runs one subcommand. Artifacts go to the paths named in `config`; errors
/// are thrown as kpforge::Error.
void run_command(const std::string& command, const RunConfig& config, const MessageSink& sink);

}  // namespace kpforge
