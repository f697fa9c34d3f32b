#pragma once

#include <spdlog/spdlog.h>

#include <string>

namespace tclfit {

/// Shared stderr logger. The level comes from TCLFIT_LOG_LEVEL (trace, debug, info,
/// warn, error, off); default warn.
spdlog::logger& log();

/// Overrides the level; empty keeps the current one. Unknown names raise ValidationError.
void set_log_level(const std::string& name);

}  // namespace tclfit
