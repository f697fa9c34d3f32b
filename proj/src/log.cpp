#include "tclfit/log.hpp"

#include "tclfit/errors.hpp"

#include <spdlog/sinks/stdout_sinks.h>

#include <cstdlib>
#include <memory>

namespace tclfit {

spdlog::logger& log() {
  static std::shared_ptr<spdlog::logger> logger = [] {
    auto l = std::make_shared<spdlog::logger>("tclfit", std::make_shared<spdlog::sinks::stderr_sink_mt>());
    l->set_pattern("[%l] %v");
    const char* env = std::getenv("TCLFIT_LOG_LEVEL");
    l->set_level(env ? spdlog::level::from_str(env) : spdlog::level::warn);
    return l;
  }();
  return *logger;
}

void set_log_level(const std::string& name) {
  if (name.empty()) return;
  const auto level = spdlog::level::from_str(name);
  if (level == spdlog::level::off && name != "off") throw ValidationError("--log-level: unknown level '" + name + "'");
  log().set_level(level);
}

}  // namespace tclfit
