#include "log.hpp"

#include <cstdlib>
#include <mutex>
#include <string>

#include <spdlog/sinks/stdout_sinks.h>

namespace fracbirth {

std::shared_ptr<spdlog::logger> logger() {
  static std::once_flag once;
  static std::shared_ptr<spdlog::logger> instance;
  std::call_once(once, [] {
    instance = std::make_shared<spdlog::logger>("fracbirth", std::make_shared<spdlog::sinks::stderr_sink_mt>());
    instance->set_pattern("[%l] %v");
    const char* env = std::getenv("FRACBIRTH_LOG");
    const std::string level = env ? env : "error";
    if (level == "debug")
      instance->set_level(spdlog::level::debug);
    else if (level == "info")
      instance->set_level(spdlog::level::info);
    else
      instance->set_level(spdlog::level::err);
  });
  return instance;
}

}  // namespace fracbirth
