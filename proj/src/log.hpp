#pragma once

#include <memory>

#include <spdlog/spdlog.h>

namespace fracbirth {

/// Shared stderr logger; level from FRACBIRTH_LOG (error, info, debug), default error.
std::shared_ptr<spdlog::logger> logger();

}  // namespace fracbirth
