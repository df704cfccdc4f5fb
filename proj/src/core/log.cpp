#include "onlp/log.hpp"

#include <cstdlib>
#include <string>

namespace onlp {

void init_logging() {
  spdlog::level::level_enum level = spdlog::level::warn;
  if (const char* env = std::getenv("ONLP_LOG"); env != nullptr && *env != '\0') {
    const auto parsed = spdlog::level::from_str(env);
    // from_str maps unknown names to off; only accept an explicit "off".
    if (parsed != spdlog::level::off || std::string(env) == "off") level = parsed;
  }
  spdlog::set_level(level);
  spdlog::set_pattern("[%H:%M:%S.%e] [%^%l%$] %v");
}

}  // namespace onlp
