#pragma once

#include <spdlog/spdlog.h>

namespace onlp {

/// Applies the ONLP_LOG environment variable (trace, debug, info, warn, error,
/// critical, off) to the default spdlog logger. Unset or unknown values leave
/// the level at warn. Safe to call more than once.
void init_logging();

}  // namespace onlp
