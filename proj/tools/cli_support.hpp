#pragma once

// Shared by the onlp and onlp_server executables. Must not pull in the key
// or decryption code: onlp_server links only the cloud-side libraries.

#include "onlp/errors.hpp"
#include "onlp/grg.hpp"
#include "onlp/log.hpp"
#include "onlp/protocol.hpp"

#include <CLI11.hpp>

#include <csignal>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>

namespace onlp::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitFailure = 1;
inline constexpr int kExitRejected = 2;
inline constexpr int kExitUsage = 64;
inline constexpr int kExitData = 65;

/// Bad flags or unusable files.
class UsageError : public Error {
 public:
  using Error::Error;
};

inline std::string read_file(const std::string& path) {
  if (path == "-") {
    std::ostringstream ss;
    ss << std::cin.rdbuf();
    return ss.str();
  }
  std::ifstream in(path, std::ios::binary);
  if (!in) throw UsageError("cannot open '" + path + "' for reading");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline void write_file(const std::string& path, const std::string& text) {
  if (path.empty() || path == "-") {
    std::cout << text << std::flush;
    return;
  }
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw UsageError("cannot open '" + path + "' for writing");
  out << text;
  if (!out.flush()) throw UsageError("cannot write '" + path + "'");
}

inline void add_solver_flags(CLI::App& app, grg::SolverConfig& cfg) {
  app.add_option("--eps-direction", cfg.eps_direction, "Stop when ||d_N||_1 falls below this")
      ->capture_default_str();
  app.add_option("--eps-feas", cfg.eps_feas, "Restoration target for ||e||_1")
      ->capture_default_str();
  app.add_option("--max-outer", cfg.max_outer, "Outer iteration limit (0: 10 (n + l))")
      ->capture_default_str();
}

/// Maps an exception escaping a subcommand to an exit code and a message on
/// stderr.
inline int report(const std::exception& e) {
  std::fprintf(stderr, "error: %s\n", e.what());
  if (dynamic_cast<const UsageError*>(&e) != nullptr) return kExitUsage;
  if (dynamic_cast<const ParseError*>(&e) != nullptr) return kExitData;
  if (dynamic_cast<const DomainError*>(&e) != nullptr) return kExitData;
  return kExitFailure;
}

namespace detail {
inline protocol::Server* g_server = nullptr;
inline void on_signal(int) {
  if (g_server != nullptr) g_server->stop();
}
}  // namespace detail

/// Runs a server until SIGINT or SIGTERM. Prints the bound address first so
/// callers that bind port 0 can find it.
inline int serve(const protocol::ServerConfig& cfg) {
  protocol::Server server(cfg);
  detail::g_server = &server;
  std::signal(SIGINT, detail::on_signal);
  std::signal(SIGTERM, detail::on_signal);
  std::printf("listening on %s\n", server.address().c_str());
  std::fflush(stdout);
  server.run();
  detail::g_server = nullptr;
  return kExitOk;
}

}  // namespace onlp::cli
