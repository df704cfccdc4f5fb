// Cloud-side executable. Links the solver and the protocol only, never the
// key or decryption code.

#include "cli_support.hpp"

int main(int argc, char** argv) {
  onlp::init_logging();
  CLI::App app("onlp_server: solves masked problems submitted over TCP");
  onlp::protocol::ServerConfig cfg;
  app.add_option("--bind", cfg.bind, "HOST:PORT to listen on (port 0 picks a free one)")
      ->capture_default_str();
  onlp::cli::add_solver_flags(app, cfg.solver);
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : onlp::cli::kExitUsage;
  }
  try {
    return onlp::cli::serve(cfg);
  } catch (const std::exception& e) {
    return onlp::cli::report(e);
  }
}
