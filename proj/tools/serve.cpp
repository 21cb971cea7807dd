// HTTP relighting service.
#include <cstdlib>
#include <iostream>

#include "CLI11.hpp"
#include "httplib.h"
#include "relight/service/server.hpp"

int main(int argc, char** argv) {
  std::string ckpt, host = "127.0.0.1";
  int port = 8080;
  relight::service::ServiceConfig cfg;
  CLI::App app{"Relighting HTTP service"};
  app.add_option("--ckpt", ckpt, "generator checkpoint (default: $RELIGHT_CKPT)");
  app.add_option("--port", port, "listen port");
  app.add_option("--host", host, "listen address");
  app.add_option("--max-dim", cfg.max_dim, "largest accepted image side");
  app.add_option("--tau", cfg.default_tau, "default direct-mode threshold");
  CLI11_PARSE(app, argc, argv);
  if (ckpt.empty()) {
    if (const char* env = std::getenv("RELIGHT_CKPT")) ckpt = env;
  }
  try {
    std::shared_ptr<const relight::models::Generator> gen;
    if (!ckpt.empty()) gen = relight::models::load_generator(ckpt);
    else std::cerr << "serve: no checkpoint, learned endpoints disabled\n";
    relight::service::RelightService service(gen, cfg);
    httplib::Server srv;
    srv.set_payload_max_length(64u << 20);
    service.install(srv);
    std::cerr << "serve: listening on " << host << ":" << port << "\n";
    if (!srv.listen(host, port)) {
      std::cerr << "serve: cannot listen on " << host << ":" << port << "\n";
      return 1;
    }
  } catch (const std::exception& e) {
    std::cerr << "serve: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
