#pragma once

#include <filesystem>
#include <memory>
#include <string>
#include <utility>

#include "service.hpp"

namespace am {

/// Splits "host:port"; a bare port binds 127.0.0.1.
std::pair<std::string, int> parse_bind_address(const std::string& bind);

/// HTTP+JSON front end of a SessionManager, optionally serving a static UI
/// bundle from `ui_dir`.
class HttpServer {
 public:
  HttpServer(SessionManager& sessions, std::filesystem::path ui_dir = {});
  ~HttpServer();
  HttpServer(const HttpServer&) = delete;
  HttpServer& operator=(const HttpServer&) = delete;

  /// Binds the listening socket; port 0 picks a free port. Returns the bound
  /// port. An address already in use is an Io error.
  int bind(const std::string& host, int port);
  /// Serves until stop().
  void run();
  void stop();
  bool running() const;
  /// Blocks until run() has started accepting connections.
  void wait_until_ready() const;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace am
