#include "http_server.hpp"

#include <charconv>

#include <httplib.h>

#include "errors.hpp"

namespace am {

using nlohmann::json;

namespace {

int status_for(ErrorCode code) {
  switch (code) {
    case ErrorCode::NotFound: return 404;
    case ErrorCode::Conflict:
    case ErrorCode::Exhaustion: return 409;
    case ErrorCode::Io: return 500;
    default: return 400;
  }
}

void send_json(httplib::Response& res, const json& body, int status = 200) {
  res.status = status;
  res.set_content(body.dump(), "application/json");
}

void send_error(httplib::Response& res, int status, const std::string& code, const std::string& message) {
  send_json(res, {{"code", code}, {"message", message}}, status);
}

template <class F>
auto guarded(F&& f) {
  return [f = std::forward<F>(f)](const httplib::Request& req, httplib::Response& res) {
    try {
      f(req, res);
    } catch (const Error& e) {
      send_error(res, status_for(e.code()), to_string(e.code()), e.what());
    } catch (const json::exception& e) {
      send_error(res, 400, to_string(ErrorCode::Validation), e.what());
    } catch (const std::exception& e) {
      send_error(res, 500, "internal_error", e.what());
    }
  };
}

json parse_body(const httplib::Request& req) {
  json body = json::parse(req.body, nullptr, false);
  if (body.is_discarded()) fail(ErrorCode::Validation, "request body is not valid JSON");
  return body;
}

json info_to_json(const SessionInfo& i) {
  return {{"id", i.id},           {"state", i.state},          {"pool_name", i.pool_name},
          {"t", i.t},             {"pool_size", i.pool_size},  {"created_ms", i.created_ms},
          {"updated_ms", i.updated_ms}};
}

json next_to_json(const NextResult& n) {
  if (n.exhausted)
    return {{"status", "exhausted"}, {"report", n.final_report ? report_to_json(*n.final_report) : json(nullptr)}};
  return {{"status", "pending"},
          {"t", n.sample->t},
          {"unit", n.sample->unit_id},
          {"payload_ref", n.sample->payload_ref},
          {"q", n.sample->q}};
}

}  // namespace

std::pair<std::string, int> parse_bind_address(const std::string& bind) {
  std::string host = "127.0.0.1";
  std::string port_text = bind;
  if (auto colon = bind.rfind(':'); colon != std::string::npos) {
    host = bind.substr(0, colon);
    port_text = bind.substr(colon + 1);
    if (host.size() >= 2 && host.front() == '[' && host.back() == ']') host = host.substr(1, host.size() - 2);
  }
  int port = -1;
  auto r = std::from_chars(port_text.data(), port_text.data() + port_text.size(), port);
  if (r.ec != std::errc() || r.ptr != port_text.data() + port_text.size() || port < 0 || port > 65535 || host.empty())
    fail(ErrorCode::Config, "invalid bind address " + bind + " (expected host:port)");
  return {host, port};
}

struct HttpServer::Impl {
  SessionManager& sessions;
  httplib::Server server;
  bool bound = false;

  explicit Impl(SessionManager& s) : sessions(s) {}
};

HttpServer::HttpServer(SessionManager& sessions, std::filesystem::path ui_dir)
    : impl_(std::make_unique<Impl>(sessions)) {
  auto& svr = impl_->server;
  auto& mgr = impl_->sessions;

  // SO_REUSEPORT would let a second server share the port.
  svr.set_socket_options([](socket_t sock) {
    int yes = 1;
    setsockopt(sock, SOL_SOCKET, SO_REUSEADDR, reinterpret_cast<const void*>(&yes), sizeof(yes));
  });
  svr.set_default_headers({{"Access-Control-Allow-Origin", "*"}});
  svr.Options(R"(.*)", [](const httplib::Request&, httplib::Response& res) {
    res.set_header("Access-Control-Allow-Methods", "GET, POST, OPTIONS");
    res.set_header("Access-Control-Allow-Headers", "Content-Type");
    res.status = 204;
  });

  svr.Get("/health", guarded([&mgr](const httplib::Request&, httplib::Response& res) {
    send_json(res, {{"status", "ok"}, {"sessions", mgr.list().size()}});
  }));
  svr.Get("/pools", guarded([&mgr](const httplib::Request&, httplib::Response& res) {
    send_json(res, mgr.pools());
  }));
  svr.Get("/sessions", guarded([&mgr](const httplib::Request&, httplib::Response& res) {
    json out = json::array();
    for (const SessionInfo& i : mgr.list()) out.push_back(info_to_json(i));
    send_json(res, out);
  }));
  svr.Post("/sessions", guarded([&mgr](const httplib::Request& req, httplib::Response& res) {
    const std::string id = mgr.create(parse_body(req));
    send_json(res, info_to_json(mgr.info(id)), 201);
  }));
  svr.Get(R"(/sessions/([^/]+))", guarded([&mgr](const httplib::Request& req, httplib::Response& res) {
    send_json(res, info_to_json(mgr.info(req.matches[1])));
  }));
  svr.Get(R"(/sessions/([^/]+)/next)", guarded([&mgr](const httplib::Request& req, httplib::Response& res) {
    send_json(res, next_to_json(mgr.next_sample(req.matches[1])));
  }));
  svr.Post(R"(/sessions/([^/]+)/labels)", guarded([&mgr](const httplib::Request& req, httplib::Response& res) {
    const json body = parse_body(req);
    if (!body.is_object() || !body.contains("unit") || !body.contains("value"))
      fail(ErrorCode::Validation, "body must be {\"unit\": id, \"value\": number}");
    if (!body.at("value").is_number()) fail(ErrorCode::Validation, "label value must be a number");
    const EstimateReport rep =
        mgr.submit_label(req.matches[1], body.at("unit").get<std::string>(), body.at("value").get<double>());
    send_json(res, report_to_json(rep));
  }));
  svr.Get(R"(/sessions/([^/]+)/trajectory)", guarded([&mgr](const httplib::Request& req, httplib::Response& res) {
    json out = json::array();
    for (const EstimateReport& r : mgr.trajectory(req.matches[1])) out.push_back(report_to_json(r));
    send_json(res, out);
  }));
  svr.Post(R"(/sessions/([^/]+)/predictions)", guarded([&mgr](const httplib::Request& req, httplib::Response& res) {
    const json body = parse_body(req);
    const json& table = body.is_object() && body.contains("predictions") ? body.at("predictions") : body;
    mgr.push_predictions(req.matches[1], table);
    send_json(res, {{"ok", true}});
  }));
  svr.Get(R"(/sessions/([^/]+)/export)", guarded([&mgr](const httplib::Request& req, httplib::Response& res) {
    const std::string id = req.matches[1];
    res.set_content(mgr.export_log(id), "application/x-ndjson");
    res.set_header("Content-Disposition", "attachment; filename=\"" + id + ".jsonl\"");
  }));

  if (!ui_dir.empty() && std::filesystem::is_directory(ui_dir)) {
    svr.set_mount_point("/", ui_dir.string());
  } else {
    svr.Get("/", [](const httplib::Request&, httplib::Response& res) {
      send_json(res, {{"service", "active-measure"}, {"ui", false}});
    });
  }
}

HttpServer::~HttpServer() { stop(); }

int HttpServer::bind(const std::string& host, int port) {
  auto& svr = impl_->server;
  int bound = port;
  if (port == 0) {
    bound = svr.bind_to_any_port(host);
    if (bound < 0) fail(ErrorCode::Io, "cannot bind " + host + " to a free port");
  } else if (!svr.bind_to_port(host, port)) {
    fail(ErrorCode::Io, "cannot bind " + host + ":" + std::to_string(port) + " (address in use?)");
  }
  impl_->bound = true;
  return bound;
}

void HttpServer::run() {
  if (!impl_->bound) fail(ErrorCode::State, "bind() must be called before run()");
  impl_->server.listen_after_bind();
}

void HttpServer::stop() {
  if (impl_ && impl_->server.is_running()) impl_->server.stop();
}

bool HttpServer::running() const { return impl_->server.is_running(); }

void HttpServer::wait_until_ready() const { impl_->server.wait_until_ready(); }

}  // namespace am
