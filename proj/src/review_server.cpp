#include <httplib.h>

#include <atomic>
#include <charconv>

#include "spoilkit/review.hpp"

namespace spoilkit {

struct ReviewServer::Impl {
  explicit Impl(ReviewService& s) : service(s) {}
  ReviewService& service;
  httplib::Server server;
  std::atomic<bool> bound{false};
};

namespace {

void send_json(httplib::Response& res, int status, const Json& body) {
  res.status = status;
  res.set_content(canonical_json(body), "application/json; charset=utf-8");
}

void send_error(httplib::Response& res, int status, const std::string& message) {
  send_json(res, status, Json{{"error", message}});
}

std::size_t parse_limit(const httplib::Request& req) {
  if (!req.has_param("limit")) return 20;
  const std::string v = req.get_param_value("limit");
  std::size_t n = 0;
  const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), n);
  if (ec != std::errc() || ptr != v.data() + v.size()) {
    throw ValidationError("limit must be a non-negative integer");
  }
  return n;
}

// Maps library errors onto status codes so handlers stay one-liners.
template <typename F>
void guarded(httplib::Response& res, F&& body) {
  try {
    body();
  } catch (const NotFoundError& e) {
    send_error(res, 404, e.what());
  } catch (const ValidationError& e) {
    send_error(res, 422, e.what());
  } catch (const IoError& e) {
    send_error(res, 500, e.what());
  }
}

}  // namespace

ReviewServer::ReviewServer(ReviewService& service,
                           std::optional<std::filesystem::path> static_dir)
    : impl_(std::make_unique<Impl>(service)) {
  auto& srv = impl_->server;
  ReviewService* svc = &service;

  srv.Get("/api/queue", [svc](const httplib::Request& req, httplib::Response& res) {
    guarded(res, [&] { send_json(res, 200, svc->queue_json(parse_limit(req))); });
  });

  srv.Get("/api/stats", [svc](const httplib::Request&, httplib::Response& res) {
    guarded(res, [&] { send_json(res, 200, svc->stats_json()); });
  });

  srv.Get(R"(/api/examples/([^/]+))", [svc](const httplib::Request& req, httplib::Response& res) {
    guarded(res, [&] { send_json(res, 200, svc->example_json(req.matches[1].str())); });
  });

  srv.Post(R"(/api/examples/([^/]+)/decision)",
           [svc](const httplib::Request& req, httplib::Response& res) {
             guarded(res, [&] {
               Json body = parse_json(req.body, "request body");
               if (!body.is_object()) throw ValidationError("body must be a JSON object");
               body["example_id"] = req.matches[1].str();
               body.erase("decided_at");
               body.erase("score");
               if (!body.contains("reviewer")) throw ValidationError("reviewer is required");
               const ReviewDecision d = svc->record(ReviewDecision::from_json(body));
               send_json(res, 200, Json{{"decision", d.to_json()}, {"stats", svc->stats_json()}});
             });
           });

  if (static_dir) {
    if (!srv.set_mount_point("/", static_dir->string())) {
      throw IoError("static directory not found: " + static_dir->string());
    }
  }
}

ReviewServer::~ReviewServer() { stop(); }

void ReviewServer::listen(const std::string& host, int port) {
  if (!impl_->server.bind_to_port(host, port)) {
    throw IoError("cannot bind " + host + ":" + std::to_string(port));
  }
  impl_->bound = true;
  serve();
}

int ReviewServer::bind_any(const std::string& host) {
  const int port = impl_->server.bind_to_any_port(host);
  if (port < 0) throw IoError("cannot bind " + host);
  impl_->bound = true;
  return port;
}

void ReviewServer::serve() {
  if (!impl_->bound) throw IoError("serve() before bind");
  impl_->server.listen_after_bind();
}

void ReviewServer::stop() {
  if (impl_) impl_->server.stop();
}

bool ReviewServer::running() const { return impl_->server.is_running(); }

}  // namespace spoilkit
