#ifndef TONECRAFT_SERVICE_SERVER_HPP
#define TONECRAFT_SERVICE_SERVER_HPP

#include <memory>
#include <string>
#include <thread>

// Eigen must precede httplib: <resolv.h> defines a _res macro that clashes
// with Eigen parameter names.
#include "tonecraft/service/api.hpp"

// The default backlog of 5 refuses bursts of concurrent clients.
#ifndef CPPHTTPLIB_LISTEN_BACKLOG
#define CPPHTTPLIB_LISTEN_BACKLOG 256
#endif
#include <httplib.h>

namespace tonecraft::service {

/// HTTP front end over an immutable model. Handlers only read the model, so
/// httplib's worker threads need no locking.
class Server {
 public:
  explicit Server(std::shared_ptr<const neural::LoadedModel> model = nullptr) : model_(std::move(model)) {
    auto send = [](httplib::Response& res, const Reply& r) {
      res.status = r.status;
      res.set_content(r.body.dump(), "application/json");
    };
    http_.Get("/v1/health", [this, send](const httplib::Request&, httplib::Response& res) {
      send(res, handle_health(model_.get()));
    });
    http_.Post("/v1/respond", [this, send](const httplib::Request& req, httplib::Response& res) {
      send(res, handle_respond(model_.get(), req.body));
    });
    http_.Post("/v1/respond_all", [this, send](const httplib::Request& req, httplib::Response& res) {
      send(res, handle_respond_all(model_.get(), req.body));
    });
    auto not_allowed = [send](const httplib::Request& req, httplib::Response& res) {
      send(res, error_reply(405, "method_not_allowed", req.method + " is not allowed on " + req.path));
    };
    http_.Post("/v1/health", not_allowed).Put("/v1/health", not_allowed).Delete("/v1/health", not_allowed);
    http_.Patch("/v1/health", not_allowed);
    for (const char* path : {"/v1/respond", "/v1/respond_all"})
      http_.Get(path, not_allowed).Put(path, not_allowed).Delete(path, not_allowed).Patch(path, not_allowed);
    http_.set_error_handler([send](const httplib::Request& req, httplib::Response& res) {
      // only rewrite bodies the routes above did not produce
      if (res.body.empty()) {
        if (res.status == 404)
          send(res, error_reply(404, "not_found", "no route for " + req.path));
        else
          send(res, error_reply(res.status, "http_error", "request failed"));
      }
    });
  }

  /// Blocks until stop(). Returns false if the address cannot be bound.
  bool listen(const std::string& host, int port) { return http_.listen(host, port); }

  /// Binds an ephemeral port and serves on a background thread.
  int start_background(const std::string& host = "127.0.0.1") {
    const int port = http_.bind_to_any_port(host);
    if (port <= 0) throw Error("cannot bind " + host);
    worker_ = std::thread([this] { http_.listen_after_bind(); });
    while (!http_.is_running()) std::this_thread::yield();
    return port;
  }

  void stop() {
    http_.stop();
    if (worker_.joinable()) worker_.join();
  }

  ~Server() { stop(); }

  Server(const Server&) = delete;
  Server& operator=(const Server&) = delete;

 private:
  std::shared_ptr<const neural::LoadedModel> model_;
  httplib::Server http_;
  std::thread worker_;
};

}  // namespace tonecraft::service

#endif  // TONECRAFT_SERVICE_SERVER_HPP
