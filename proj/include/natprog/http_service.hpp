#pragma once

#include <atomic>
#include <chrono>
#include <memory>
#include <string>

#include "httplib.h"
#include "json.hpp"
#include "natprog/session.hpp"

namespace natprog {

inline int http_status(ServiceError::Kind k) {
  switch (k) {
    case ServiceError::Kind::bad_request:
      return 400;
    case ServiceError::Kind::not_found:
    case ServiceError::Kind::unknown_name:
      return 404;
    case ServiceError::Kind::solver_busy:
    case ServiceError::Kind::duplicate_name:
    case ServiceError::Kind::session_ended:
      return 409;
  }
  return 500;
}

/// One server-sent event: "id", "event" and a single JSON "data" line.
inline std::string format_sse(const SessionEvent& e) {
  return "id: " + std::to_string(e.seq) + "\nevent: " + e.type + "\ndata: " + e.data.dump() + "\n\n";
}

/// JSON over HTTP front end for a SessionManager.
///
///   POST /sessions                      {"condition","seed","r","generation","duration","library"}
///   GET  /sessions/{id}                 snapshot
///   POST /sessions/{id}/submit          see SessionManager::submit
///   POST /sessions/{id}/cancel
///   GET  /sessions/{id}/library?filter=
///   GET  /sessions/{id}/recipes
///   GET  /sessions/{id}/events?since=N  text/event-stream, closed at session end
///
/// Errors are {"error": kind, "message": text}.
class HttpService {
 public:
  explicit HttpService(SessionManager& sessions) : sessions_(sessions) { routes(); }

  ~HttpService() { stop(); }

  HttpService(const HttpService&) = delete;
  HttpService& operator=(const HttpService&) = delete;

  /// Binds to `port` (0 picks a free one) and returns the bound port, or -1.
  int bind(const std::string& host = "127.0.0.1", int port = 0) {
    return port == 0 ? server_.bind_to_any_port(host) : (server_.bind_to_port(host, port) ? port : -1);
  }

  /// Serves until stop(); blocks.
  bool listen() { return server_.listen_after_bind(); }

  void stop() {
    stopping_ = true;
    server_.stop();
  }

  void wait_until_ready() const { server_.wait_until_ready(); }

  httplib::Server& server() { return server_; }

 private:
  using Handler = std::function<nlohmann::json(const httplib::Request&)>;

  static void reply(httplib::Response& res, int status, const nlohmann::json& body) {
    res.status = status;
    res.set_content(body.dump(), "application/json");
  }

  static nlohmann::json body_of(const httplib::Request& req) {
    if (req.body.empty()) return nlohmann::json::object();
    try {
      return nlohmann::json::parse(req.body);
    } catch (const nlohmann::json::parse_error& e) {
      throw ServiceError(ServiceError::Kind::bad_request, e.what());
    }
  }

  static httplib::Server::Handler wrap(Handler h, int ok = 200) {
    return [h = std::move(h), ok](const httplib::Request& req, httplib::Response& res) {
      try {
        reply(res, ok, h(req));
      } catch (const ServiceError& e) {
        reply(res, http_status(e.kind()), {{"error", to_string(e.kind())}, {"message", e.what()}});
      } catch (const std::exception& e) {
        reply(res, 500, {{"error", "Internal"}, {"message", e.what()}});
      }
    };
  }

  void routes() {
    server_.Post("/sessions", wrap(
                                  [this](const httplib::Request& req) {
                                    std::string id = sessions_.create(parse_session_request(body_of(req)));
                                    return sessions_.snapshot(id);
                                  },
                                  201));
    server_.Get(R"(/sessions/([^/]+))",
                wrap([this](const httplib::Request& req) { return sessions_.snapshot(req.matches[1]); }));
    server_.Post(R"(/sessions/([^/]+)/submit)", wrap([this](const httplib::Request& req) {
                   return sessions_.submit(req.matches[1], body_of(req));
                 }));
    server_.Post(R"(/sessions/([^/]+)/cancel)",
                 wrap([this](const httplib::Request& req) { return sessions_.cancel(req.matches[1]); }));
    server_.Get(R"(/sessions/([^/]+)/library)", wrap([this](const httplib::Request& req) {
                  return sessions_.library_view(req.matches[1], req.get_param_value("filter"));
                }));
    server_.Get(R"(/sessions/([^/]+)/recipes)",
                wrap([this](const httplib::Request& req) { return sessions_.recipes(req.matches[1]); }));
    server_.Get(R"(/sessions/([^/]+)/events)", [this](const httplib::Request& req, httplib::Response& res) {
      std::shared_ptr<const EventFeed> feed;
      std::uint64_t since = 0;
      try {
        feed = sessions_.events(req.matches[1]);
        if (req.has_param("since")) since = std::stoull(req.get_param_value("since"));
      } catch (const ServiceError& e) {
        reply(res, http_status(e.kind()), {{"error", to_string(e.kind())}, {"message", e.what()}});
        return;
      } catch (const std::logic_error& e) {
        reply(res, 400, {{"error", "BadRequest"}, {"message", "since must be a number"}});
        return;
      }
      auto cursor = std::make_shared<std::uint64_t>(since);
      res.set_header("Cache-Control", "no-cache");
      res.set_chunked_content_provider("text/event-stream", [this, feed, cursor](std::size_t, httplib::DataSink& sink) {
        auto batch = feed->since(*cursor, std::chrono::milliseconds(250));
        for (const SessionEvent& e : batch) {
          std::string chunk = format_sse(e);
          if (!sink.write(chunk.data(), chunk.size())) return false;
          *cursor = e.seq;
        }
        if ((batch.empty() && feed->closed()) || stopping_) {
          if (feed->since(*cursor).empty()) {
            sink.done();
            return true;
          }
        }
        return sink.is_writable();
      });
    });
  }

  SessionManager& sessions_;
  httplib::Server server_;
  std::atomic<bool> stopping_{false};
};

}  // namespace natprog
