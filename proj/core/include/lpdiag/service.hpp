#pragma once

#include <chrono>
#include <map>
#include <memory>
#include <mutex>
#include <shared_mutex>
#include <string>
#include <string_view>
#include <thread>

#include "lpdiag/diagnosis.hpp"

namespace httplib {
class Server;
}

namespace lpdiag {

struct SessionHandle {
  std::string id;
  TreeKind kind = TreeKind::kIncorrectness;
  std::chrono::system_clock::time_point created;
  std::string program_fingerprint;
  /// Empty without a spec.
  std::string spec_fingerprint;
};

/// HTTP status plus a JSON body.
struct ServiceResponse {
  int status = 200;
  std::string body;
};

/// In-memory diagnosis sessions behind a JSON request/response protocol.
/// Requests on one session are serialized; tree reads return the snapshot
/// taken after the last completed mutation.
class SessionService {
 public:
  SessionService() = default;
  SessionService(const SessionService&) = delete;
  SessionService& operator=(const SessionService&) = delete;

  /// Routes one request. Never throws: errors become 4xx/5xx responses with
  /// an {error, detail, position?} body.
  ServiceResponse handle(std::string_view method, std::string_view path,
                         const std::map<std::string, std::string>& params, std::string_view body);

  /// Writes the session snapshot to `path`. Throws Error(kUnknownNode) for an
  /// unknown id.
  void save_snapshot(const std::string& id, const std::string& path) const;
  std::size_t session_count() const;

 private:
  struct Entry {
    SessionHandle handle;
    mutable std::mutex write;
    std::unique_ptr<DiagnosisSession> session;
    mutable std::mutex snap_mutex;
    std::shared_ptr<const std::string> snapshot;

    void refresh();
    std::shared_ptr<const std::string> current() const;
  };

  std::shared_ptr<Entry> find(const std::string& id) const;
  ServiceResponse create(std::string_view body);
  ServiceResponse route_session(std::string_view method, const std::vector<std::string>& parts,
                                const std::map<std::string, std::string>& params, std::string_view body);

  mutable std::shared_mutex map_mutex_;
  std::map<std::string, std::shared_ptr<Entry>> sessions_;
  std::uint64_t next_id_ = 1;
};

/// Serves a SessionService over HTTP on a background thread.
class HttpServer {
 public:
  explicit HttpServer(SessionService& service);
  ~HttpServer();
  HttpServer(const HttpServer&) = delete;
  HttpServer& operator=(const HttpServer&) = delete;

  /// Binds; port 0 picks a free port. Returns the bound port. Throws
  /// Error(kInvalidArgument) when binding fails.
  int bind(const std::string& host, int port);
  /// Serves until stop(); blocks.
  void listen();
  /// Serves on a background thread.
  void start();
  void stop();

 private:
  SessionService& service_;
  std::unique_ptr<httplib::Server> server_;
  std::thread thread_;
};

}  // namespace lpdiag
