#pragma once

#include <atomic>
#include <chrono>
#include <condition_variable>
#include <cstdint>
#include <memory>
#include <mutex>
#include <optional>
#include <stdexcept>
#include <string>
#include <thread>
#include <variant>
#include <vector>

#include <json.hpp>

#include "bactobot/config.hpp"
#include "bactobot/simulator.hpp"

namespace bactobot {

class ServerError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

using ClientMessage = std::variant<ManeuverCommand, ModeSetting>;

/// Parses one client line: {"type":"cmd","surge":f,"yaw":f} or
/// {"type":"mode","value":"open_loop"|"heading_hold","setpoint_deg":f}.
/// Commands come back clamped. Throws ParameterError with a reply message.
ClientMessage parse_client_message(std::string_view text);

/// {"type":"err","msg":...}
std::string error_message(std::string_view msg);

/// Telemetry frame fields plus the applied (clamped) command and mode.
nlohmann::ordered_json state_message(const TelemetryFrame& frame, const ManeuverCommand& cmd,
                                     const ModeSetting& mode);

/// Single-slot, latest-wins mailbox between the network side and the
/// stepping thread.
class CommandMailbox {
 public:
  using Clock = std::chrono::steady_clock;

  void post_command(const ManeuverCommand& cmd);
  void post_mode(const ModeSetting& mode);
  /// Zero command that does not count as operator activity.
  void post_dead_man();

  struct Pending {
    std::optional<ManeuverCommand> command;
    std::optional<ModeSetting> mode;
  };
  Pending take();

  Clock::time_point last_activity() const;

 private:
  mutable std::mutex mutex_;
  Pending pending_;
  Clock::time_point last_activity_ = Clock::now();
};

struct ServeOptions {
  int port = 7700;                    // 0 picks an ephemeral port
  std::string bind_address = "127.0.0.1";
  double telemetry_rate_hz = 20.0;    // [1, 100]
  double command_timeout_s = 1.0;     // dead-man on silence; 0 disables
  std::string timeline_path;          // sidecar for replay; empty disables
  std::string log_path;               // full trajectory log; empty disables
};

/// Real-time simulation with a newline-delimited JSON command/telemetry
/// stream. Each connection is either a raw TCP stream or, if it opens with
/// an HTTP upgrade request, a WebSocket carrying the same messages as text
/// frames.
class TelemetryServer {
 public:
  /// Binds and listens; throws ServerError if the port is unavailable.
  TelemetryServer(ScenarioConfig cfg, ServeOptions opts);
  ~TelemetryServer();

  TelemetryServer(const TelemetryServer&) = delete;
  TelemetryServer& operator=(const TelemetryServer&) = delete;

  int port() const { return port_; }

  void start();
  void stop();
  /// Blocks until stop() or until `limit` of wall time has passed.
  void wait(std::optional<std::chrono::duration<double>> limit = std::nullopt);

  std::vector<TimelineEntry> timeline() const;
  std::uint64_t steps_run() const { return steps_run_.load(); }
  int client_count() const;

 private:
  struct Session;

  void accept_loop();
  void step_loop();
  void serve_session(std::shared_ptr<Session> s);
  void handle_line(Session& s, std::string_view line);
  void broadcast(const std::string& msg);
  void session_closed();
  void reap_sessions(bool all);

  ScenarioConfig cfg_;
  ServeOptions opts_;
  int listen_fd_ = -1;
  int port_ = 0;

  std::atomic<bool> running_{false};
  std::atomic<std::uint64_t> steps_run_{0};
  CommandMailbox mailbox_;

  mutable std::mutex sessions_mutex_;
  std::vector<std::shared_ptr<Session>> sessions_;
  int live_clients_ = 0;

  mutable std::mutex timeline_mutex_;
  std::vector<TimelineEntry> timeline_;

  std::mutex stop_mutex_;
  std::condition_variable stop_cv_;
  bool stopped_ = false;

  std::thread accept_thread_;
  std::thread step_thread_;
};

}  // namespace bactobot
