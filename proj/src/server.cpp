#include "bactobot/server.hpp"

#include <arpa/inet.h>
#include <netinet/in.h>
#include <netinet/tcp.h>
#include <poll.h>
#include <sys/socket.h>
#include <unistd.h>

#include <algorithm>
#include <cerrno>
#include <cmath>
#include <cstring>
#include <deque>
#include <fstream>

#include "bactobot/errors.hpp"
#include "bactobot/telemetry.hpp"
#include "websocket.hpp"

namespace bactobot {

using nlohmann::json;
using nlohmann::ordered_json;

// ---------------------------------------------------------------------------
// Messages

namespace {

double finite_number(const json& j, const char* key) {
  auto it = j.find(key);
  if (it == j.end()) throw ParameterError(std::string("missing field '") + key + "'");
  if (!it->is_number()) throw ParameterError(std::string("field '") + key + "' must be a number");
  const double v = it->get<double>();
  if (!std::isfinite(v)) throw ParameterError(std::string("field '") + key + "' must be finite");
  return v;
}

}  // namespace

ClientMessage parse_client_message(std::string_view text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error&) {
    throw ParameterError("malformed JSON");
  }
  if (!j.is_object()) throw ParameterError("message must be a JSON object");
  auto type = j.find("type");
  if (type == j.end() || !type->is_string()) throw ParameterError("missing string field 'type'");

  if (*type == "cmd") {
    return ManeuverCommand{finite_number(j, "surge"), finite_number(j, "yaw")}.clamped();
  }
  if (*type == "mode") {
    auto value = j.find("value");
    if (value == j.end() || !value->is_string()) throw ParameterError("missing string field 'value'");
    ModeSetting m;
    m.mode = parse_mode_name(value->get<std::string>());
    if (m.mode == AutopilotMode::kHeadingHold || j.contains("setpoint_deg")) {
      m.setpoint_deg = finite_number(j, "setpoint_deg");
    }
    return m;
  }
  throw ParameterError("unknown message type '" + type->get<std::string>() + "'");
}

std::string error_message(std::string_view msg) {
  ordered_json j;
  j["type"] = "err";
  j["msg"] = msg;
  return j.dump();
}

ordered_json state_message(const TelemetryFrame& frame, const ManeuverCommand& cmd, const ModeSetting& mode) {
  ordered_json j = frame_to_json(frame);
  j["step"] = frame.step;
  j["cmd"] = {cmd.surge, cmd.yaw};
  j["mode"] = mode_name(mode.mode);
  j["setpoint_deg"] = mode.setpoint_deg;
  return j;
}

// ---------------------------------------------------------------------------
// Mailbox

void CommandMailbox::post_command(const ManeuverCommand& cmd) {
  std::lock_guard lock(mutex_);
  pending_.command = cmd;
  last_activity_ = Clock::now();
}

void CommandMailbox::post_mode(const ModeSetting& mode) {
  std::lock_guard lock(mutex_);
  pending_.mode = mode;
  last_activity_ = Clock::now();
}

void CommandMailbox::post_dead_man() {
  std::lock_guard lock(mutex_);
  pending_.command = ManeuverCommand{};
}

CommandMailbox::Pending CommandMailbox::take() {
  std::lock_guard lock(mutex_);
  return std::exchange(pending_, Pending{});
}

CommandMailbox::Clock::time_point CommandMailbox::last_activity() const {
  std::lock_guard lock(mutex_);
  return last_activity_;
}

// ---------------------------------------------------------------------------
// Sessions

struct TelemetryServer::Session {
  static constexpr std::size_t kMaxQueued = 64;

  int fd = -1;
  bool websocket = false;
  std::thread reader;
  std::thread writer;
  std::atomic<bool> done{false};
  std::atomic<bool> ready{false};  // transport decided; safe to frame messages

  std::mutex mutex;
  std::condition_variable cv;
  std::deque<std::string> outbox;
  bool closed = false;

  // Queues one protocol message, framed for this connection's transport.
  // Slow consumers lose the oldest queued messages; the stepping thread
  // never waits on a socket.
  void push(std::string_view msg) {
    push_raw(websocket ? ws::encode_frame(ws::Opcode::kText, msg) : std::string(msg) + "\n");
  }

  void push_raw(std::string bytes) {
    {
      std::lock_guard lock(mutex);
      if (closed) return;
      if (outbox.size() >= kMaxQueued) outbox.pop_front();
      outbox.push_back(std::move(bytes));
    }
    cv.notify_one();
  }

  void close() {
    {
      std::lock_guard lock(mutex);
      closed = true;
    }
    cv.notify_all();
    ::shutdown(fd, SHUT_RDWR);
  }
};

namespace {

bool send_all(int fd, std::string_view data) {
  while (!data.empty()) {
    const ssize_t n = ::send(fd, data.data(), data.size(), MSG_NOSIGNAL);
    if (n < 0) {
      if (errno == EINTR) continue;
      return false;
    }
    data.remove_prefix(static_cast<std::size_t>(n));
  }
  return true;
}

std::string header_value(const std::string& headers, std::string_view name) {
  std::string lower = headers;
  std::transform(lower.begin(), lower.end(), lower.begin(), [](unsigned char c) { return std::tolower(c); });
  std::string key = "\r\n" + std::string(name) + ":";
  std::transform(key.begin(), key.end(), key.begin(), [](unsigned char c) { return std::tolower(c); });
  const auto pos = lower.find(key);
  if (pos == std::string::npos) return {};
  const auto start = pos + key.size();
  const auto end = headers.find("\r\n", start);
  std::string value = headers.substr(start, end - start);
  const auto first = value.find_first_not_of(" \t");
  const auto last = value.find_last_not_of(" \t");
  return first == std::string::npos ? std::string{} : value.substr(first, last - first + 1);
}

constexpr std::size_t kMaxLine = 64 * 1024;
constexpr int kSniffMs = 200;

}  // namespace

// ---------------------------------------------------------------------------
// Server

TelemetryServer::TelemetryServer(ScenarioConfig cfg, ServeOptions opts)
    : cfg_(std::move(cfg)), opts_(std::move(opts)) {
  cfg_.validate();
  if (!(opts_.telemetry_rate_hz >= 1.0 && opts_.telemetry_rate_hz <= 100.0)) {
    throw ServerError("telemetry rate must lie in [1, 100] Hz");
  }
  if (opts_.port < 0 || opts_.port > 65535) throw ServerError("port out of range");

  listen_fd_ = ::socket(AF_INET, SOCK_STREAM, 0);
  if (listen_fd_ < 0) throw ServerError(std::string("socket: ") + std::strerror(errno));
  const int one = 1;
  ::setsockopt(listen_fd_, SOL_SOCKET, SO_REUSEADDR, &one, sizeof one);

  sockaddr_in addr{};
  addr.sin_family = AF_INET;
  addr.sin_port = htons(static_cast<std::uint16_t>(opts_.port));
  if (::inet_pton(AF_INET, opts_.bind_address.c_str(), &addr.sin_addr) != 1) {
    ::close(listen_fd_);
    throw ServerError("invalid bind address '" + opts_.bind_address + "'");
  }
  if (::bind(listen_fd_, reinterpret_cast<sockaddr*>(&addr), sizeof addr) < 0 || ::listen(listen_fd_, 16) < 0) {
    const std::string why = std::strerror(errno);
    ::close(listen_fd_);
    throw ServerError("cannot listen on port " + std::to_string(opts_.port) + ": " + why);
  }
  socklen_t len = sizeof addr;
  ::getsockname(listen_fd_, reinterpret_cast<sockaddr*>(&addr), &len);
  port_ = ntohs(addr.sin_port);
}

TelemetryServer::~TelemetryServer() {
  stop();
  if (listen_fd_ >= 0) ::close(listen_fd_);
}

void TelemetryServer::start() {
  if (step_thread_.joinable() || running_.exchange(true)) return;
  step_thread_ = std::thread([this] { step_loop(); });
  accept_thread_ = std::thread([this] { accept_loop(); });
}

void TelemetryServer::stop() {
  running_ = false;
  if (accept_thread_.joinable()) accept_thread_.join();
  if (step_thread_.joinable()) step_thread_.join();
  reap_sessions(true);
  {
    std::lock_guard lock(stop_mutex_);
    stopped_ = true;
  }
  stop_cv_.notify_all();
}

void TelemetryServer::wait(std::optional<std::chrono::duration<double>> limit) {
  std::unique_lock lock(stop_mutex_);
  if (limit) {
    stop_cv_.wait_for(lock, *limit, [&] { return stopped_; });
  } else {
    stop_cv_.wait(lock, [&] { return stopped_; });
  }
}

std::vector<TimelineEntry> TelemetryServer::timeline() const {
  std::lock_guard lock(timeline_mutex_);
  return timeline_;
}

int TelemetryServer::client_count() const {
  std::lock_guard lock(sessions_mutex_);
  return live_clients_;
}

void TelemetryServer::accept_loop() {
  while (running_) {
    pollfd pfd{listen_fd_, POLLIN, 0};
    const int ready = ::poll(&pfd, 1, 100);
    reap_sessions(false);
    if (ready <= 0 || !(pfd.revents & POLLIN)) continue;

    const int fd = ::accept(listen_fd_, nullptr, nullptr);
    if (fd < 0) continue;
    const int one = 1;
    ::setsockopt(fd, IPPROTO_TCP, TCP_NODELAY, &one, sizeof one);

    auto session = std::make_shared<Session>();
    session->fd = fd;
    {
      std::lock_guard lock(sessions_mutex_);
      sessions_.push_back(session);
      ++live_clients_;
    }
    session->reader = std::thread([this, session] { serve_session(session); });
  }
}

void TelemetryServer::reap_sessions(bool all) {
  std::vector<std::shared_ptr<Session>> finished;
  {
    std::lock_guard lock(sessions_mutex_);
    auto split = std::stable_partition(sessions_.begin(), sessions_.end(),
                                       [&](const auto& s) { return !(all || s->done.load()); });
    finished.assign(split, sessions_.end());
    sessions_.erase(split, sessions_.end());
  }
  for (auto& s : finished) {
    s->close();
    if (s->reader.joinable()) s->reader.join();
    ::close(s->fd);
  }
}

void TelemetryServer::session_closed() {
  bool last = false;
  {
    std::lock_guard lock(sessions_mutex_);
    last = --live_clients_ == 0;
  }
  if (last) mailbox_.post_dead_man();
}

void TelemetryServer::serve_session(std::shared_ptr<Session> s) {
  std::string buffer;
  char chunk[4096];

  auto receive = [&]() -> bool {
    const ssize_t n = ::recv(s->fd, chunk, sizeof chunk, 0);
    if (n <= 0) return false;
    buffer.append(chunk, static_cast<std::size_t>(n));
    return true;
  };

  // Sniff for an HTTP upgrade; anything else is the raw line protocol. A
  // client that stays silent is a plain observer.
  bool alive = true;
  pollfd pfd{s->fd, POLLIN, 0};
  if (::poll(&pfd, 1, kSniffMs) > 0) alive = receive();
  while (alive && !buffer.empty() && buffer.size() < 4 && std::string_view("GET ").starts_with(buffer)) alive = receive();
  if (alive && buffer.starts_with("GET ")) {
    while (alive && buffer.find("\r\n\r\n") == std::string::npos && buffer.size() < kMaxLine) alive = receive();
    const auto end = buffer.find("\r\n\r\n");
    const std::string headers = end == std::string::npos ? buffer : buffer.substr(0, end + 2);
    const std::string key = header_value(headers, "Sec-WebSocket-Key");
    std::string upgrade = header_value(headers, "Upgrade");
    std::transform(upgrade.begin(), upgrade.end(), upgrade.begin(), [](unsigned char c) { return std::tolower(c); });
    if (!alive || end == std::string::npos || key.empty() || upgrade != "websocket") {
      send_all(s->fd, "HTTP/1.1 400 Bad Request\r\nContent-Length: 0\r\nConnection: close\r\n\r\n");
      alive = false;
    } else {
      const std::string response =
          "HTTP/1.1 101 Switching Protocols\r\nUpgrade: websocket\r\nConnection: Upgrade\r\n"
          "Sec-WebSocket-Accept: " + ws::accept_key(key) + "\r\n\r\n";
      alive = send_all(s->fd, response);
      buffer.erase(0, end + 4);
      s->websocket = true;
    }
  }

  if (alive) {
    s->ready = true;
    s->writer = std::thread([s] {
      while (true) {
        std::string msg;
        {
          std::unique_lock lock(s->mutex);
          s->cv.wait(lock, [&] { return s->closed || !s->outbox.empty(); });
          if (s->closed) return;
          msg = std::move(s->outbox.front());
          s->outbox.pop_front();
        }
        if (!send_all(s->fd, msg)) return;
      }
    });
  }

  if (alive && s->websocket) {
    ws::Decoder decoder;
    decoder.feed(buffer);
    try {
      while (alive) {
        while (auto msg = decoder.next()) {
          if (msg->opcode == ws::Opcode::kClose) {
            alive = false;
            break;
          }
          if (msg->opcode == ws::Opcode::kPing) {
            s->push_raw(ws::encode_frame(ws::Opcode::kPong, msg->payload));
            continue;
          }
          if (msg->opcode == ws::Opcode::kText) handle_line(*s, msg->payload);
        }
        if (!alive) break;
        buffer.clear();
        alive = receive();
        if (alive) decoder.feed(buffer);
      }
    } catch (const std::runtime_error& e) {
      s->push(error_message(e.what()));
    }
  } else if (alive) {
    while (alive) {
      std::size_t pos;
      while ((pos = buffer.find('\n')) != std::string::npos) {
        std::string line = buffer.substr(0, pos);
        buffer.erase(0, pos + 1);
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (!line.empty()) handle_line(*s, line);
      }
      if (buffer.size() > kMaxLine) {
        s->push(error_message("line too long"));
        buffer.clear();
      }
      alive = receive();
    }
  }

  {
    std::lock_guard lock(s->mutex);
    s->closed = true;
  }
  s->cv.notify_all();
  if (s->writer.joinable()) s->writer.join();
  if (s->websocket) send_all(s->fd, ws::encode_frame(ws::Opcode::kClose, {}));
  ::shutdown(s->fd, SHUT_RDWR);
  session_closed();
  s->done = true;
}

void TelemetryServer::handle_line(Session& s, std::string_view line) {
  try {
    const ClientMessage msg = parse_client_message(line);
    if (const auto* cmd = std::get_if<ManeuverCommand>(&msg)) {
      mailbox_.post_command(*cmd);
    } else {
      mailbox_.post_mode(std::get<ModeSetting>(msg));
    }
  } catch (const ParameterError& e) {
    s.push(error_message(e.what()));
  }
}

void TelemetryServer::broadcast(const std::string& msg) {
  std::lock_guard lock(sessions_mutex_);
  for (auto& s : sessions_) {
    if (s->ready && !s->done) s->push(msg);
  }
}

void TelemetryServer::step_loop() {
  using Clock = std::chrono::steady_clock;
  Simulator sim(cfg_);
  const double dt = cfg_.dt;
  const std::uint64_t telemetry_every =
      std::max<std::uint64_t>(1, static_cast<std::uint64_t>(std::llround(1.0 / (opts_.telemetry_rate_hz * dt))));
  constexpr std::uint64_t kMaxCatchUp = 250;

  std::ofstream timeline_out;
  if (!opts_.timeline_path.empty()) {
    timeline_out.open(opts_.timeline_path);
    timeline_out << timeline_header(cfg_).dump() << '\n' << std::flush;
  }
  std::ofstream log_out;
  if (!opts_.log_path.empty()) {
    log_out.open(opts_.log_path);
    log_out << log_header(cfg_).dump() << '\n';
  }

  auto record = [&](const TimelineEntry& e) {
    {
      std::lock_guard lock(timeline_mutex_);
      timeline_.push_back(e);
    }
    if (timeline_out) timeline_out << timeline_entry_json(e).dump() << '\n' << std::flush;
  };

  record({0, sim.command(), sim.mode()});
  broadcast(state_message(sim.frame(), sim.command(), sim.mode()).dump());
  if (log_out) log_out << frame_to_json(sim.frame()).dump() << '\n';

  // Pacing anchor: the wall time at which sim step 0 began.
  auto anchor = Clock::now();
  std::uint64_t done = 0;

  try {
    while (running_) {
      const auto now = Clock::now();
      if (opts_.command_timeout_s > 0.0 &&
          now - mailbox_.last_activity() > std::chrono::duration<double>(opts_.command_timeout_s) &&
          !(sim.command() == ManeuverCommand{})) {
        mailbox_.post_dead_man();
      }

      auto target = static_cast<std::uint64_t>(std::chrono::duration<double>(now - anchor).count() / dt);
      if (target > done + kMaxCatchUp) {
        // Fell behind (debugger, overloaded host): slip the anchor instead of
        // bursting through a long backlog.
        anchor = now - std::chrono::duration_cast<Clock::duration>(std::chrono::duration<double>(done * dt));
        target = done + 1;
      }

      while (done < target && running_) {
        auto pending = mailbox_.take();
        if (pending.command || pending.mode) {
          const ManeuverCommand cmd = pending.command.value_or(sim.command());
          const ModeSetting mode = pending.mode.value_or(sim.mode());
          if (!(cmd == sim.command()) || !(mode == sim.mode())) {
            sim.set_command(cmd);
            sim.set_mode(mode);
            record({sim.step_index(), sim.command(), sim.mode()});
          }
        }
        sim.step();
        ++done;
        steps_run_ = done;

        const TelemetryFrame frame = sim.frame();
        if (frame.step % telemetry_every == 0) {
          broadcast(state_message(frame, sim.command(), sim.mode()).dump());
        }
        if (log_out && frame.step % static_cast<std::uint64_t>(cfg_.log_decimation) == 0) {
          log_out << frame_to_json(frame).dump() << '\n';
        }
      }
      std::this_thread::sleep_until(anchor + std::chrono::duration_cast<Clock::duration>(
                                                 std::chrono::duration<double>((done + 1) * dt)));
    }
  } catch (const NumericalError& e) {
    broadcast(error_message(e.what()));
    running_ = false;
  }

  if (timeline_out) timeline_out << timeline_end_json(sim.step_index()).dump() << '\n' << std::flush;
  {
    std::lock_guard lock(stop_mutex_);
    stopped_ = true;
  }
  stop_cv_.notify_all();
}

}  // namespace bactobot
