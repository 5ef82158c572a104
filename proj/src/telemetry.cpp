#include "bactobot/telemetry.hpp"

#include <istream>
#include <ostream>

#include "bactobot/errors.hpp"

namespace bactobot {

using nlohmann::json;
using nlohmann::ordered_json;

namespace {

ordered_json vec(const Eigen::Vector3d& v) { return ordered_json::array({v.x(), v.y(), v.z()}); }

template <std::size_t N>
ordered_json arr(const std::array<double, N>& a) {
  ordered_json out = ordered_json::array();
  for (double v : a) out.push_back(v);
  return out;
}

Eigen::Vector3d read_vec(const json& j, const char* key) {
  const auto& v = j.at(key);
  if (!v.is_array() || v.size() != 3) throw ParameterError(std::string(key) + ": expected 3 numbers");
  return {v[0].get<double>(), v[1].get<double>(), v[2].get<double>()};
}

template <std::size_t N>
std::array<double, N> read_arr(const json& j, const char* key) {
  const auto& v = j.at(key);
  if (!v.is_array() || v.size() != N) throw ParameterError(std::string(key) + ": wrong length");
  std::array<double, N> out{};
  for (std::size_t i = 0; i < N; ++i) out[i] = v[i].get<double>();
  return out;
}

}  // namespace

ordered_json frame_to_json(const TelemetryFrame& f) {
  ordered_json j;
  j["type"] = "state";
  j["t"] = f.t;
  j["position"] = vec(f.position);
  j["attitude"] = {f.attitude.w(), f.attitude.x(), f.attitude.y(), f.attitude.z()};
  j["lin_vel"] = vec(f.lin_vel);
  j["ang_vel"] = vec(f.ang_vel);
  j["pair_duties"] = arr(f.pair_duties);
  j["motor_speeds"] = arr(f.motor_speeds);
  j["heading"] = f.heading;
  return j;
}

TelemetryFrame frame_from_json(const json& j) {
  try {
    TelemetryFrame f;
    f.t = j.at("t").get<double>();
    f.position = read_vec(j, "position");
    const auto q = read_arr<4>(j, "attitude");
    f.attitude = Eigen::Quaterniond(q[0], q[1], q[2], q[3]);
    f.lin_vel = read_vec(j, "lin_vel");
    f.ang_vel = read_vec(j, "ang_vel");
    f.pair_duties = read_arr<kPairCount>(j, "pair_duties");
    f.motor_speeds = read_arr<kArmCount>(j, "motor_speeds");
    f.heading = j.at("heading").get<double>();
    if (j.contains("step")) f.step = j.at("step").get<std::uint64_t>();
    return f;
  } catch (const json::exception& e) {
    throw ParameterError(std::string("malformed telemetry frame: ") + e.what());
  }
}

ordered_json log_header(const ScenarioConfig& cfg) {
  ordered_json h;
  h["type"] = "header";
  h["artifact"] = kArtifactName;
  h["version"] = BACTOBOT_VERSION;
  h["config_hash"] = config_hash(cfg);
  h["dt_s"] = cfg.dt;
  h["log_decimation"] = cfg.log_decimation;
  return h;
}

void write_log(std::ostream& out, const ScenarioConfig& cfg, const std::vector<TelemetryFrame>& frames) {
  out << log_header(cfg).dump() << '\n';
  for (const auto& f : frames) out << frame_to_json(f).dump() << '\n';
}

TrajectoryLog read_log(std::istream& in) {
  TrajectoryLog log;
  std::string line;
  bool first = true;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const json j = json::parse(line);
    if (first) {
      if (j.value("type", "") != "header") throw ParameterError("log does not start with a header record");
      log.header = j;
      first = false;
      continue;
    }
    log.frames.push_back(frame_from_json(j));
  }
  if (first) throw ParameterError("empty log");
  return log;
}

ordered_json timeline_header(const ScenarioConfig& cfg) {
  ordered_json h;
  h["type"] = "timeline";
  h["artifact"] = kArtifactName;
  h["version"] = BACTOBOT_VERSION;
  h["config_hash"] = config_hash(cfg);
  h["dt_s"] = cfg.dt;
  return h;
}

ordered_json timeline_entry_json(const TimelineEntry& e) {
  ordered_json j;
  j["type"] = "apply";
  j["step"] = e.step;
  j["surge"] = e.command.surge;
  j["yaw"] = e.command.yaw;
  j["mode"] = mode_name(e.mode.mode);
  j["setpoint_deg"] = e.mode.setpoint_deg;
  return j;
}

ordered_json timeline_end_json(std::uint64_t steps) {
  ordered_json j;
  j["type"] = "end";
  j["steps"] = steps;
  return j;
}

Timeline read_timeline(std::istream& in) {
  Timeline t;
  std::string line;
  bool header = false;
  bool ended = false;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const json j = json::parse(line);
    const std::string type = j.value("type", "");
    if (type == "timeline") {
      t.config_hash = j.value("config_hash", "");
      header = true;
    } else if (type == "apply") {
      TimelineEntry e;
      e.step = j.at("step").get<std::uint64_t>();
      e.command = {j.at("surge").get<double>(), j.at("yaw").get<double>()};
      e.mode = {parse_mode_name(j.at("mode").get<std::string>()), j.at("setpoint_deg").get<double>()};
      if (!t.entries.empty() && e.step < t.entries.back().step) {
        throw ParameterError("timeline steps must be nondecreasing");
      }
      t.entries.push_back(e);
    } else if (type == "end") {
      t.steps = j.at("steps").get<std::uint64_t>();
      ended = true;
    } else {
      throw ParameterError("unknown timeline record type '" + type + "'");
    }
  }
  if (!header) throw ParameterError("timeline has no header record");
  if (!ended) {
    // Session was cut short: replay up to the last recorded change.
    t.steps = t.entries.empty() ? 0 : t.entries.back().step;
  }
  return t;
}

}  // namespace bactobot
