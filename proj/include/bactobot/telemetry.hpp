#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include <json.hpp>

#include "bactobot/simulator.hpp"

namespace bactobot {

inline constexpr const char* kArtifactName = "bactobot-sim";

/// {"type":"state", t, position, attitude [w,x,y,z], lin_vel, ang_vel,
///  pair_duties, motor_speeds, heading} with keys in that order.
nlohmann::ordered_json frame_to_json(const TelemetryFrame& f);

/// Inverse of frame_to_json; extra keys are ignored. Throws ParameterError.
TelemetryFrame frame_from_json(const nlohmann::json& j);

nlohmann::ordered_json log_header(const ScenarioConfig& cfg);

/// Header line followed by one frame per line.
void write_log(std::ostream& out, const ScenarioConfig& cfg, const std::vector<TelemetryFrame>& frames);

struct TrajectoryLog {
  nlohmann::json header;
  std::vector<TelemetryFrame> frames;
};

TrajectoryLog read_log(std::istream& in);

/// Timeline sidecar: a header line, one line per applied change, and an
/// end record carrying the number of physics steps that were run.
struct Timeline {
  std::string config_hash;
  std::vector<TimelineEntry> entries;
  std::uint64_t steps = 0;
};

nlohmann::ordered_json timeline_header(const ScenarioConfig& cfg);
nlohmann::ordered_json timeline_entry_json(const TimelineEntry& e);
nlohmann::ordered_json timeline_end_json(std::uint64_t steps);
Timeline read_timeline(std::istream& in);

}  // namespace bactobot
