#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <sstream>

#include <json.hpp>

#include "bactobot/config.hpp"
#include "bactobot/errors.hpp"
#include "bactobot/simulator.hpp"
#include "bactobot/telemetry.hpp"

using namespace bactobot;
using nlohmann::json;

namespace {

std::string config_error_field(const std::string& text) {
  try {
    parse_config(json::parse(text)).validate();
  } catch (const ConfigError& e) {
    return e.field();
  }
  return "<no error>";
}

ScenarioConfig short_config(double duration = 2.0) {
  ScenarioConfig cfg;
  cfg.duration = duration;
  cfg.command_script = {{0.0, 0.6, 0.0}, {0.8, 0.2, -0.4}, {1.5, 0.0, 0.3}};
  return cfg;
}

std::string log_bytes(const ScenarioConfig& cfg) {
  std::ostringstream out;
  write_log(out, cfg, run_scenario(cfg));
  return out.str();
}

}  // namespace

TEST(Config, DefaultsAreValid) {
  const ScenarioConfig cfg = parse_config(json::object());
  EXPECT_NO_THROW(cfg.validate());
  EXPECT_EQ(cfg.step_count(), 60000u);
  EXPECT_NEAR(cfg.allocation_omega_ref(), 0.7 * 31.4, 1e-12);
  EXPECT_NEAR(cfg.robot.total_mass(), 11.25, 1e-12);
  EXPECT_NEAR(cfg.robot.displaced_volume, 11.25 / 998.0, 1e-15);
}

TEST(Config, ErrorsNameTheField) {
  EXPECT_EQ(config_error_field(R"({"dt_s": 0.5})"), "dt_s");
  EXPECT_EQ(config_error_field(R"({"dt_s": "fast"})"), "dt_s");
  EXPECT_EQ(config_error_field(R"({"duration_s": -1})"), "duration_s");
  EXPECT_EQ(config_error_field(R"({"log_decimation": 0})"), "log_decimation");
  EXPECT_EQ(config_error_field(R"({"motors": {"omega_max_rad_s": -3}})"), "motors");
  EXPECT_EQ(config_error_field(R"({"motors": {"omega_max": 3}})"), "motors.omega_max");
  EXPECT_EQ(config_error_field(R"({"robot": {"added_mass": {"surge_kg": "heavy"}}})"), "robot.added_mass.surge_kg");
  EXPECT_EQ(config_error_field(R"({"thrust_model": {"type": "jet"}})"), "thrust_model.type");
  EXPECT_EQ(config_error_field(R"({"mode": {"type": "heading_hold", "setpoint_deg": null}})"), "mode.setpoint_deg");
  EXPECT_EQ(config_error_field(R"({"command_script": [{"t_start_s": 1, "surge": 0, "yaw": 0},
                                                      {"t_start_s": 0.5, "surge": 0, "yaw": 0}]})"),
            "command_script[1].t_start_s");
  EXPECT_EQ(config_error_field(R"({"command_script": [{"t_start_s": 0, "surge": 2, "yaw": 0}]})"),
            "command_script[0].surge");
  EXPECT_EQ(config_error_field(R"({"ballast_inventory": [{"mass_kg": 0.5, "count": -1}]})"), "ballast_inventory");
  EXPECT_EQ(config_error_field(R"({"frame": {"torque_pairs": [9]}})"), "frame");
  EXPECT_EQ(config_error_field(R"({"bogus": 1})"), "bogus");
}

TEST(Config, RoundTripsThroughJson) {
  ScenarioConfig cfg = short_config();
  cfg.thrust_model = LumpedQuadratic{2e-4, 3e-5, 18.0};
  cfg.mode = {AutopilotMode::kHeadingHold, -45.0};
  cfg.initial_state.position = {1.0, -2.0, 0.5};
  cfg.ballast_inventory = {{{0.25, 3}, {2.0, 1}}};
  const ScenarioConfig back = parse_config(to_json(cfg));
  EXPECT_EQ(to_json(back).dump(), to_json(cfg).dump());
  EXPECT_EQ(config_hash(back), config_hash(cfg));
  ScenarioConfig other = cfg;
  other.dt = 2e-3;
  EXPECT_NE(config_hash(other), config_hash(cfg));
  EXPECT_EQ(config_hash(cfg).size(), 16u);

  // Attitude is stored as roll/pitch/yaw degrees, so it survives only to roundoff.
  cfg.initial_state.attitude = from_roll_pitch_yaw(0.1, -0.05, 0.7);
  const ScenarioConfig tilted = parse_config(to_json(cfg));
  EXPECT_TRUE(tilted.initial_state.attitude.isApprox(cfg.initial_state.attitude, 1e-14));
}

TEST(Config, ShippedConfigsLoad) {
  const std::filesystem::path dir = std::filesystem::path(BACTOBOT_SOURCE_DIR) / "configs";
  int n = 0;
  for (const auto& entry : std::filesystem::directory_iterator(dir)) {
    if (entry.path().extension() != ".json") continue;
    EXPECT_NO_THROW(load_config(entry.path()).validate()) << entry.path();
    ++n;
  }
  EXPECT_GE(n, 1);
}

TEST(Config, ModeNames) {
  EXPECT_EQ(parse_mode_name("open_loop"), AutopilotMode::kOpenLoop);
  EXPECT_EQ(parse_mode_name("heading_hold"), AutopilotMode::kHeadingHold);
  EXPECT_THROW(parse_mode_name("autopilot"), ParameterError);
  EXPECT_STREQ(mode_name(AutopilotMode::kHeadingHold), "heading_hold");
}

TEST(Runtime, ByteIdenticalLogs) {
  ScenarioConfig cfg = short_config();
  cfg.mode = {AutopilotMode::kHeadingHold, 20.0};
  const std::string a = log_bytes(cfg);
  const std::string b = log_bytes(cfg);
  EXPECT_EQ(a, b);
  EXPECT_GT(a.size(), 1000u);
}

TEST(Runtime, TimestampsAdvanceByDecimatedStep) {
  ScenarioConfig cfg = short_config();
  cfg.log_decimation = 7;
  const auto frames = run_scenario(cfg);
  ASSERT_EQ(frames.size(), cfg.step_count() / 7 + 1);
  for (std::size_t i = 1; i < frames.size(); ++i) {
    EXPECT_GT(frames[i].t, frames[i - 1].t);
    EXPECT_NEAR(frames[i].t - frames[i - 1].t, cfg.dt * 7, 1e-12);
    EXPECT_EQ(frames[i].step, frames[i - 1].step + 7);
  }
}

TEST(Runtime, ScriptIsStepHold) {
  ScenarioConfig cfg = short_config();
  cfg.log_decimation = 1;
  Simulator sim(cfg);
  const auto frames = run_scenario(cfg);
  const AllocationTable& table = sim.allocation();
  auto duties_at = [&](double t) { return frames[static_cast<std::size_t>(std::lround(t / cfg.dt))].pair_duties; };
  // Frame n shows the duties applied during step n-1.
  EXPECT_EQ(duties_at(0.5), mix({0.6, 0.0}, table).values());
  EXPECT_EQ(duties_at(0.801), mix({0.2, -0.4}, table).values());
  EXPECT_EQ(duties_at(1.9), mix({0.0, 0.3}, table).values());
}

TEST(Runtime, FrameFieldsAndAttitudeNorm) {
  const auto frames = run_scenario(short_config());
  for (const auto& f : frames) {
    EXPECT_NEAR(f.attitude.norm(), 1.0, 1e-12);
    EXPECT_NEAR(f.heading, heading_of(f.attitude), 0.0);
    for (double w : f.motor_speeds) EXPECT_LE(std::abs(w), 31.4 + 1e-9);
  }
}

TEST(Runtime, NonFiniteStateAborts) {
  ScenarioConfig cfg = short_config();
  cfg.initial_state.lin_vel = {1e200, 0.0, 0.0};
  try {
    run_scenario(cfg);
    FAIL() << "expected NumericalError";
  } catch (const NumericalError& e) {
    EXPECT_EQ(e.step(), 0u);
  }
}

TEST(Telemetry, LogRoundTrip) {
  const ScenarioConfig cfg = short_config();
  const auto frames = run_scenario(cfg);
  std::stringstream buf;
  write_log(buf, cfg, frames);
  const TrajectoryLog log = read_log(buf);
  EXPECT_EQ(log.header.at("config_hash"), config_hash(cfg));
  EXPECT_EQ(log.header.at("artifact"), "bactobot-sim");
  ASSERT_EQ(log.frames.size(), frames.size());
  for (std::size_t i = 0; i < frames.size(); ++i) {
    EXPECT_EQ(log.frames[i].position, frames[i].position);
    EXPECT_EQ(log.frames[i].attitude.coeffs(), frames[i].attitude.coeffs());
    EXPECT_EQ(log.frames[i].motor_speeds, frames[i].motor_speeds);
  }
}

TEST(Telemetry, FieldOrder) {
  const std::string line = frame_to_json(TelemetryFrame{}).dump();
  const std::vector<std::string> keys{"\"type\"", "\"t\"", "\"position\"", "\"attitude\"", "\"lin_vel\"",
                                      "\"ang_vel\"", "\"pair_duties\"", "\"motor_speeds\"", "\"heading\""};
  std::size_t pos = 0;
  for (const auto& k : keys) {
    const std::size_t at = line.find(k, pos);
    ASSERT_NE(at, std::string::npos) << k;
    pos = at;
  }
}

TEST(Telemetry, TimelineRoundTrip) {
  const ScenarioConfig cfg = short_config();
  std::stringstream buf;
  buf << timeline_header(cfg).dump() << "\n";
  buf << timeline_entry_json({0, {0.0, 0.0}, {}}).dump() << "\n";
  buf << timeline_entry_json({120, {0.5, -0.25}, {}}).dump() << "\n";
  buf << timeline_entry_json({300, {0.5, -0.25}, {AutopilotMode::kHeadingHold, 15.0}}).dump() << "\n";
  buf << timeline_end_json(900).dump() << "\n";
  const Timeline t = read_timeline(buf);
  EXPECT_EQ(t.config_hash, config_hash(cfg));
  EXPECT_EQ(t.steps, 900u);
  ASSERT_EQ(t.entries.size(), 3u);
  EXPECT_EQ(t.entries[1].step, 120u);
  EXPECT_EQ(t.entries[1].command, (ManeuverCommand{0.5, -0.25}));
  EXPECT_EQ(t.entries[2].mode, (ModeSetting{AutopilotMode::kHeadingHold, 15.0}));
}

TEST(Replay, TimelineReproducesScript) {
  // A script expressed as a timeline replays bit-for-bit.
  ScenarioConfig cfg = short_config();
  const auto scripted = run_scenario(cfg);
  std::vector<TimelineEntry> timeline;
  for (const auto& e : cfg.command_script) {
    timeline.push_back({static_cast<std::uint64_t>(std::lround(e.t_start / cfg.dt)), {e.surge, e.yaw}, cfg.mode});
  }
  const auto replayed = replay_timeline(cfg, timeline, cfg.step_count(), cfg.log_decimation);
  ASSERT_EQ(replayed.size(), scripted.size());
  for (std::size_t i = 0; i < scripted.size(); ++i) {
    EXPECT_EQ(replayed[i].position, scripted[i].position);
    EXPECT_EQ(replayed[i].attitude.coeffs(), scripted[i].attitude.coeffs());
  }
}

TEST(Simulator, ModeChangeResetsPid) {
  ScenarioConfig cfg = short_config();
  cfg.mode = {AutopilotMode::kHeadingHold, 2.0};
  Simulator sim(cfg);
  for (int i = 0; i < 100; ++i) sim.step();
  EXPECT_NE(sim.pid().integral, 0.0);
  sim.set_mode({AutopilotMode::kHeadingHold, 2.0});
  EXPECT_NE(sim.pid().integral, 0.0);
  sim.set_mode({AutopilotMode::kHeadingHold, 10.0});
  EXPECT_EQ(sim.pid().integral, 0.0);
}

TEST(Simulator, RejectsInvalidConfig) {
  ScenarioConfig cfg;
  cfg.dt = 0.0;
  EXPECT_THROW(Simulator{cfg}, ConfigError);
}
