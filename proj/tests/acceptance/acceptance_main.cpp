// Acceptance gate: one line per criterion, nonzero exit if any fails.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <numbers>
#include <random>
#include <sstream>
#include <string>
#include <thread>

#include <json.hpp>

#include "bactobot/ballast.hpp"
#include "bactobot/config.hpp"
#include "bactobot/mixer.hpp"
#include "bactobot/server.hpp"
#include "bactobot/simulator.hpp"
#include "bactobot/telemetry.hpp"
#include "oracles.hpp"
#include "test_client.hpp"

using namespace bactobot;
using namespace std::chrono_literals;
using nlohmann::json;

namespace {

constexpr double kDeg = std::numbers::pi / 180.0;

int g_failures = 0;

void report(int id, bool pass, const std::string& title, const std::string& detail) {
  std::printf("%s  criterion %2d  %-28s %s\n", pass ? "PASS" : "FAIL", id, title.c_str(), detail.c_str());
  std::fflush(stdout);
  if (!pass) ++g_failures;
}

template <typename... Args>
std::string fmt(const char* f, Args... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

// Heading unwrapped across the log so turns past +-180 deg keep accumulating.
std::vector<double> unwrapped_heading(const std::vector<TelemetryFrame>& frames) {
  std::vector<double> out;
  double acc = 0.0;
  for (std::size_t i = 0; i < frames.size(); ++i) {
    if (i > 0) acc += wrap_to_pi(frames[i].heading - frames[i - 1].heading);
    out.push_back(acc + (frames.empty() ? 0.0 : frames[0].heading));
  }
  return out;
}

ScenarioConfig scripted(double duration, double surge, double yaw) {
  ScenarioConfig cfg;
  cfg.duration = duration;
  cfg.command_script = {{0.0, surge, yaw}};
  return cfg;
}

void criterion_1() {
  const double rho = 998.0;
  const double total = 11.25;
  ScenarioConfig cfg;
  const double v = cfg.robot.displaced_volume;
  const double v_rel = std::abs(v - total / rho) / (total / rho);
  const double ballast_needed = neutral_ballast_mass(rho, v, cfg.robot.dry_mass);
  const TrimSelection trim = trim_select(ballast_needed, cfg.ballast_inventory);
  cfg.robot.ballast_mass = trim.total;
  cfg.duration = 60.0;

  const auto t0 = std::chrono::steady_clock::now();
  const auto frames = run_scenario(cfg);
  const double runtime = seconds_since(t0);
  double drift = 0.0;
  for (const auto& f : frames) drift = std::max(drift, std::abs(f.position.z() - frames[0].position.z()));

  const bool pass = v_rel <= 1e-12 && trim.error < 1e-12 && drift < 0.05 && runtime < 5.0;
  report(1, pass, "ballast / neutral hold",
         fmt("V=%.9f m^3 (rel err %.1e), trim %zu pieces=%.3f kg, max |depth drift|=%.2e m, runtime %.2f s", v,
             v_rel, trim.weights.size(), trim.total, drift, runtime));
}

void criterion_2() {
  const ScenarioConfig cfg = scripted(30.0, 0.8, 0.0);
  const auto t0 = std::chrono::steady_clock::now();
  const auto frames = run_scenario(cfg);
  const double runtime = seconds_since(t0);
  const Eigen::Vector3d initial_heading = frames[0].attitude * Eigen::Vector3d::UnitX();
  const Eigen::Vector3d d = frames.back().position - frames[0].position;
  const double forward = d.dot(initial_heading);
  const double lateral = (d - forward * initial_heading).head<2>().norm();
  const double dpsi = std::abs(unwrapped_heading(frames).back() - frames[0].heading) / kDeg;
  const bool pass = forward > 0.0 && lateral < 0.1 * forward && dpsi < 5.0 && runtime < 5.0;
  report(2, pass, "forward maneuver",
         fmt("forward %.4f m, lateral %.2e m (%.2e of forward), heading change %.2e deg, runtime %.2f s", forward,
             lateral, lateral / forward, dpsi, runtime));
}

void criterion_3() {
  const auto pos = run_scenario(scripted(30.0, 0.0, 0.5));
  const auto neg = run_scenario(scripted(30.0, 0.0, -0.5));
  const double turn_pos = unwrapped_heading(pos).back() / kDeg;
  const double turn_neg = unwrapped_heading(neg).back() / kDeg;
  // Mirror about the body x-z plane: y, roll, yaw and their rates flip sign.
  double mirror_err = 0.0;
  for (std::size_t i = 0; i < pos.size(); ++i) {
    const auto& a = pos[i];
    const auto& b = neg[i];
    const Eigen::Vector3d ra = roll_pitch_yaw(a.attitude), rb = roll_pitch_yaw(b.attitude);
    const double errs[] = {a.position.x() - b.position.x(), a.position.y() + b.position.y(),
                           a.position.z() - b.position.z(), ra.x() + rb.x(), ra.y() - rb.y(),
                           wrap_to_pi(ra.z() + rb.z()), a.lin_vel.x() - b.lin_vel.x(), a.lin_vel.y() + b.lin_vel.y(),
                           a.lin_vel.z() - b.lin_vel.z(), a.ang_vel.x() + b.ang_vel.x(),
                           a.ang_vel.y() - b.ang_vel.y(), a.ang_vel.z() + b.ang_vel.z()};
    for (double e : errs) mirror_err = std::max(mirror_err, std::abs(e));
  }
  const bool pass = turn_pos > 30.0 && turn_neg < -30.0 && mirror_err <= 1e-6;
  report(3, pass, "turning maneuver",
         fmt("yaw +0.5 -> %+.2f deg, yaw -0.5 -> %+.2f deg, max mirror error %.1e", turn_pos, turn_neg, mirror_err));
}

void criterion_4() {
  ScenarioConfig cfg;
  cfg.duration = 60.0;
  cfg.log_decimation = 1;
  cfg.initial_state.attitude = from_roll_pitch_yaw(10.0 * kDeg, 0.0, 0.0);
  const auto frames = run_scenario(cfg);
  std::vector<double> roll;
  for (const auto& f : frames) roll.push_back(std::abs(roll_pitch_yaw(f.attitude).x()) / kDeg);
  std::vector<double> peaks{roll[0]};
  for (std::size_t i = 1; i + 1 < roll.size(); ++i) {
    if (roll[i] > roll[i - 1] && roll[i] >= roll[i + 1]) peaks.push_back(roll[i]);
  }
  bool monotone = true;
  for (std::size_t i = 1; i < peaks.size(); ++i) monotone &= peaks[i] < peaks[i - 1];
  // Largest excursion over the final two seconds, which spans at least one swing.
  double tail = 0.0;
  for (std::size_t i = roll.size() - 2000; i < roll.size(); ++i) tail = std::max(tail, roll[i]);
  const bool pass = monotone && peaks.size() > 2 && tail < 2.0;
  report(4, pass, "passive roll stability",
         fmt("%zu peaks, monotone=%s, first %.3f deg -> last %.2e deg, max |roll| in final 2 s %.2e deg",
             peaks.size(), monotone ? "yes" : "no", peaks.size() > 1 ? peaks[1] : 0.0, peaks.back(), tail));
}

void criterion_5() {
  std::mt19937_64 rng(20240517);
  std::uniform_real_distribution<double> radius(0.005, 0.05), pitch(0.1, 1.45), length(0.05, 0.5), ct(0.2, 2.0),
      ratio(1.1, 3.0);
  double worst = 0.0;
  for (int k = 0; k < 100; ++k) {
    HelixParams h;
    h.helix_radius = radius(rng);
    h.pitch_angle = pitch(rng);
    h.contour_length = length(rng);
    h.drag_tangential = ct(rng);
    h.drag_normal = h.drag_tangential * ratio(rng);
    const ResistanceMatrix m = helix_resistance(h);
    const auto o = oracle::helix_segments(h.helix_radius, h.pitch_angle, h.contour_length, h.drag_normal,
                                          h.drag_tangential, 100000);
    const double errs[] = {std::abs(m.axial_drag + o.force_per_u) / m.axial_drag,
                           std::abs(m.coupling - o.force_per_omega) / m.coupling,
                           std::abs(m.coupling - o.torque_per_u) / m.coupling,
                           std::abs(m.rotational_drag + o.torque_per_omega) / m.rotational_drag};
    for (double e : errs) worst = std::max(worst, e);
  }
  double isotropic_b = 0.0;
  for (int k = 0; k < 100; ++k) {
    HelixParams h;
    h.helix_radius = radius(rng);
    h.pitch_angle = pitch(rng);
    h.contour_length = length(rng);
    h.drag_tangential = h.drag_normal = ct(rng);
    isotropic_b = std::max(isotropic_b, std::abs(helix_resistance(h).coupling));
  }
  const bool pass = worst <= 1e-6 && isotropic_b < 1e-12;
  report(5, pass, "RFT closed form vs segments",
         fmt("100 draws x 1e5 segments, worst relative error %.2e, max |B| with c_t=c_n %.1e", worst, isotropic_b));
}

void criterion_6() {
  const FrameParams frame;
  const auto mounts = dodecahedron_mounts(frame);
  const MotorParams motor;
  double worst = 0.0;
  bool forward = true;
  for (const ThrustModel& model : {ThrustModel{ResistiveHelix{}}, ThrustModel{LumpedQuadratic{}}}) {
    const AllocationTable table = build_allocation(mounts, model, motor, 0.7 * motor.omega_max);
    for (double u : {-1.0, -0.6, -0.2, 0.1, 0.5, 0.8, 1.0}) {
      const WrenchBody w = steady_wrench(mounts, model, motor, mix({u, 0.0}, table));
      forward &= w.force.x() * u > 0.0;
      worst = std::max(worst, w.torque.norm() / (w.force.norm() * frame.frame_radius));
    }
  }
  const bool pass = forward && worst <= 1e-6;
  report(6, pass, "torque cancellation",
         fmt("max |torque| / (|force| * frame_radius) = %.1e over both thrust models", worst));
}

void criterion_7() {
  std::mt19937_64 rng(77);
  std::uniform_int_distribution<int> n_pieces(0, 12), grid(1, 8), count(1, 4);
  std::uniform_real_distribution<double> mass(0.05, 2.0), residual(0.0, 10.0);
  int mismatches = 0;
  int ties = 0;
  for (int trial = 0; trial < 1000; ++trial) {
    const int mode = trial % 3;  // 0: continuous masses, 1: quarter-kilo grid, 2: repeated items
    WeightInventory inv;
    std::vector<double> pieces;
    while (static_cast<int>(pieces.size()) < n_pieces(rng) || (mode == 2 && pieces.size() < 2)) {
      const double m = mode == 0 ? mass(rng) : 0.25 * grid(rng);
      const int c = mode == 2 ? std::min(count(rng), 12 - static_cast<int>(pieces.size())) : 1;
      if (c <= 0) break;
      inv.items.push_back({m, c});
      pieces.insert(pieces.end(), c, m);
    }
    const double r = mode == 0 ? residual(rng) : 0.25 * std::round(4.0 * residual(rng));
    const TrimSelection got = trim_select(r, inv);
    const auto want = oracle::exhaustive_trim(r, pieces, kTrimTieTolerance);
    if (got.weights != want.weights) ++mismatches;
    if (mode != 0) ++ties;
  }
  report(7, mismatches == 0, "trim selection optimality",
         fmt("1000 inventories (<=12 pieces, %d on tie-prone grids), %d mismatches vs exhaustive", ties, mismatches));
}

void criterion_8() {
  // Quaternion norm under a maneuver that rotates about all axes.
  ScenarioConfig cfg = scripted(10.0, 0.6, 0.7);
  cfg.initial_state.attitude = from_roll_pitch_yaw(20 * kDeg, -15 * kDeg, 5 * kDeg);
  cfg.initial_state.ang_vel = {0.4, -0.3, 0.2};
  Simulator sim(cfg);
  sim.set_command({0.6, 0.7});
  double norm_err = 0.0;
  for (int k = 0; k < 10000; ++k) {
    sim.step();
    norm_err = std::max(norm_err, std::abs(sim.state().attitude.norm() - 1.0));
  }

  // Kinetic energy with zero actuation from a planar initial velocity.
  ScenarioConfig coast;
  coast.initial_state.lin_vel = {0.3, -0.2, 0.0};
  coast.initial_state.ang_vel = {0.0, 0.0, 0.8};
  Simulator free_body(coast);
  double ke = kinetic_energy(free_body.state(), coast.robot);
  int increases = 0;
  for (int k = 0; k < 10000; ++k) {
    free_body.step();
    const double e = kinetic_energy(free_body.state(), coast.robot);
    if (e > ke) ++increases;
    ke = e;
  }

  ScenarioConfig det = scripted(20.0, 0.5, 0.3);
  det.mode = {AutopilotMode::kHeadingHold, -25.0};
  auto bytes = [&] {
    std::ostringstream out;
    write_log(out, det, run_scenario(det));
    return out.str();
  };
  const std::string a = bytes();
  const std::string b = bytes();
  const bool pass = norm_err < 1e-9 && increases == 0 && a == b;
  report(8, pass, "numerical hygiene",
         fmt("max |1-|q|| %.1e over 1e4 steps, KE increases %d/10000, logs identical=%s (%zu bytes)", norm_err,
             increases, a == b ? "yes" : "no", a.size()));
}

void criterion_9() {
  ScenarioConfig cfg;  // shipped default gains
  cfg.duration = 90.0;
  cfg.log_decimation = 10;
  cfg.mode = {AutopilotMode::kHeadingHold, 30.0};
  const auto frames = run_scenario(cfg);
  const auto psi = unwrapped_heading(frames);
  double last_out = 0.0;
  double peak = 0.0;
  for (std::size_t i = 0; i < frames.size(); ++i) {
    const double h = psi[i] / kDeg;
    peak = std::max(peak, h);
    if (std::abs(h - 30.0) > 2.0) last_out = frames[i].t;
  }
  const double overshoot = std::max(0.0, peak - 30.0);
  const bool pass = last_out < 60.0 && overshoot <= 15.0;
  report(9, pass, "heading hold 30 deg step",
         fmt("inside +-2 deg from t=%.2f s through 90 s, overshoot %.2f deg (limit 15), kp=%.3g ki=%.3g kd=%.3g",
             last_out, overshoot, cfg.gains.kp, cfg.gains.ki, cfg.gains.kd));
}

void criterion_10() {
  const auto dir = std::filesystem::temp_directory_path() / ("bactobot_accept_" + std::to_string(::getpid()));
  std::filesystem::create_directories(dir);
  ScenarioConfig cfg;
  ServeOptions opts;
  opts.port = 0;
  opts.telemetry_rate_hz = 50.0;
  opts.timeline_path = (dir / "session.timeline.jsonl").string();

  std::vector<json> received;
  std::uint64_t steps = 0;
  {
    TelemetryServer server(cfg, opts);
    server.start();
    testclient::Connection pilot(server.port());
    const std::vector<std::pair<std::chrono::milliseconds, std::string>> script{
        {150ms, R"({"type":"cmd","surge":0.8,"yaw":0})"},
        {250ms, R"({"type":"cmd","surge":0.8,"yaw":0.5})"},
        {200ms, R"({"type":"cmd","surge":-0.3,"yaw":-1.7})"},
        {200ms, R"({"type":"mode","value":"heading_hold","setpoint_deg":-20})"},
        {300ms, R"({"type":"cmd","surge":0.4,"yaw":0})"},
        {200ms, R"({"type":"mode","value":"open_loop"})"},
        {150ms, R"({"type":"cmd","surge":0,"yaw":0.2})"},
    };
    auto drain = [&](std::chrono::milliseconds span) {
      const auto until = std::chrono::steady_clock::now() + span;
      while (std::chrono::steady_clock::now() < until) {
        auto line = pilot.read_line(std::chrono::duration_cast<std::chrono::milliseconds>(
            until - std::chrono::steady_clock::now()));
        if (!line) continue;
        json j = json::parse(*line);
        if (j.at("type") == "state") received.push_back(std::move(j));
      }
    };
    for (const auto& [wait, msg] : script) {
      drain(wait);
      pilot.send_line(msg);
    }
    drain(300ms);
    server.stop();
    steps = server.steps_run();
  }

  std::ifstream in(opts.timeline_path);
  const Timeline timeline = read_timeline(in);
  const auto replay = replay_timeline(cfg, timeline.entries, timeline.steps, 1);

  double worst = 0.0;
  std::size_t compared = 0;
  for (const json& j : received) {
    const auto step = j.at("step").get<std::uint64_t>();
    if (step >= replay.size()) continue;
    const TelemetryFrame live = frame_from_json(j);
    const TelemetryFrame& ref = replay[step];
    const double diffs[] = {(live.position - ref.position).cwiseAbs().maxCoeff(),
                            (live.attitude.coeffs() - ref.attitude.coeffs()).cwiseAbs().maxCoeff(),
                            (live.lin_vel - ref.lin_vel).cwiseAbs().maxCoeff(),
                            (live.ang_vel - ref.ang_vel).cwiseAbs().maxCoeff(), std::abs(live.heading - ref.heading)};
    for (double d : diffs) worst = std::max(worst, d);
    for (int p = 0; p < kPairCount; ++p) worst = std::max(worst, std::abs(live.pair_duties[p] - ref.pair_duties[p]));
    for (int a = 0; a < kArmCount; ++a) worst = std::max(worst, std::abs(live.motor_speeds[a] - ref.motor_speeds[a]));
    ++compared;
  }
  std::filesystem::remove_all(dir);
  const bool pass = compared >= 50 && timeline.entries.size() >= 6 && timeline.steps == steps && worst <= 1e-9;
  report(10, pass, "real-time session replay",
         fmt("%zu live frames vs batch replay of %zu timeline entries over %llu steps, worst component error %.1e",
             compared, timeline.entries.size(), static_cast<unsigned long long>(timeline.steps), worst));
}

}  // namespace

int main() {
  const std::vector<std::function<void()>> criteria{criterion_1, criterion_2, criterion_3, criterion_4,
                                                     criterion_5, criterion_6, criterion_7, criterion_8,
                                                     criterion_9, criterion_10};
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    try {
      criteria[i]();
    } catch (const std::exception& e) {
      report(static_cast<int>(i + 1), false, "exception", e.what());
    }
  }
  std::printf("%s: %d of %zu criteria failed\n", g_failures ? "FAILED" : "ALL PASSED", g_failures, criteria.size());
  return g_failures == 0 ? 0 : 1;
}
