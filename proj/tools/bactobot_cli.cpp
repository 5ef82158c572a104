// Command-line front end: batch runs, ballast calibration, mixer queries and
// the live teleoperation server.

#include <csignal>
#include <fstream>
#include <iostream>

#include <CLI11.hpp>
#include <json.hpp>

#include "bactobot/ballast.hpp"
#include "bactobot/config.hpp"
#include "bactobot/errors.hpp"
#include "bactobot/mixer.hpp"
#include "bactobot/server.hpp"
#include "bactobot/simulator.hpp"
#include "bactobot/telemetry.hpp"

namespace {

using nlohmann::ordered_json;
using namespace bactobot;

ordered_json wrench_json(const WrenchBody& w) {
  return {{"force_n", {w.force.x(), w.force.y(), w.force.z()}},
          {"torque_n_m", {w.torque.x(), w.torque.y(), w.torque.z()}}};
}

int cmd_run(const std::string& config_path, const std::string& out_path, const std::string& replay_path) {
  const ScenarioConfig cfg = load_config(config_path);
  std::vector<TelemetryFrame> frames;
  if (replay_path.empty()) {
    frames = run_scenario(cfg);
  } else {
    std::ifstream in(replay_path);
    if (!in) throw std::runtime_error("cannot open timeline " + replay_path);
    const Timeline timeline = read_timeline(in);
    if (timeline.config_hash != config_hash(cfg)) {
      std::cerr << "warning: timeline was recorded with config " << timeline.config_hash << ", replaying with "
                << config_hash(cfg) << "\n";
    }
    frames = replay_timeline(cfg, timeline.entries, timeline.steps, cfg.log_decimation);
  }
  std::ofstream out(out_path);
  if (!out) throw std::runtime_error("cannot write " + out_path);
  write_log(out, cfg, frames);

  const TelemetryFrame& last = frames.back();
  ordered_json summary;
  summary["frames"] = frames.size();
  summary["t_final_s"] = last.t;
  summary["position_m"] = {last.position.x(), last.position.y(), last.position.z()};
  summary["heading_rad"] = last.heading;
  std::cout << summary.dump(2) << "\n";
  return 0;
}

int cmd_calibrate(const std::string& config_path) {
  const ScenarioConfig cfg = load_config(config_path);
  const RobotParams& r = cfg.robot;
  const double needed = neutral_ballast_mass(r.fluid_density, r.displaced_volume, r.dry_mass);

  ordered_json out;
  out["fluid_density_kg_m3"] = r.fluid_density;
  out["displaced_volume_m3"] = r.displaced_volume;
  out["dry_mass_kg"] = r.dry_mass;
  out["neutral_total_mass_kg"] = r.fluid_density * r.displaced_volume;
  out["neutral_ballast_kg"] = needed;
  if (needed < 0.0) {
    out["too_heavy"] = true;
    out["selected_weights_kg"] = ordered_json::array();
    out["selected_total_kg"] = 0.0;
    out["residual_kg"] = needed;
  } else {
    const TrimSelection sel = trim_select(needed, cfg.ballast_inventory);
    out["too_heavy"] = false;
    out["selected_weights_kg"] = sel.weights;
    out["selected_total_kg"] = sel.total;
    out["residual_kg"] = needed - sel.total;
    out["inventory_exhausted"] = sel.inventory_exhausted;
  }
  std::cout << out.dump(2) << "\n";
  return 0;
}

int cmd_mix(const std::string& config_path, double surge, double yaw, bool dump_table) {
  const ScenarioConfig cfg = load_config(config_path);
  const auto mounts = dodecahedron_mounts(cfg.frame);
  const AllocationTable table = build_allocation(mounts, cfg.thrust_model, cfg.motors, cfg.allocation_omega_ref());
  const ManeuverCommand cmd = ManeuverCommand{surge, yaw}.clamped();
  const PairDuties duties = mix(cmd, table);

  ordered_json out;
  out["surge"] = cmd.surge;
  out["yaw"] = cmd.yaw;
  out["pair_duties"] = duties.values();
  out["steady_wrench"] = wrench_json(steady_wrench(mounts, cfg.thrust_model, cfg.motors, duties));
  if (dump_table) {
    ordered_json t;
    t["omega_ref_rad_s"] = table.omega_ref;
    t["surge_weights"] = table.surge_weights;
    t["yaw_weights"] = table.yaw_weights;
    ordered_json units = ordered_json::array();
    for (const auto& w : table.unit_wrenches) units.push_back(wrench_json(w));
    t["unit_wrenches"] = units;
    out["allocation"] = t;
  }
  std::cout << out.dump(2) << "\n";
  return 0;
}

int cmd_serve(const std::string& config_path, ServeOptions opts, double duration) {
  const ScenarioConfig cfg = load_config(config_path);
  TelemetryServer server(cfg, opts);
  std::cerr << "serving on " << opts.bind_address << ":" << server.port() << " at " << opts.telemetry_rate_hz
            << " Hz telemetry\n";
  server.start();

  if (duration > 0.0) {
    server.wait(std::chrono::duration<double>(duration));
  } else {
    // SIGINT/SIGTERM are blocked process-wide in main; wait for one here.
    sigset_t set;
    sigemptyset(&set);
    sigaddset(&set, SIGINT);
    sigaddset(&set, SIGTERM);
    int sig = 0;
    sigwait(&set, &sig);
  }
  server.stop();
  std::cerr << "stopped after " << server.steps_run() << " steps\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  // Worker threads must not receive SIGINT/SIGTERM; the main thread waits for them.
  sigset_t set;
  sigemptyset(&set);
  sigaddset(&set, SIGINT);
  sigaddset(&set, SIGTERM);
  pthread_sigmask(SIG_BLOCK, &set, nullptr);

  CLI::App app{"BactoBot simulator and teleoperation server"};
  app.require_subcommand(1);

  std::string config_path;
  std::string out_path;
  std::string replay_path;
  auto* run = app.add_subcommand("run", "Run a scenario in batch mode and write the trajectory log");
  run->add_option("config", config_path, "Scenario config (JSON)")->required()->check(CLI::ExistingFile);
  run->add_option("--out", out_path, "Trajectory log path")->required();
  run->add_option("--replay", replay_path, "Replay a recorded command timeline instead of the script")
      ->check(CLI::ExistingFile);

  auto* calibrate = app.add_subcommand("calibrate", "Neutral ballast mass and weight selection");
  calibrate->add_option("config", config_path, "Scenario config (JSON)")->required()->check(CLI::ExistingFile);

  double surge = 0.0;
  double yaw = 0.0;
  bool dump_table = false;
  auto* mixcmd = app.add_subcommand("mix", "Pair duties for a maneuver command");
  mixcmd->add_option("config", config_path, "Scenario config (JSON)")->required()->check(CLI::ExistingFile);
  mixcmd->add_option("--surge", surge, "Surge effort [-1, 1]");
  mixcmd->add_option("--yaw", yaw, "Yaw effort [-1, 1]");
  mixcmd->add_flag("--table", dump_table, "Also print the allocation table");

  ServeOptions opts;
  double duration = 0.0;
  auto* serve = app.add_subcommand("serve", "Real-time simulation with the telemetry/command server");
  serve->add_option("config", config_path, "Scenario config (JSON)")->required()->check(CLI::ExistingFile);
  serve->add_option("--port", opts.port, "TCP port (0 = ephemeral)")->capture_default_str();
  serve->add_option("--rate", opts.telemetry_rate_hz, "Telemetry rate in Hz")
      ->check(CLI::Range(1.0, 100.0))
      ->capture_default_str();
  serve->add_option("--bind", opts.bind_address, "Bind address")->capture_default_str();
  serve->add_option("--timeline", opts.timeline_path, "Record the applied command timeline here");
  serve->add_option("--log", opts.log_path, "Write the full trajectory log here");
  serve->add_option("--command-timeout", opts.command_timeout_s, "Zero the command after this much silence (0 = off)")
      ->capture_default_str();
  serve->add_option("--duration", duration, "Stop after this many wall seconds (0 = until interrupted)");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*run) return cmd_run(config_path, out_path, replay_path);
    if (*calibrate) return cmd_calibrate(config_path);
    if (*mixcmd) return cmd_mix(config_path, surge, yaw, dump_table);
    if (*serve) return cmd_serve(config_path, opts, duration);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
