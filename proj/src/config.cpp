#include "bactobot/config.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <numbers>
#include <set>

#include "bactobot/errors.hpp"

namespace bactobot {

using nlohmann::json;

const char* mode_name(AutopilotMode mode) {
  return mode == AutopilotMode::kHeadingHold ? "heading_hold" : "open_loop";
}

AutopilotMode parse_mode_name(const std::string& name) {
  if (name == "open_loop") return AutopilotMode::kOpenLoop;
  if (name == "heading_hold") return AutopilotMode::kHeadingHold;
  throw ParameterError("unknown mode '" + name + "'");
}

std::uint64_t ScenarioConfig::step_count() const {
  return static_cast<std::uint64_t>(std::llround(duration / dt));
}

namespace {

// Reads one JSON object, remembering which keys were consumed so that typos
// surface as errors instead of silently falling back to defaults.
class ObjectReader {
 public:
  ObjectReader(const json& obj, std::string path) : obj_(obj), path_(std::move(path)) {
    if (!obj_.is_object()) throw ConfigError(path_.empty() ? "<root>" : path_, "expected an object");
  }

  std::string field(const std::string& key) const { return path_.empty() ? key : path_ + "." + key; }

  const json* find(const std::string& key) {
    seen_.insert(key);
    auto it = obj_.find(key);
    return it == obj_.end() ? nullptr : &*it;
  }

  void number(const std::string& key, double& out) {
    if (const json* v = find(key)) out = as_number(*v, field(key));
  }

  void integer(const std::string& key, int& out) {
    if (const json* v = find(key)) {
      if (!v->is_number_integer()) throw ConfigError(field(key), "expected an integer");
      out = v->get<int>();
    }
  }

  void vec3(const std::string& key, Eigen::Vector3d& out) {
    if (const json* v = find(key)) out = as_vec3(*v, field(key));
  }

  void finish() const {
    for (const auto& [k, _] : obj_.items()) {
      if (!seen_.contains(k)) throw ConfigError(field(k), "unknown key");
    }
  }

  static double as_number(const json& v, const std::string& where) {
    if (!v.is_number()) throw ConfigError(where, "expected a number");
    const double d = v.get<double>();
    if (!std::isfinite(d)) throw ConfigError(where, "must be finite");
    return d;
  }

  static Eigen::Vector3d as_vec3(const json& v, const std::string& where) {
    if (!v.is_array() || v.size() != 3) throw ConfigError(where, "expected an array of 3 numbers");
    return {as_number(v[0], where + "[0]"), as_number(v[1], where + "[1]"), as_number(v[2], where + "[2]")};
  }

 private:
  const json& obj_;
  std::string path_;
  std::set<std::string> seen_;
};

constexpr const char* kDofNames[6] = {"surge", "sway", "heave", "roll", "pitch", "yaw"};

// Six-DOF diagonal coefficients keyed "<dof>_<unit>", with separate unit
// suffixes for the translational and rotational entries.
void read_dof6(ObjectReader& parent, const std::string& key, const char* lin_unit, const char* ang_unit,
               Vector6d& out) {
  const json* v = parent.find(key);
  if (!v) return;
  ObjectReader r(*v, parent.field(key));
  for (int i = 0; i < 6; ++i) {
    r.number(std::string(kDofNames[i]) + "_" + (i < 3 ? lin_unit : ang_unit), out[i]);
  }
  r.finish();
}

json write_dof6(const Vector6d& v, const char* lin_unit, const char* ang_unit) {
  json o = json::object();
  for (int i = 0; i < 6; ++i) o[std::string(kDofNames[i]) + "_" + (i < 3 ? lin_unit : ang_unit)] = v[i];
  return o;
}

json vec3_json(const Eigen::Vector3d& v) { return json::array({v.x(), v.y(), v.z()}); }

template <typename Fn>
void rethrow_as(const std::string& field, Fn&& fn) {
  try {
    fn();
  } catch (const ParameterError& e) {
    throw ConfigError(field, e.what());
  }
}

}  // namespace

void ScenarioConfig::validate() const {
  rethrow_as("frame", [&] { frame.validate(); });
  rethrow_as("robot", [&] { robot.validate(); });
  rethrow_as("motors", [&] { motors.validate(); });
  rethrow_as("thrust_model", [&] { bactobot::validate(thrust_model); });
  rethrow_as("imu", [&] { imu.validate(); });
  rethrow_as("gains", [&] { gains.validate(); });
  rethrow_as("ballast_inventory", [&] { ballast_inventory.validate(); });
  if (!(dt > 0.0 && dt <= 0.1)) throw ConfigError("dt_s", "must lie in (0, 0.1]");
  if (!(duration > 0.0)) throw ConfigError("duration_s", "must be > 0");
  if (log_decimation < 1) throw ConfigError("log_decimation", "must be >= 1");
  if (omega_ref < 0.0 || omega_ref > motors.omega_max) {
    throw ConfigError("allocation_omega_ref_rad_s", "must lie in (0, omega_max]");
  }
  for (std::size_t i = 0; i < command_script.size(); ++i) {
    const auto& e = command_script[i];
    const std::string where = "command_script[" + std::to_string(i) + "]";
    if (!(e.t_start >= 0.0)) throw ConfigError(where + ".t_start_s", "must be >= 0");
    if (i > 0 && e.t_start < command_script[i - 1].t_start) {
      throw ConfigError(where + ".t_start_s", "script times must be nondecreasing");
    }
    if (std::abs(e.surge) > 1.0) throw ConfigError(where + ".surge", "must lie in [-1, 1]");
    if (std::abs(e.yaw) > 1.0) throw ConfigError(where + ".yaw", "must lie in [-1, 1]");
  }
  if (!initial_state.allFinite()) throw ConfigError("initial_state", "must be finite");
}

ScenarioConfig parse_config(const json& doc) {
  ScenarioConfig cfg;
  ObjectReader root(doc, "");

  if (const json* v = root.find("frame")) {
    ObjectReader r(*v, "frame");
    r.number("frame_radius_m", cfg.frame.frame_radius);
    r.number("arm_root_offset_m", cfg.frame.arm_root_offset);
    if (const json* tp = r.find("torque_pairs")) {
      if (!tp->is_array()) throw ConfigError("frame.torque_pairs", "expected an array of pair ids");
      cfg.frame.torque_pairs.clear();
      for (const auto& p : *tp) {
        if (!p.is_number_integer()) throw ConfigError("frame.torque_pairs", "expected integers");
        cfg.frame.torque_pairs.push_back(p.get<int>());
      }
    }
    r.finish();
  }

  if (const json* v = root.find("robot")) {
    ObjectReader r(*v, "robot");
    RobotParams& p = cfg.robot;
    r.number("dry_mass_kg", p.dry_mass);
    r.number("ballast_mass_kg", p.ballast_mass);
    r.number("displaced_volume_m3", p.displaced_volume);
    r.vec3("r_cob_m", p.r_cob);
    if (const json* in = r.find("inertia_kg_m2")) {
      if (!in->is_array() || in->size() != 3) {
        throw ConfigError("robot.inertia_kg_m2", "expected a 3x3 array");
      }
      for (int i = 0; i < 3; ++i) {
        p.inertia.row(i) = ObjectReader::as_vec3((*in)[i], "robot.inertia_kg_m2[" + std::to_string(i) + "]");
      }
    }
    read_dof6(r, "added_mass", "kg", "kg_m2", p.added_mass);
    read_dof6(r, "drag_linear", "n_s_m", "n_m_s", p.drag_linear);
    read_dof6(r, "drag_quadratic", "n_s2_m2", "n_m_s2", p.drag_quadratic);
    r.number("fluid_density_kg_m3", p.fluid_density);
    r.number("gravity_m_s2", p.gravity);
    r.finish();
  }

  if (const json* v = root.find("motors")) {
    ObjectReader r(*v, "motors");
    r.number("omega_max_rad_s", cfg.motors.omega_max);
    r.number("time_constant_s", cfg.motors.time_constant);
    r.finish();
  }

  if (const json* v = root.find("thrust_model")) {
    ObjectReader r(*v, "thrust_model");
    const json* type = r.find("type");
    if (!type || !type->is_string()) throw ConfigError("thrust_model.type", "expected a string");
    if (*type == "resistive_helix") {
      ResistiveHelix m;
      r.number("helix_radius_m", m.helix.helix_radius);
      r.number("pitch_angle_rad", m.helix.pitch_angle);
      r.number("contour_length_m", m.helix.contour_length);
      r.number("drag_normal_n_s_m2", m.helix.drag_normal);
      r.number("drag_tangential_n_s_m2", m.helix.drag_tangential);
      cfg.thrust_model = m;
    } else if (*type == "lumped_quadratic") {
      LumpedQuadratic m;
      r.number("k_thrust_n_s2_rad2", m.k_thrust);
      r.number("k_torque_n_m_s2_rad2", m.k_torque);
      r.number("omega_ref_rad_s", m.omega_ref);
      cfg.thrust_model = m;
    } else {
      throw ConfigError("thrust_model.type", "expected 'resistive_helix' or 'lumped_quadratic'");
    }
    r.finish();
  }

  if (const json* v = root.find("imu")) {
    ObjectReader r(*v, "imu");
    r.number("gyro_noise_std_rad_s", cfg.imu.gyro_noise_std);
    r.number("heading_noise_std_rad", cfg.imu.heading_noise_std);
    if (const json* s = r.find("seed")) {
      if (!s->is_number_unsigned() && !s->is_number_integer()) throw ConfigError("imu.seed", "expected an integer");
      cfg.imu.seed = s->get<std::uint64_t>();
    }
    r.finish();
  }

  if (const json* v = root.find("gains")) {
    ObjectReader r(*v, "gains");
    r.number("kp_per_rad", cfg.gains.kp);
    r.number("ki_per_rad_s", cfg.gains.ki);
    r.number("kd_s_per_rad", cfg.gains.kd);
    r.number("integral_limit", cfg.gains.integral_limit);
    r.finish();
  }

  if (const json* v = root.find("mode")) {
    ObjectReader r(*v, "mode");
    const json* type = r.find("type");
    if (!type || !type->is_string()) throw ConfigError("mode.type", "expected a string");
    try {
      cfg.mode.mode = parse_mode_name(type->get<std::string>());
    } catch (const ParameterError& e) {
      throw ConfigError("mode.type", e.what());
    }
    r.number("setpoint_deg", cfg.mode.setpoint_deg);
    r.finish();
  }

  if (const json* v = root.find("command_script")) {
    if (!v->is_array()) throw ConfigError("command_script", "expected an array");
    for (std::size_t i = 0; i < v->size(); ++i) {
      ObjectReader r((*v)[i], "command_script[" + std::to_string(i) + "]");
      ScriptEntry e;
      r.number("t_start_s", e.t_start);
      r.number("surge", e.surge);
      r.number("yaw", e.yaw);
      r.finish();
      cfg.command_script.push_back(e);
    }
  }

  if (const json* v = root.find("initial_state")) {
    ObjectReader r(*v, "initial_state");
    BodyState& s = cfg.initial_state;
    r.vec3("position_m", s.position);
    Eigen::Vector3d rpy = Eigen::Vector3d::Zero();
    r.vec3("roll_pitch_yaw_deg", rpy);
    rpy *= std::numbers::pi / 180.0;
    s.attitude = from_roll_pitch_yaw(rpy.x(), rpy.y(), rpy.z());
    r.vec3("lin_vel_m_s", s.lin_vel);
    r.vec3("ang_vel_rad_s", s.ang_vel);
    r.finish();
  }

  if (const json* v = root.find("ballast_inventory")) {
    if (!v->is_array()) throw ConfigError("ballast_inventory", "expected an array");
    cfg.ballast_inventory.items.clear();
    for (std::size_t i = 0; i < v->size(); ++i) {
      ObjectReader r((*v)[i], "ballast_inventory[" + std::to_string(i) + "]");
      WeightItem item;
      r.number("mass_kg", item.mass);
      r.integer("count", item.count);
      r.finish();
      cfg.ballast_inventory.items.push_back(item);
    }
  }

  root.number("allocation_omega_ref_rad_s", cfg.omega_ref);
  root.number("dt_s", cfg.dt);
  root.number("duration_s", cfg.duration);
  root.integer("log_decimation", cfg.log_decimation);
  root.finish();

  cfg.validate();
  return cfg;
}

ScenarioConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError(path.string(), "cannot open config file");
  json doc;
  try {
    doc = json::parse(in, nullptr, true, /*ignore_comments=*/true);
  } catch (const json::parse_error& e) {
    throw ConfigError(path.string(), e.what());
  }
  return parse_config(doc);
}

json to_json(const ScenarioConfig& cfg) {
  json doc;
  doc["frame"] = {{"frame_radius_m", cfg.frame.frame_radius},
                  {"arm_root_offset_m", cfg.frame.arm_root_offset},
                  {"torque_pairs", cfg.frame.torque_pairs}};

  const RobotParams& p = cfg.robot;
  json inertia = json::array();
  for (int i = 0; i < 3; ++i) inertia.push_back(vec3_json(p.inertia.row(i).transpose()));
  doc["robot"] = {{"dry_mass_kg", p.dry_mass},
                  {"ballast_mass_kg", p.ballast_mass},
                  {"displaced_volume_m3", p.displaced_volume},
                  {"r_cob_m", vec3_json(p.r_cob)},
                  {"inertia_kg_m2", inertia},
                  {"added_mass", write_dof6(p.added_mass, "kg", "kg_m2")},
                  {"drag_linear", write_dof6(p.drag_linear, "n_s_m", "n_m_s")},
                  {"drag_quadratic", write_dof6(p.drag_quadratic, "n_s2_m2", "n_m_s2")},
                  {"fluid_density_kg_m3", p.fluid_density},
                  {"gravity_m_s2", p.gravity}};

  doc["motors"] = {{"omega_max_rad_s", cfg.motors.omega_max}, {"time_constant_s", cfg.motors.time_constant}};

  if (const auto* h = std::get_if<ResistiveHelix>(&cfg.thrust_model)) {
    doc["thrust_model"] = {{"type", "resistive_helix"},
                           {"helix_radius_m", h->helix.helix_radius},
                           {"pitch_angle_rad", h->helix.pitch_angle},
                           {"contour_length_m", h->helix.contour_length},
                           {"drag_normal_n_s_m2", h->helix.drag_normal},
                           {"drag_tangential_n_s_m2", h->helix.drag_tangential}};
  } else {
    const auto& q = std::get<LumpedQuadratic>(cfg.thrust_model);
    doc["thrust_model"] = {{"type", "lumped_quadratic"},
                           {"k_thrust_n_s2_rad2", q.k_thrust},
                           {"k_torque_n_m_s2_rad2", q.k_torque},
                           {"omega_ref_rad_s", q.omega_ref}};
  }

  doc["imu"] = {{"gyro_noise_std_rad_s", cfg.imu.gyro_noise_std},
                {"heading_noise_std_rad", cfg.imu.heading_noise_std},
                {"seed", cfg.imu.seed}};
  doc["gains"] = {{"kp_per_rad", cfg.gains.kp},
                  {"ki_per_rad_s", cfg.gains.ki},
                  {"kd_s_per_rad", cfg.gains.kd},
                  {"integral_limit", cfg.gains.integral_limit}};
  doc["mode"] = {{"type", mode_name(cfg.mode.mode)}, {"setpoint_deg", cfg.mode.setpoint_deg}};

  json script = json::array();
  for (const auto& e : cfg.command_script) {
    script.push_back({{"t_start_s", e.t_start}, {"surge", e.surge}, {"yaw", e.yaw}});
  }
  doc["command_script"] = script;

  const BodyState& s = cfg.initial_state;
  const Eigen::Vector3d rpy = roll_pitch_yaw(s.attitude) * (180.0 / std::numbers::pi);
  doc["initial_state"] = {{"position_m", vec3_json(s.position)},
                          {"roll_pitch_yaw_deg", vec3_json(rpy)},
                          {"lin_vel_m_s", vec3_json(s.lin_vel)},
                          {"ang_vel_rad_s", vec3_json(s.ang_vel)}};

  json inventory = json::array();
  for (const auto& it : cfg.ballast_inventory.items) {
    inventory.push_back({{"mass_kg", it.mass}, {"count", it.count}});
  }
  doc["ballast_inventory"] = inventory;
  doc["allocation_omega_ref_rad_s"] = cfg.omega_ref;
  doc["dt_s"] = cfg.dt;
  doc["duration_s"] = cfg.duration;
  doc["log_decimation"] = cfg.log_decimation;
  return doc;
}

std::string config_hash(const ScenarioConfig& cfg) {
  const std::string text = to_json(cfg).dump();
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : text) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

}  // namespace bactobot
