#include "run_config.hpp"

#include <cmath>
#include <set>

#include "geomag/errors.hpp"

namespace geomag::cli {

namespace {

using io::json;

[[noreturn]] void fail(const std::string& path, const std::string& why) {
    throw ConfigError("config field '" + path + "': " + why);
}

void reject_unknown(const json& j, const std::string& path,
                    std::initializer_list<const char*> known) {
    for (const auto& [key, value] : j.items()) {
        (void)value;
        bool ok = false;
        for (const char* k : known) {
            if (key == k) { ok = true; break; }
        }
        if (!ok) fail(path.empty() ? key : path + "." + key, "unknown key");
    }
}

double get_number(const json& j, const char* key, const std::string& path,
                  double fallback) {
    if (!j.contains(key)) return fallback;
    if (!j.at(key).is_number()) fail(path + "." + key, "expected a number");
    return j.at(key).get<double>();
}

Vec3 get_vec3(const json& j, const char* key, const std::string& path,
              const Vec3& fallback) {
    if (!j.contains(key)) return fallback;
    const auto& v = j.at(key);
    if (!v.is_array() || v.size() != 3 || !v[0].is_number() ||
        !v[1].is_number() || !v[2].is_number()) {
        fail(path + "." + key, "expected [x, y, z]");
    }
    return Vec3(v[0].get<double>(), v[1].get<double>(), v[2].get<double>());
}

Mat3 get_mat3(const json& j, const char* key, const std::string& path) {
    const auto& m = j.at(key);
    if (!m.is_array() || m.size() != 3) fail(path + "." + key, "expected 3x3 rows");
    Mat3 out;
    for (int r = 0; r < 3; ++r) {
        const auto& row = m[static_cast<std::size_t>(r)];
        if (!row.is_array() || row.size() != 3 || !row[0].is_number() ||
            !row[1].is_number() || !row[2].is_number()) {
            fail(path + "." + key, "expected 3x3 numeric rows");
        }
        out(r, 0) = row[0].get<double>();
        out(r, 1) = row[1].get<double>();
        out(r, 2) = row[2].get<double>();
    }
    return out;
}

EulerAngles get_rpy_deg(const json& j, const std::string& path) {
    const Vec3 deg = get_vec3(j, "attitude_rpy_deg", path, Vec3::Zero());
    constexpr double k = M_PI / 180.0;
    return EulerAngles{deg.x() * k, deg.y() * k, deg.z() * k};
}

strapdown::EnvironmentConstants parse_environment(const json& j,
                                                  const std::string& path) {
    reject_unknown(j, path, {"gravity", "latitude_deg", "earth_rate"});
    const double lat =
        get_number(j, "latitude_deg", path, 45.0) * M_PI / 180.0;
    const double rate = get_number(j, "earth_rate", path,
                                   strapdown::EnvironmentConstants::kEarthRate);
    if (rate < 0.0) fail(path + ".earth_rate", "must be >= 0");
    auto env = strapdown::EnvironmentConstants::at_latitude(lat, rate);
    env.gravity = get_vec3(j, "gravity", path, env.gravity);
    return env;
}

strapdown::SensorNoiseModel parse_noise(const json& j, const std::string& path) {
    reject_unknown(j, path,
                   {"acc_sigma", "gyro_sigma", "mag_sigma", "acc_bias", "gyro_bias"});
    strapdown::SensorNoiseModel n;
    n.acc_sigma = get_number(j, "acc_sigma", path, 0.0);
    n.gyro_sigma = get_number(j, "gyro_sigma", path, 0.0);
    n.mag_sigma = get_number(j, "mag_sigma", path, 0.0);
    n.acc_bias = get_vec3(j, "acc_bias", path, Vec3::Zero());
    n.gyro_bias = get_vec3(j, "gyro_bias", path, Vec3::Zero());
    if (n.acc_sigma < 0 || n.gyro_sigma < 0 || n.mag_sigma < 0) {
        fail(path, "noise sigmas must be >= 0");
    }
    return n;
}

magcal::MagCalibration parse_distortion(const json& j, const std::string& path) {
    reject_unknown(j, path, {"soft_iron", "hard_iron"});
    magcal::MagCalibration cal;
    if (j.contains("soft_iron")) cal.soft_iron = get_mat3(j, "soft_iron", path);
    cal.hard_iron = get_vec3(j, "hard_iron", path, Vec3::Zero());
    return cal;
}

sim::DipoleField parse_dipole_body(const json& j, const std::string& path) {
    sim::DipoleField d;
    d.location = get_vec3(j, "location", path, Vec3::Zero());
    if (!j.contains("moment")) fail(path + ".moment", "required for a dipole");
    d.moment = get_vec3(j, "moment", path, Vec3::Zero());
    return d;
}

sim::MagneticFieldModel parse_field(const json& j, const std::string& path) {
    if (!j.contains("type")) fail(path + ".type", "required");
    const std::string type = j.at("type").get<std::string>();
    if (type == "uniform") {
        reject_unknown(j, path, {"type", "b0"});
        sim::UniformField f;
        f.b0 = get_vec3(j, "b0", path, Vec3(20.0, 0.0, -44.0));
        return f;
    }
    if (type == "dipole") {
        reject_unknown(j, path, {"type", "location", "moment"});
        return parse_dipole_body(j, path);
    }
    if (type == "uniform_plus_anomalies") {
        reject_unknown(j, path, {"type", "b0", "anomalies"});
        sim::UniformPlusAnomalies f;
        f.b0 = get_vec3(j, "b0", path, Vec3(20.0, 0.0, -44.0));
        if (j.contains("anomalies")) {
            const auto& arr = j.at("anomalies");
            if (!arr.is_array()) fail(path + ".anomalies", "expected an array");
            for (std::size_t i = 0; i < arr.size(); ++i) {
                f.anomalies.push_back(parse_dipole_body(
                    arr[i], path + ".anomalies[" + std::to_string(i) + "]"));
            }
        }
        return f;
    }
    fail(path + ".type", "unknown field type '" + type + "'");
}

sim::TrajectoryVariant parse_trajectory(const json& j, const std::string& path) {
    if (!j.is_object() || !j.contains("type")) fail(path + ".type", "required");
    const std::string type = j.at("type").get<std::string>();
    if (type == "stationary") {
        reject_unknown(j, path, {"type", "position", "attitude_rpy_deg", "duration_s"});
        sim::Stationary t;
        t.position = get_vec3(j, "position", path, Vec3::Zero());
        t.attitude = get_rpy_deg(j, path);
        t.duration = get_number(j, "duration_s", path, 10.0);
        return t;
    }
    if (type == "line") {
        reject_unknown(j, path,
                       {"type", "start", "velocity", "duration_s", "attitude_rpy_deg"});
        sim::Line t;
        t.start = get_vec3(j, "start", path, Vec3::Zero());
        t.velocity = get_vec3(j, "velocity", path, Vec3::UnitX());
        t.duration = get_number(j, "duration_s", path, 10.0);
        t.attitude = get_rpy_deg(j, path);
        return t;
    }
    if (type == "circle") {
        reject_unknown(j, path,
                       {"type", "center", "radius", "speed", "plane", "duration_s",
                        "lead_in_s", "ramp_s"});
        sim::Circle t;
        t.center = get_vec3(j, "center", path, Vec3::Zero());
        t.radius = get_number(j, "radius", path, 1.0);
        t.speed = get_number(j, "speed", path, 0.5);
        t.duration = get_number(j, "duration_s", path, 0.0);
        t.lead_in_s = get_number(j, "lead_in_s", path, 0.0);
        t.ramp_s = get_number(j, "ramp_s", path, 0.0);
        const std::string plane = j.value("plane", "xy");
        if (plane == "xy") t.plane = sim::CirclePlane::XY;
        else if (plane == "xz") t.plane = sim::CirclePlane::XZ;
        else if (plane == "yz") t.plane = sim::CirclePlane::YZ;
        else fail(path + ".plane", "expected xy, xz or yz");
        return t;
    }
    if (type == "stairs") {
        reject_unknown(j, path,
                       {"type", "step_length", "step_height", "cadence_hz", "count"});
        sim::Stairs t;
        t.step_length = get_number(j, "step_length", path, 0.3);
        t.step_height = get_number(j, "step_height", path, 0.17);
        t.cadence_hz = get_number(j, "cadence_hz", path, 1.0);
        t.count = static_cast<int>(get_number(j, "count", path, 10));
        return t;
    }
    if (type == "waypoints") {
        reject_unknown(j, path, {"type", "points"});
        if (!j.contains("points") || !j.at("points").is_array()) {
            fail(path + ".points", "expected an array of waypoints");
        }
        sim::Waypoints t;
        const auto& arr = j.at("points");
        for (std::size_t i = 0; i < arr.size(); ++i) {
            const std::string wp_path = path + ".points[" + std::to_string(i) + "]";
            const auto& w = arr[i];
            reject_unknown(w, wp_path, {"t", "position", "attitude_rpy_deg"});
            sim::Waypoint wp;
            wp.t = get_number(w, "t", wp_path, 0.0);
            wp.position = get_vec3(w, "position", wp_path, Vec3::Zero());
            wp.attitude = get_rpy_deg(w, wp_path);
            t.points.push_back(wp);
        }
        return t;
    }
    fail(path + ".type", "unknown trajectory type '" + type + "'");
}

FilterConfig parse_filters(const json& j, const std::string& path) {
    reject_unknown(j, path,
                   {"enabled", "cutoff_hz", "q_acc", "r_mag_pos", "f_s",
                    "offset_window_s"});
    FilterConfig f;
    if (j.contains("enabled")) {
        if (!j.at("enabled").is_boolean()) fail(path + ".enabled", "expected a bool");
        f.enabled = j.at("enabled").get<bool>();
    }
    f.cutoff_hz = get_number(j, "cutoff_hz", path, f.cutoff_hz);
    f.q_acc = get_number(j, "q_acc", path, f.q_acc);
    f.r_mag_pos = get_number(j, "r_mag_pos", path, f.r_mag_pos);
    f.f_s = get_number(j, "f_s", path, f.f_s);
    f.offset_window_s = get_number(j, "offset_window_s", path, f.offset_window_s);
    if (f.cutoff_hz <= 0) fail(path + ".cutoff_hz", "must be > 0");
    if (f.q_acc <= 0) fail(path + ".q_acc", "must be > 0");
    if (f.r_mag_pos <= 0) fail(path + ".r_mag_pos", "must be > 0");
    if (f.f_s < 0) fail(path + ".f_s", "must be >= 0");
    return f;
}

InitConfig parse_init(const json& j, const std::string& path) {
    reject_unknown(j, path,
                   {"static_window_s", "acc_tolerance", "gyro_max", "epoch_window_s"});
    InitConfig i;
    i.static_window_s = get_number(j, "static_window_s", path, i.static_window_s);
    i.acc_tolerance = get_number(j, "acc_tolerance", path, i.acc_tolerance);
    i.gyro_max = get_number(j, "gyro_max", path, i.gyro_max);
    i.epoch_window_s = get_number(j, "epoch_window_s", path, i.epoch_window_s);
    if (i.static_window_s <= 0) fail(path + ".static_window_s", "must be > 0");
    return i;
}

} // namespace

RunConfig config_from_json(const json& j) {
    if (!j.is_object()) throw ConfigError("config root must be a JSON object");
    reject_unknown(j, "",
                   {"environment", "sample_rate_hz", "seed", "noise", "distortion",
                    "field", "sensors", "filters", "init"});

    RunConfig cfg;
    cfg.echo = j;

    if (j.contains("environment")) {
        cfg.environment = parse_environment(j.at("environment"), "environment");
    }
    cfg.sample_rate_hz = get_number(j, "sample_rate_hz", "", cfg.sample_rate_hz);
    if (cfg.sample_rate_hz < 10.0) {
        throw ConfigError("config field 'sample_rate_hz': must be >= 10");
    }
    if (j.contains("seed")) {
        if (!j.at("seed").is_number_unsigned()) {
            throw ConfigError("config field 'seed': expected an unsigned integer");
        }
        cfg.seed = j.at("seed").get<std::uint64_t>();
    }
    if (j.contains("noise")) cfg.noise = parse_noise(j.at("noise"), "noise");
    if (j.contains("distortion")) {
        cfg.distortion = parse_distortion(j.at("distortion"), "distortion");
    }
    if (j.contains("field")) cfg.field = parse_field(j.at("field"), "field");
    if (j.contains("sensors")) {
        const auto& arr = j.at("sensors");
        if (!arr.is_array()) throw ConfigError("config field 'sensors': expected an array");
        std::set<std::string> ids;
        for (std::size_t i = 0; i < arr.size(); ++i) {
            const std::string path = "sensors[" + std::to_string(i) + "]";
            const auto& s = arr[i];
            reject_unknown(s, path, {"id", "trajectory"});
            SensorConfig sc;
            sc.id = s.value("id", "imu" + std::to_string(i));
            if (!ids.insert(sc.id).second) {
                fail(path + ".id", "duplicate sensor id '" + sc.id + "'");
            }
            if (!s.contains("trajectory")) fail(path + ".trajectory", "required");
            sc.trajectory = parse_trajectory(s.at("trajectory"), path + ".trajectory");
            cfg.sensors.push_back(std::move(sc));
        }
    }
    if (j.contains("filters")) cfg.filters = parse_filters(j.at("filters"), "filters");
    if (j.contains("init")) cfg.init = parse_init(j.at("init"), "init");
    return cfg;
}

RunConfig load_config(const std::filesystem::path& path) {
    const std::string text = io::read_file(path);
    RunConfig cfg = config_from_json(io::parse_json(text, path.string()));
    cfg.hash_hex = io::fnv1a64_hex(text);
    return cfg;
}

} // namespace geomag::cli
