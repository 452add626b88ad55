#include "geomag/io.hpp"

#include <unistd.h>

#include <cerrno>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <sstream>
#include <system_error>

#include "geomag/errors.hpp"

namespace geomag::io {

namespace {

std::string path_str(const std::filesystem::path& p) { return p.string(); }

void require_keys(const json& j, std::initializer_list<const char*> keys,
                  const std::string& context) {
    for (const char* k : keys) {
        if (!j.contains(k)) {
            throw ParseError(context + ": missing required key '" + k + "'");
        }
    }
}

double number_at(const json& j, const char* key, const std::string& context) {
    const auto& v = j.at(key);
    if (!v.is_number()) {
        throw ParseError(context + ": key '" + key + "' is not a number");
    }
    return v.get<double>();
}

} // namespace

std::string read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw ParseError("cannot open " + path_str(path) + ": " +
                         std::strerror(errno));
    }
    std::ostringstream buf;
    buf << in.rdbuf();
    return std::move(buf).str();
}

void atomic_write_file(const std::filesystem::path& path, std::string_view content) {
    std::filesystem::path dir = path.parent_path();
    if (dir.empty()) dir = ".";
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);

    const std::filesystem::path tmp =
        dir / (path.filename().string() + ".tmp" + std::to_string(::getpid()));
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) {
            throw ParseError("cannot open " + path_str(tmp) + " for writing: " +
                             std::strerror(errno));
        }
        out.write(content.data(), static_cast<std::streamsize>(content.size()));
        out.flush();
        if (!out) {
            throw ParseError("short write to " + path_str(tmp));
        }
    }
    std::filesystem::rename(tmp, path, ec);
    if (ec) {
        std::filesystem::remove(tmp);
        throw ParseError("cannot rename " + path_str(tmp) + " to " +
                         path_str(path) + ": " + ec.message());
    }
}

std::uint64_t fnv1a64(std::string_view bytes) {
    std::uint64_t h = 14695981039346656037ULL;
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 1099511628211ULL;
    }
    return h;
}

std::string fnv1a64_hex(std::string_view bytes) {
    char buf[17];
    std::snprintf(buf, sizeof(buf), "%016llx",
                  static_cast<unsigned long long>(fnv1a64(bytes)));
    return std::string(buf);
}

std::string file_hash_hex(const std::filesystem::path& path) {
    return fnv1a64_hex(read_file(path));
}

json vec3_to_json(const Vec3& v) { return json::array({v.x(), v.y(), v.z()}); }

Vec3 vec3_from_json(const json& j, const std::string& context) {
    if (!j.is_array() || j.size() != 3 || !j[0].is_number() ||
        !j[1].is_number() || !j[2].is_number()) {
        throw ParseError(context + ": expected [x, y, z] number triple");
    }
    return Vec3(j[0].get<double>(), j[1].get<double>(), j[2].get<double>());
}

json mat3_to_json(const Mat3& m) {
    json rows = json::array();
    for (int r = 0; r < 3; ++r) {
        rows.push_back(json::array({m(r, 0), m(r, 1), m(r, 2)}));
    }
    return rows;
}

Mat3 mat3_from_json(const json& j, const std::string& context) {
    if (!j.is_array() || j.size() != 3) {
        throw ParseError(context + ": expected 3 rows of 3 numbers");
    }
    Mat3 m;
    for (int r = 0; r < 3; ++r) {
        const Vec3 row = vec3_from_json(j[static_cast<std::size_t>(r)],
                                        context + " row " + std::to_string(r));
        m.row(r) = row.transpose();
    }
    return m;
}

json parse_json(std::string_view text, const std::string& context) {
    try {
        return json::parse(text);
    } catch (const json::parse_error& e) {
        throw ParseError(context + ": " + e.what());
    }
}

// ---- trace JSONL -----------------------------------------------------------

std::vector<strapdown::ImuSample> read_trace(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) {
        throw ParseError("cannot open trace " + path_str(path) + ": " +
                         std::strerror(errno));
    }
    std::vector<strapdown::ImuSample> out;
    std::map<std::string, double> last_t;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        const std::string context = path_str(path) + ":" + std::to_string(lineno);
        const json j = parse_json(line, context);
        require_keys(j, {"t", "sensor", "acc", "gyro", "mag"}, context);

        strapdown::ImuSample s;
        s.t = number_at(j, "t", context);
        if (!j.at("sensor").is_string()) {
            throw ParseError(context + ": key 'sensor' is not a string");
        }
        s.sensor_id = j.at("sensor").get<std::string>();
        s.acc = vec3_from_json(j.at("acc"), context + " 'acc'");
        s.gyro = vec3_from_json(j.at("gyro"), context + " 'gyro'");
        s.mag = vec3_from_json(j.at("mag"), context + " 'mag'");

        auto [it, inserted] = last_t.try_emplace(s.sensor_id, s.t);
        if (!inserted) {
            if (s.t < it->second) {
                throw ParseError(context + ": timestamp decreases for sensor '" +
                                 s.sensor_id + "'");
            }
            it->second = s.t;
        }
        out.push_back(std::move(s));
    }
    return out;
}

void write_trace(const std::filesystem::path& path,
                 std::span<const strapdown::ImuSample> samples) {
    std::ostringstream buf;
    for (const auto& s : samples) {
        json j{{"t", s.t},
               {"sensor", s.sensor_id},
               {"acc", vec3_to_json(s.acc)},
               {"gyro", vec3_to_json(s.gyro)},
               {"mag", vec3_to_json(s.mag)}};
        buf << j.dump() << '\n';
    }
    atomic_write_file(path, buf.str());
}

// ---- calibration JSON ------------------------------------------------------

json calibration_to_json(const magcal::MagCalibration& cal) {
    return json{{"C", mat3_to_json(cal.soft_iron)},
                {"b_H", vec3_to_json(cal.hard_iron)},
                {"field_magnitude", cal.field_magnitude},
                {"fit_residual", cal.fit_residual}};
}

magcal::MagCalibration calibration_from_json(const json& j) {
    require_keys(j, {"C", "b_H", "field_magnitude", "fit_residual"}, "calibration");
    magcal::MagCalibration cal;
    cal.soft_iron = mat3_from_json(j.at("C"), "calibration 'C'");
    cal.hard_iron = vec3_from_json(j.at("b_H"), "calibration 'b_H'");
    cal.field_magnitude = number_at(j, "field_magnitude", "calibration");
    cal.fit_residual = number_at(j, "fit_residual", "calibration");
    return cal;
}

magcal::MagCalibration read_calibration(const std::filesystem::path& path) {
    return calibration_from_json(parse_json(read_file(path), path_str(path)));
}

void write_calibration(const std::filesystem::path& path,
                       const magcal::MagCalibration& cal) {
    atomic_write_file(path, calibration_to_json(cal).dump(2) + "\n");
}

// ---- anchor JSON -----------------------------------------------------------

json anchor_to_json(const AnchorDoc& doc) {
    json sensors = json::object();
    for (const auto& [id, tf] : doc.result.transforms) {
        json entry{{"R", mat3_to_json(tf.r_1n.matrix())},
                   {"D_1n", vec3_to_json(tf.d_1n)}};
        if (auto it = doc.epochs.find(id); it != doc.epochs.end()) {
            entry["t_init"] = it->second;
        }
        sensors[id] = std::move(entry);
    }
    return json{{"origin_sensor", doc.result.anchor.origin_sensor},
                {"t0", doc.result.anchor.t0},
                {"R_world", mat3_to_json(doc.result.anchor.r_world.matrix())},
                {"heading_only", doc.result.heading_only},
                {"sensors", sensors}};
}

AnchorDoc anchor_from_json(const json& j) {
    require_keys(j, {"origin_sensor", "t0", "R_world", "sensors"}, "anchor");
    AnchorDoc doc;
    doc.result.anchor.origin_sensor = j.at("origin_sensor").get<std::string>();
    doc.result.anchor.t0 = number_at(j, "t0", "anchor");
    doc.result.anchor.r_world = Rotation::from_matrix(
        mat3_from_json(j.at("R_world"), "anchor 'R_world'"), 1e-6);
    doc.result.heading_only = j.value("heading_only", false);
    for (const auto& [id, entry] : j.at("sensors").items()) {
        require_keys(entry, {"R", "D_1n"}, "anchor sensor '" + id + "'");
        wcs::RelativeTransform tf;
        tf.r_1n = Rotation::from_matrix(
            mat3_from_json(entry.at("R"), "anchor sensor R"), 1e-6);
        tf.d_1n = vec3_from_json(entry.at("D_1n"), "anchor sensor D_1n");
        doc.result.transforms[id] = tf;
        if (entry.contains("t_init")) {
            doc.epochs[id] = entry.at("t_init").get<double>();
        }
    }
    return doc;
}

AnchorDoc read_anchor(const std::filesystem::path& path) {
    return anchor_from_json(parse_json(read_file(path), path_str(path)));
}

void write_anchor(const std::filesystem::path& path, const AnchorDoc& doc) {
    atomic_write_file(path, anchor_to_json(doc).dump(2) + "\n");
}

// ---- pose JSONL ------------------------------------------------------------

std::vector<PoseRecord> read_poses(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) {
        throw ParseError("cannot open poses " + path_str(path) + ": " +
                         std::strerror(errno));
    }
    std::vector<PoseRecord> out;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        const std::string context = path_str(path) + ":" + std::to_string(lineno);
        const json j = parse_json(line, context);
        require_keys(j, {"t", "sensor", "q", "v", "s"}, context);

        PoseRecord r;
        r.t = number_at(j, "t", context);
        r.sensor = j.at("sensor").get<std::string>();
        const auto& q = j.at("q");
        if (!q.is_array() || q.size() != 4) {
            throw ParseError(context + ": 'q' must be [w, x, y, z]");
        }
        r.q = Quaternion{q[0].get<double>(), q[1].get<double>(),
                         q[2].get<double>(), q[3].get<double>()};
        r.v = vec3_from_json(j.at("v"), context + " 'v'");
        r.s = vec3_from_json(j.at("s"), context + " 's'");
        out.push_back(std::move(r));
    }
    return out;
}

void write_poses(const std::filesystem::path& path,
                 std::span<const PoseRecord> poses) {
    std::ostringstream buf;
    for (const auto& r : poses) {
        json j{{"t", r.t},
               {"sensor", r.sensor},
               {"q", json::array({r.q.w, r.q.x, r.q.y, r.q.z})},
               {"v", vec3_to_json(r.v)},
               {"s", vec3_to_json(r.s)}};
        buf << j.dump() << '\n';
    }
    atomic_write_file(path, buf.str());
}

// ---- ground-truth JSONL ----------------------------------------------------

std::vector<sim::GroundTruth> read_truth(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) {
        throw ParseError("cannot open truth " + path_str(path) + ": " +
                         std::strerror(errno));
    }
    std::map<std::string, sim::GroundTruth> by_sensor;
    std::vector<std::string> order;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        const std::string context = path_str(path) + ":" + std::to_string(lineno);
        const json j = parse_json(line, context);
        require_keys(j,
                     {"t", "sensor", "q", "v", "s", "a_world", "omega_body",
                      "b_world", "b_body", "grad_b"},
                     context);

        sim::GroundTruthSample g;
        g.t = number_at(j, "t", context);
        const auto& q = j.at("q");
        if (!q.is_array() || q.size() != 4) {
            throw ParseError(context + ": 'q' must be [w, x, y, z]");
        }
        g.q = Quaternion{q[0].get<double>(), q[1].get<double>(),
                         q[2].get<double>(), q[3].get<double>()};
        g.v = vec3_from_json(j.at("v"), context + " 'v'");
        g.s = vec3_from_json(j.at("s"), context + " 's'");
        g.a_world = vec3_from_json(j.at("a_world"), context + " 'a_world'");
        g.omega_body = vec3_from_json(j.at("omega_body"), context + " 'omega_body'");
        g.b_world = vec3_from_json(j.at("b_world"), context + " 'b_world'");
        g.b_body = vec3_from_json(j.at("b_body"), context + " 'b_body'");
        g.grad_b = mat3_from_json(j.at("grad_b"), context + " 'grad_b'");

        const std::string sensor = j.at("sensor").get<std::string>();
        auto [it, inserted] = by_sensor.try_emplace(sensor);
        if (inserted) {
            it->second.sensor_id = sensor;
            order.push_back(sensor);
        }
        it->second.samples.push_back(g);
    }
    std::vector<sim::GroundTruth> out;
    out.reserve(order.size());
    for (const auto& id : order) out.push_back(std::move(by_sensor.at(id)));
    return out;
}

void write_truth(const std::filesystem::path& path,
                 std::span<const sim::GroundTruth> truths) {
    std::ostringstream buf;
    // Merge by time across sensors so the file reads chronologically.
    std::vector<std::size_t> cursor(truths.size(), 0);
    while (true) {
        std::size_t best = truths.size();
        double best_t = 0.0;
        for (std::size_t i = 0; i < truths.size(); ++i) {
            if (cursor[i] >= truths[i].samples.size()) continue;
            const double t = truths[i].samples[cursor[i]].t;
            if (best == truths.size() || t < best_t) {
                best = i;
                best_t = t;
            }
        }
        if (best == truths.size()) break;
        const auto& g = truths[best].samples[cursor[best]++];
        json j{{"t", g.t},
               {"sensor", truths[best].sensor_id},
               {"q", json::array({g.q.w, g.q.x, g.q.y, g.q.z})},
               {"v", vec3_to_json(g.v)},
               {"s", vec3_to_json(g.s)},
               {"a_world", vec3_to_json(g.a_world)},
               {"omega_body", vec3_to_json(g.omega_body)},
               {"b_world", vec3_to_json(g.b_world)},
               {"b_body", vec3_to_json(g.b_body)},
               {"grad_b", mat3_to_json(g.grad_b)}};
        buf << j.dump() << '\n';
    }
    atomic_write_file(path, buf.str());
}

// ---- point clouds ----------------------------------------------------------

namespace {

cloud::PointCloud read_cloud_xyz(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) {
        throw ParseError("cannot open cloud " + path_str(path) + ": " +
                         std::strerror(errno));
    }
    cloud::PointCloud out;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        std::istringstream ls(line);
        double x, y, z;
        if (!(ls >> x >> y >> z)) {
            throw ParseError(path_str(path) + ":" + std::to_string(lineno) +
                             ": expected 'x y z'");
        }
        out.points.emplace_back(x, y, z);
    }
    return out;
}

cloud::PointCloud read_cloud_ply(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) {
        throw ParseError("cannot open cloud " + path_str(path) + ": " +
                         std::strerror(errno));
    }
    std::string line;
    std::size_t lineno = 0;
    std::size_t vertex_count = 0;
    bool in_header = true;
    bool saw_magic = false;

    while (in_header && std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (lineno == 1) {
            if (line != "ply") {
                throw ParseError(path_str(path) + ": not a PLY file");
            }
            saw_magic = true;
            continue;
        }
        if (line.rfind("format", 0) == 0) {
            if (line.find("ascii") == std::string::npos) {
                throw ParseError(path_str(path) + ": only ascii PLY is supported");
            }
        } else if (line.rfind("element vertex", 0) == 0) {
            std::istringstream ls(line);
            std::string e, v;
            ls >> e >> v >> vertex_count;
        } else if (line.rfind("element", 0) == 0) {
            throw ParseError(path_str(path) + ": only vertex elements are supported");
        } else if (line == "end_header") {
            in_header = false;
        }
    }
    if (!saw_magic || in_header) {
        throw ParseError(path_str(path) + ": truncated PLY header");
    }

    cloud::PointCloud out;
    out.points.reserve(vertex_count);
    for (std::size_t i = 0; i < vertex_count; ++i) {
        if (!std::getline(in, line)) {
            throw ParseError(path_str(path) + ": expected " +
                             std::to_string(vertex_count) + " vertices, got " +
                             std::to_string(i));
        }
        ++lineno;
        std::istringstream ls(line);
        double x, y, z;
        if (!(ls >> x >> y >> z)) {
            throw ParseError(path_str(path) + ":" + std::to_string(lineno) +
                             ": bad vertex line");
        }
        out.points.emplace_back(x, y, z);
    }
    return out;
}

} // namespace

cloud::PointCloud read_cloud(const std::filesystem::path& path) {
    const std::string ext = path.extension().string();
    cloud::PointCloud c =
        (ext == ".ply" || ext == ".PLY") ? read_cloud_ply(path) : read_cloud_xyz(path);
    c.sensor_id = path.stem().string();
    return c;
}

void write_cloud_xyz(const std::filesystem::path& path, const cloud::PointCloud& c) {
    std::ostringstream buf;
    buf.precision(9);
    for (const Vec3& p : c.points) {
        buf << p.x() << ' ' << p.y() << ' ' << p.z() << '\n';
    }
    atomic_write_file(path, buf.str());
}

void write_cloud_ply(const std::filesystem::path& path, const cloud::PointCloud& c) {
    std::ostringstream buf;
    buf.precision(9);
    buf << "ply\nformat ascii 1.0\nelement vertex " << c.points.size()
        << "\nproperty double x\nproperty double y\nproperty double z\nend_header\n";
    for (const Vec3& p : c.points) {
        buf << p.x() << ' ' << p.y() << ' ' << p.z() << '\n';
    }
    atomic_write_file(path, buf.str());
}

} // namespace geomag::io
