#include "geomag/io.hpp"

#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "doctest.h"
#include "geomag/errors.hpp"

using namespace geomag;
namespace fs = std::filesystem;

namespace {

fs::path scratch_dir() {
    static const fs::path dir = [] {
        fs::path p = fs::temp_directory_path() / "geomag_io_tests";
        fs::remove_all(p);
        fs::create_directories(p);
        return p;
    }();
    return dir;
}

void write_text(const fs::path& path, const std::string& text) {
    std::ofstream out(path);
    out << text;
}

strapdown::ImuSample make_sample(double t, const std::string& id) {
    strapdown::ImuSample s;
    s.t = t;
    s.sensor_id = id;
    s.acc = Vec3(0.123456789012345, -9.81, 3.0e-7);
    s.gyro = Vec3(1e-3, 2e-3, -3e-3) * (1.0 + t);
    s.mag = Vec3(21.5, -3.25, -44.0) + Vec3(t, 0, 0);
    return s;
}

} // namespace

TEST_CASE("trace files round trip exactly") {
    std::vector<strapdown::ImuSample> samples;
    for (int i = 0; i < 5; ++i) {
        samples.push_back(make_sample(0.01 * i, "imu0"));
        samples.push_back(make_sample(0.01 * i + 0.002, "imu1"));
    }

    const fs::path path = scratch_dir() / "trace.jsonl";
    io::write_trace(path, samples);
    const std::vector<strapdown::ImuSample> back = io::read_trace(path);

    REQUIRE(back.size() == samples.size());
    for (std::size_t i = 0; i < samples.size(); ++i) {
        CHECK(back[i].t == samples[i].t);
        CHECK(back[i].sensor_id == samples[i].sensor_id);
        CHECK((back[i].acc - samples[i].acc).norm() == 0.0);
        CHECK((back[i].gyro - samples[i].gyro).norm() == 0.0);
        CHECK((back[i].mag - samples[i].mag).norm() == 0.0);
    }
}

TEST_CASE("trace reader ignores unknown keys") {
    const fs::path path = scratch_dir() / "extra_keys.jsonl";
    write_text(path,
               R"({"t": 0.0, "sensor": "imu0", "acc": [0,0,9.81], "gyro": [0,0,0], )"
               R"("mag": [20,0,-44], "temperature": 23.5, "flags": ["a"]})"
               "\n");
    const auto samples = io::read_trace(path);
    REQUIRE(samples.size() == 1);
    CHECK(samples[0].mag.x() == 20.0);
}

TEST_CASE("trace reader reports the offending line") {
    const fs::path path = scratch_dir() / "missing_key.jsonl";
    write_text(path,
               R"({"t": 0.0, "sensor": "imu0", "acc": [0,0,9.81], "gyro": [0,0,0], "mag": [20,0,-44]})"
               "\n"
               R"({"t": 0.01, "sensor": "imu0", "gyro": [0,0,0], "mag": [20,0,-44]})"
               "\n");
    try {
        io::read_trace(path);
        FAIL("expected ParseError");
    } catch (const ParseError& e) {
        const std::string msg = e.what();
        CHECK(msg.find(":2") != std::string::npos);
        CHECK(msg.find("acc") != std::string::npos);
    }
}

TEST_CASE("trace timestamps must not decrease per sensor") {
    // Interleaved sensors may step backwards relative to each other.
    const fs::path ok_path = scratch_dir() / "interleaved.jsonl";
    write_text(ok_path,
               R"({"t": 0.5, "sensor": "imu0", "acc": [0,0,9.81], "gyro": [0,0,0], "mag": [20,0,-44]})"
               "\n"
               R"({"t": 0.1, "sensor": "imu1", "acc": [0,0,9.81], "gyro": [0,0,0], "mag": [20,0,-44]})"
               "\n");
    CHECK(io::read_trace(ok_path).size() == 2);

    const fs::path bad_path = scratch_dir() / "backwards.jsonl";
    write_text(bad_path,
               R"({"t": 0.5, "sensor": "imu0", "acc": [0,0,9.81], "gyro": [0,0,0], "mag": [20,0,-44]})"
               "\n"
               R"({"t": 0.4, "sensor": "imu0", "acc": [0,0,9.81], "gyro": [0,0,0], "mag": [20,0,-44]})"
               "\n");
    CHECK_THROWS_AS(io::read_trace(bad_path), ParseError);
}

TEST_CASE("calibration files round trip") {
    magcal::MagCalibration cal;
    cal.soft_iron << 1.2, 0.01, 0.0, 0.01, 1.0, -0.02, 0.0, -0.02, 0.8;
    cal.hard_iron = Vec3(10.0, -5.0, 3.0);
    cal.field_magnitude = 48.25;
    cal.fit_residual = 1.25e-4;

    const fs::path path = scratch_dir() / "cal.json";
    io::write_calibration(path, cal);
    const magcal::MagCalibration back = io::read_calibration(path);
    CHECK((back.soft_iron - cal.soft_iron).cwiseAbs().maxCoeff() == 0.0);
    CHECK((back.hard_iron - cal.hard_iron).norm() == 0.0);
    CHECK(back.field_magnitude == cal.field_magnitude);
    CHECK(back.fit_residual == cal.fit_residual);
}

TEST_CASE("calibration reader requires its schema") {
    const fs::path path = scratch_dir() / "cal_missing.json";
    write_text(path, R"({"C": [[1,0,0],[0,1,0],[0,0,1]], "b_H": [0,0,0]})");
    CHECK_THROWS_AS(io::read_calibration(path), ParseError);
}

TEST_CASE("anchor documents round trip") {
    io::AnchorDoc doc;
    doc.result.anchor.origin_sensor = "imu0";
    doc.result.anchor.t0 = 2.0;
    doc.result.anchor.r_world = Rotation::about_z(0.4);
    doc.result.heading_only = true;
    doc.result.transforms["imu0"] = wcs::RelativeTransform{};
    wcs::RelativeTransform t1;
    t1.d_1n = Vec3(0.8, 0.0, 0.3);
    t1.r_1n = Rotation::about_z(-0.7) * Rotation::about_x(0.05);
    doc.result.transforms["imu1"] = t1;
    doc.epochs["imu0"] = 2.0;
    doc.epochs["imu1"] = 2.1;

    const fs::path path = scratch_dir() / "anchor.json";
    io::write_anchor(path, doc);
    const io::AnchorDoc back = io::read_anchor(path);

    CHECK(back.result.anchor.origin_sensor == "imu0");
    CHECK(back.result.anchor.t0 == 2.0);
    CHECK(back.result.heading_only);
    CHECK(rotation_angle_between(back.result.anchor.r_world,
                                 doc.result.anchor.r_world) < 1e-9);
    REQUIRE(back.result.transforms.size() == 2);
    CHECK((back.result.transforms.at("imu1").d_1n - t1.d_1n).norm() == 0.0);
    CHECK(rotation_angle_between(back.result.transforms.at("imu1").r_1n, t1.r_1n) <
          1e-9);
    CHECK(back.epochs.at("imu1") == 2.1);
}

TEST_CASE("pose files round trip") {
    std::vector<io::PoseRecord> poses;
    for (int i = 0; i < 4; ++i) {
        io::PoseRecord rec;
        rec.t = 0.1 * i;
        rec.sensor = i % 2 ? "imu1" : "imu0";
        rec.q = quat_from_axis_angle(Vec3(0, 0, 1), 0.2 * i);
        rec.v = Vec3(0.1, -0.2, 0.3) * i;
        rec.s = Vec3(1.0, 2.0, -0.5) * i;
        poses.push_back(rec);
    }

    const fs::path path = scratch_dir() / "poses.jsonl";
    io::write_poses(path, poses);
    const auto back = io::read_poses(path);
    REQUIRE(back.size() == poses.size());
    for (std::size_t i = 0; i < poses.size(); ++i) {
        CHECK(back[i].t == poses[i].t);
        CHECK(back[i].sensor == poses[i].sensor);
        CHECK(back[i].q.w == poses[i].q.w);
        CHECK(back[i].q.z == poses[i].q.z);
        CHECK((back[i].v - poses[i].v).norm() == 0.0);
        CHECK((back[i].s - poses[i].s).norm() == 0.0);
    }
}

TEST_CASE("ground-truth files round trip") {
    sim::GroundTruth truth;
    truth.sensor_id = "imu0";
    for (int i = 0; i < 3; ++i) {
        sim::GroundTruthSample s;
        s.t = 0.05 * i;
        s.q = quat_from_axis_angle(Vec3(1, 0, 0), 0.1 * i);
        s.v = Vec3(0.5, 0, 0);
        s.s = Vec3(0.5 * s.t, 0, 0);
        s.a_world = Vec3(0, 0.01, 0);
        s.omega_body = Vec3(0.1, 0, 0);
        s.b_world = Vec3(20, 0, -44);
        s.b_body = Vec3(19.5, 1.0, -44.1);
        s.grad_b << 1, 2, 3, 2, 4, 5, 3, 5, -5;
        truth.samples.push_back(s);
    }

    const fs::path path = scratch_dir() / "truth.jsonl";
    io::write_truth(path, std::vector<sim::GroundTruth>{truth});
    const auto back = io::read_truth(path);
    REQUIRE(back.size() == 1);
    REQUIRE(back[0].samples.size() == 3);
    CHECK(back[0].sensor_id == "imu0");
    const auto& s = back[0].samples[2];
    CHECK(s.t == 0.1);
    CHECK(s.q.x == truth.samples[2].q.x);
    CHECK((s.b_body - truth.samples[2].b_body).norm() == 0.0);
    CHECK((s.grad_b - truth.samples[2].grad_b).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("xyz clouds round trip") {
    cloud::PointCloud c;
    c.points = {Vec3(0.25, -1.5, 3.0), Vec3(1e-7, 2.5, -0.125), Vec3(4, 5, 6)};

    const fs::path path = scratch_dir() / "cloud.xyz";
    io::write_cloud_xyz(path, c);
    const cloud::PointCloud back = io::read_cloud(path);
    REQUIRE(back.points.size() == 3);
    for (std::size_t i = 0; i < 3; ++i) {
        CHECK((back.points[i] - c.points[i]).norm() < 1e-12);
    }
}

TEST_CASE("ply clouds round trip") {
    cloud::PointCloud c;
    c.points = {Vec3(0.5, 0.25, -0.75), Vec3(-2, 3, 4)};

    const fs::path path = scratch_dir() / "cloud.ply";
    io::write_cloud_ply(path, c);
    const cloud::PointCloud back = io::read_cloud(path);
    REQUIRE(back.points.size() == 2);
    for (std::size_t i = 0; i < 2; ++i) {
        CHECK((back.points[i] - c.points[i]).norm() < 1e-12);
    }
}

TEST_CASE("ply reader accepts vertices only") {
    const fs::path path = scratch_dir() / "faces.ply";
    write_text(path,
               "ply\nformat ascii 1.0\nelement vertex 1\n"
               "property float x\nproperty float y\nproperty float z\n"
               "element face 1\nproperty list uchar int vertex_index\n"
               "end_header\n0 0 0\n3 0 0 0\n");
    CHECK_THROWS_AS(io::read_cloud(path), ParseError);

    const fs::path not_ply = scratch_dir() / "not_a.ply";
    write_text(not_ply, "solid nope\n");
    CHECK_THROWS_AS(io::read_cloud(not_ply), ParseError);
}

TEST_CASE("atomic writes replace without leftovers") {
    const fs::path dir = scratch_dir() / "atomic";
    fs::create_directories(dir);
    const fs::path target = dir / "out.txt";

    io::atomic_write_file(target, "first");
    io::atomic_write_file(target, "second");
    CHECK(io::read_file(target) == "second");

    std::size_t entries = 0;
    for (const auto& entry : fs::directory_iterator(dir)) {
        (void)entry;
        ++entries;
    }
    CHECK(entries == 1);
}

TEST_CASE("fnv1a64 matches its reference vectors") {
    CHECK(io::fnv1a64("") == 0xcbf29ce484222325ULL);
    CHECK(io::fnv1a64_hex("") == "cbf29ce484222325");
    CHECK(io::fnv1a64_hex("a") == "af63dc4c8601ec8c");
    CHECK(io::fnv1a64_hex("hello").size() == 16);

    const fs::path path = scratch_dir() / "hashed.txt";
    write_text(path, "a");
    CHECK(io::file_hash_hex(path) == "af63dc4c8601ec8c");
}
