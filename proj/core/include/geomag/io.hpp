#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "geomag/cloud_match.hpp"
#include "geomag/magcal.hpp"
#include "geomag/simkit.hpp"
#include "geomag/strapdown.hpp"
#include "geomag/wcs_align.hpp"

namespace geomag::io {

using json = nlohmann::json;

// ---- generic helpers -------------------------------------------------------

std::string read_file(const std::filesystem::path& path);

// Whole-file atomic write: temp file in the target directory, then rename.
void atomic_write_file(const std::filesystem::path& path, std::string_view content);

std::uint64_t fnv1a64(std::string_view bytes);
std::string fnv1a64_hex(std::string_view bytes);
std::string file_hash_hex(const std::filesystem::path& path);

json vec3_to_json(const Vec3& v);
Vec3 vec3_from_json(const json& j, const std::string& context);
json mat3_to_json(const Mat3& m);
Mat3 mat3_from_json(const json& j, const std::string& context);

// Parses with ParseError carrying the given context on failure.
json parse_json(std::string_view text, const std::string& context);

// ---- trace JSONL -----------------------------------------------------------
// One sample per line:
//   {"t": s, "sensor": id, "acc": [x,y,z], "gyro": [x,y,z], "mag": [x,y,z]}
// Unknown keys are ignored; a missing required key raises ParseError with the
// line number. Timestamps must be non-decreasing per sensor.

std::vector<strapdown::ImuSample> read_trace(const std::filesystem::path& path);
void write_trace(const std::filesystem::path& path,
                 std::span<const strapdown::ImuSample> samples);

// ---- calibration JSON ------------------------------------------------------
// {"C": [[..]x3], "b_H": [x,y,z], "field_magnitude": f, "fit_residual": f}

json calibration_to_json(const magcal::MagCalibration& cal);
magcal::MagCalibration calibration_from_json(const json& j);
magcal::MagCalibration read_calibration(const std::filesystem::path& path);
void write_calibration(const std::filesystem::path& path,
                       const magcal::MagCalibration& cal);

// ---- anchor JSON -----------------------------------------------------------
// Origin sensor id, per-sensor row-major R and D_1n, epoch timestamps.

struct AnchorDoc {
    wcs::AnchorResult result;
    std::map<std::string, double> epochs;
};

json anchor_to_json(const AnchorDoc& doc);
AnchorDoc anchor_from_json(const json& j);
AnchorDoc read_anchor(const std::filesystem::path& path);
void write_anchor(const std::filesystem::path& path, const AnchorDoc& doc);

// ---- pose JSONL ------------------------------------------------------------
// {"t": s, "sensor": id, "q": [w,x,y,z], "v": [x,y,z], "s": [x,y,z]}

struct PoseRecord {
    double t{0.0};
    std::string sensor;
    Quaternion q = Quaternion::identity();
    Vec3 v = Vec3::Zero();
    Vec3 s = Vec3::Zero();
};

std::vector<PoseRecord> read_poses(const std::filesystem::path& path);
void write_poses(const std::filesystem::path& path,
                 std::span<const PoseRecord> poses);

// ---- ground-truth JSONL ----------------------------------------------------
// Trace schema plus true pose, field and gradient per line.

std::vector<sim::GroundTruth> read_truth(const std::filesystem::path& path);
void write_truth(const std::filesystem::path& path,
                 std::span<const sim::GroundTruth> truths);

// ---- point clouds ----------------------------------------------------------
// ASCII XYZ ("x y z" per line) and ASCII vertex-only PLY, chosen by
// extension on read.

cloud::PointCloud read_cloud(const std::filesystem::path& path);
void write_cloud_xyz(const std::filesystem::path& path, const cloud::PointCloud& c);
void write_cloud_ply(const std::filesystem::path& path, const cloud::PointCloud& c);

} // namespace geomag::io
