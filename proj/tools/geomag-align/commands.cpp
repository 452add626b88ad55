#include "commands.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <map>
#include <sstream>
#include <tuple>

#include "geomag/cloud_match.hpp"
#include "geomag/errors.hpp"
#include "geomag/filters.hpp"
#include "geomag/io.hpp"
#include "geomag/magcal.hpp"
#include "geomag/strapdown.hpp"
#include "geomag/version.hpp"
#include "geomag/wcs_align.hpp"
#include "log.hpp"

namespace geomag::cli {

namespace {

using io::json;
namespace fs = std::filesystem;

json report_envelope(const std::string& command, const RunConfig* cfg,
                     const std::vector<std::pair<std::string, std::string>>& inputs) {
    json inputs_json = json::object();
    for (const auto& [label, path] : inputs) {
        inputs_json[label] = {{"path", path},
                              {"fnv1a64", io::file_hash_hex(path)}};
    }
    json env{{"tool_version", kVersion},
             {"command", command},
             {"inputs", std::move(inputs_json)}};
    if (cfg != nullptr) {
        env["config_hash"] = cfg->hash_hex;
        env["config"] = cfg->echo;
    }
    return env;
}

void write_report(const std::string& path, const json& doc) {
    io::atomic_write_file(path, doc.dump(2) + "\n");
    log_info("wrote report " + path);
}

// Per-sensor sample runs in first-seen order.
struct SensorTrace {
    std::vector<std::string> order;
    std::map<std::string, std::vector<strapdown::ImuSample>> samples;
};

SensorTrace split_by_sensor(std::vector<strapdown::ImuSample> trace) {
    SensorTrace out;
    for (auto& s : trace) {
        auto [it, inserted] = out.samples.try_emplace(s.sensor_id);
        if (inserted) out.order.push_back(s.sensor_id);
        it->second.push_back(std::move(s));
    }
    return out;
}

} // namespace

int cmd_simulate(const SimulateArgs& args) {
    const RunConfig cfg = load_config(args.config);
    if (!cfg.field) throw ConfigError("config field 'field': required by simulate");
    if (cfg.sensors.empty()) {
        throw ConfigError("config field 'sensors': at least one sensor required");
    }
    const std::uint64_t base_seed = args.seed.value_or(cfg.seed);

    std::vector<strapdown::ImuSample> merged;
    std::vector<sim::GroundTruth> truths;
    for (const auto& sensor : cfg.sensors) {
        sim::TrajectorySpec spec;
        spec.shape = sensor.trajectory;
        spec.sample_rate_hz = cfg.sample_rate_hz;
        spec.sensor_id = sensor.id;
        const std::uint64_t seed = base_seed ^ io::fnv1a64(sensor.id);
        auto [samples, truth] =
            sim::synthesize_trace(spec, *cfg.field, cfg.noise, cfg.distortion, seed);
        log_info("simulated " + std::to_string(samples.size()) + " samples for '" +
                 sensor.id + "'");
        merged.insert(merged.end(), samples.begin(), samples.end());
        truths.push_back(std::move(truth));
    }
    std::stable_sort(merged.begin(), merged.end(),
                     [](const auto& a, const auto& b) { return a.t < b.t; });

    io::write_trace(args.out, merged);
    log_info("wrote trace " + args.out);
    if (!args.truth.empty()) {
        io::write_truth(args.truth, truths);
        log_info("wrote ground truth " + args.truth);
    }
    return 0;
}

int cmd_calibrate(const CalibrateArgs& args) {
    std::optional<RunConfig> cfg;
    if (!args.config.empty()) cfg = load_config(args.config);

    SensorTrace trace = split_by_sensor(io::read_trace(args.trace));
    if (trace.order.empty()) {
        throw InsufficientData("trace " + args.trace + " holds no samples");
    }

    std::string sensor = args.sensor;
    if (sensor.empty()) {
        if (trace.order.size() > 1) {
            std::string ids;
            for (const auto& id : trace.order) ids += " '" + id + "'";
            throw ConfigError("trace holds several sensors (" + ids.substr(1) +
                              "); pick one with --sensor");
        }
        sensor = trace.order.front();
    } else if (!trace.samples.contains(sensor)) {
        throw ConfigError("sensor '" + sensor + "' not present in " + args.trace);
    }

    magcal::MagSweep sweep;
    for (const auto& s : trace.samples.at(sensor)) {
        sweep.samples.push_back({s.t, s.mag});
    }

    const magcal::MagCalibration cal = magcal::fit_calibration(sweep);
    const magcal::StabilityReport stability = magcal::stability_metrics(sweep, cal);
    const double coverage = magcal::sweep_coverage(sweep);
    if (coverage < 0.5) {
        log_warn("sweep covers only " + std::to_string(100.0 * coverage) +
                 "% of direction space; rotate through more attitudes for a "
                 "trustworthy fit");
    }

    io::write_calibration(args.out, cal);
    log_info("wrote calibration " + args.out);
    log_info("stability: sigma_nc " + std::to_string(stability.sigma_nc) +
             " uT, sigma_c " + std::to_string(stability.sigma_c) + " uT, epsilon " +
             std::to_string(stability.epsilon) + "%");

    if (!args.report.empty()) {
        json doc = report_envelope("calibrate", cfg ? &*cfg : nullptr,
                                   {{"trace", args.trace}});
        doc["sensor"] = sensor;
        doc["sample_count"] = stability.sample_count;
        doc["sigma_nc_ut"] = stability.sigma_nc;
        doc["sigma_c_ut"] = stability.sigma_c;
        doc["epsilon_pct"] = stability.epsilon;
        doc["coverage"] = coverage;
        doc["field_magnitude_ut"] = cal.field_magnitude;
        doc["fit_residual_ut"] = cal.fit_residual;
        doc["calibration"] = io::calibration_to_json(cal);
        write_report(args.report, doc);
    }
    return 0;
}

namespace {

struct SensorInit {
    std::vector<strapdown::ImuSample> samples; // offset-corrected
    wcs::NorthReference ref;
    Vec3 b_init = Vec3::Zero();
    double t_init{0.0};
};

struct SensorFailure {
    std::string id;
    std::string stage;
    std::string message;
    std::exception_ptr error;
};

// Static-window means feeding the north reference: offset-corrected
// acceleration and calibrated field over the first window_s seconds of the
// detected static interval.
SensorInit init_sensor(std::vector<strapdown::ImuSample> samples,
                       const RunConfig& cfg,
                       const strapdown::StaticDetectionParams& params) {
    const auto offsets =
        filters::estimate_static_offsets(samples, cfg.filters.offset_window_s, params);
    for (auto& s : samples) {
        s.acc -= offsets.acc;
        s.gyro -= offsets.gyro;
    }

    const double t0 = samples[offsets.window_begin].t;
    Vec3 acc_sum = Vec3::Zero();
    Vec3 mag_sum = Vec3::Zero();
    std::size_t count = 0;
    for (std::size_t i = offsets.window_begin; i < offsets.window_end; ++i) {
        if (samples[i].t - t0 > cfg.init.static_window_s) break;
        acc_sum += samples[i].acc;
        mag_sum += samples[i].mag;
        ++count;
    }

    SensorInit init;
    init.b_init = mag_sum / static_cast<double>(count);
    init.t_init = t0;
    init.ref = wcs::north_reference(init.b_init,
                                    acc_sum / static_cast<double>(count), t0);
    init.samples = std::move(samples);
    return init;
}

// Tracks one sensor through the trace in the north-aligned WCS axes.
std::vector<io::PoseRecord> track_sensor(const std::string& id,
                                         const SensorInit& init,
                                         const wcs::RelativeTransform& transform,
                                         const Rotation& r_world,
                                         const RunConfig& cfg) {
    const auto& samples = init.samples;

    strapdown::EnvironmentConstants env = cfg.environment;
    env.gravity = Vec3(0.0, 0.0, -cfg.environment.gravity.norm());

    const Rotation r_body_to_np = init.ref.r_to_np;
    strapdown::PoseState initial;
    initial.t = samples.front().t;
    initial.q = quat_from_rotation(r_body_to_np);
    initial.s = r_world * transform.d_1n;

    std::vector<io::PoseRecord> records;
    records.reserve(samples.size());
    auto record = [&](const strapdown::PoseState& pose) {
        records.push_back({pose.t, id, pose.q, pose.v, pose.s});
    };

    if (!cfg.filters.enabled) {
        for (const auto& pose : strapdown::dead_reckon(samples, initial, env)) {
            record(pose);
        }
        return records;
    }

    wcs::TransferFunctions tf;
    tf.f_s = cfg.filters.f_s;
    tf.f_phi = r_body_to_np;
    tf.initialized = true;

    strapdown::PoseState seed = initial;
    seed.q = Quaternion::identity(); // f_phi supplies the frame alignment
    auto tracker = wcs::make_locomotion_tracker(
        seed, tf, r_body_to_np * init.b_init, env, cfg.filters.q_acc,
        Mat3::Identity() * cfg.filters.r_mag_pos);

    const double nominal_dt = 1.0 / cfg.sample_rate_hz;
    filters::LowPassState lp_acc{cfg.filters.cutoff_hz, 0.0, Vec3::Zero(), false};
    filters::LowPassState lp_gyro{cfg.filters.cutoff_hz, 0.0, Vec3::Zero(), false};
    Vec3 acc_f, gyro_f;
    std::tie(lp_acc, acc_f) = filters::lowpass_step(lp_acc, samples.front().acc,
                                                    nominal_dt);
    std::tie(lp_gyro, gyro_f) =
        filters::lowpass_step(lp_gyro, samples.front().gyro, nominal_dt);

    record(tracker.pose);
    for (std::size_t i = 1; i < samples.size(); ++i) {
        const double dt = samples[i].t - samples[i - 1].t;
        if (dt <= 0.0) continue; // repeated timestamp carries no new step

        strapdown::ImuSample s = samples[i];
        std::tie(lp_acc, acc_f) = filters::lowpass_step(lp_acc, s.acc, dt);
        std::tie(lp_gyro, gyro_f) = filters::lowpass_step(lp_gyro, s.gyro, dt);
        s.acc = acc_f;
        s.gyro = gyro_f;

        tracker = wcs::locomotion_update(tracker, tf, s, dt);
        record(tracker.pose);
    }
    return records;
}

struct RmseAccumulator {
    double sq_sum{0.0};
    std::size_t count{0};

    void add(double err) {
        sq_sum += err * err;
        ++count;
    }
    double rmse() const {
        return count == 0 ? 0.0 : std::sqrt(sq_sum / static_cast<double>(count));
    }
};

// Position errors against ground truth matched by timestamp. Poses are
// relative to the anchor sensor's starting point, so the truth stream is
// shifted by that same point before differencing.
std::optional<double> rmse_vs_truth(const std::vector<io::PoseRecord>& records,
                                    const sim::GroundTruth& truth,
                                    const Vec3& truth_origin,
                                    RmseAccumulator& pooled) {
    RmseAccumulator acc;
    std::size_t j = 0;
    for (const auto& rec : records) {
        while (j + 1 < truth.samples.size() && truth.samples[j].t < rec.t - 1e-9) {
            ++j;
        }
        if (j >= truth.samples.size()) break;
        if (std::abs(truth.samples[j].t - rec.t) > 1e-6) continue;
        const double err = (rec.s - (truth.samples[j].s - truth_origin)).norm();
        acc.add(err);
        pooled.add(err);
    }
    if (acc.count == 0) return std::nullopt;
    return acc.rmse();
}

} // namespace

int cmd_fuse(const FuseArgs& args) {
    if (args.config.empty()) {
        throw ConfigError("fuse needs --config for field, filter and init settings");
    }
    const RunConfig cfg = load_config(args.config);

    std::optional<magcal::MagCalibration> cal;
    if (!args.cal.empty()) cal = io::read_calibration(args.cal);

    SensorTrace trace = split_by_sensor(io::read_trace(args.trace));
    if (trace.order.empty()) {
        throw InsufficientData("trace " + args.trace + " holds no samples");
    }
    if (cal) {
        for (auto& [id, samples] : trace.samples) {
            (void)id;
            for (auto& s : samples) s.mag = magcal::apply_calibration(*cal, s.mag);
        }
    }

    strapdown::StaticDetectionParams params;
    params.window_s = cfg.init.static_window_s;
    params.acc_tolerance = cfg.init.acc_tolerance;
    params.gyro_max = cfg.init.gyro_max;
    params.gravity_magnitude = cfg.environment.gravity.norm();

    std::map<std::string, SensorInit> inits;
    std::vector<SensorFailure> failures;
    for (const auto& id : trace.order) {
        try {
            inits.emplace(id, init_sensor(std::move(trace.samples.at(id)), cfg, params));
        } catch (const std::exception& e) {
            log_warn("sensor '" + id + "' failed to initialize: " + e.what());
            failures.push_back({id, "init", e.what(), std::current_exception()});
        }
    }
    if (inits.empty()) {
        std::rethrow_exception(failures.front().error);
    }

    std::string origin;
    std::map<std::string, strapdown::PoseState> states;
    std::map<std::string, wcs::NorthReference> refs;
    for (const auto& id : trace.order) {
        auto it = inits.find(id);
        if (it == inits.end()) continue;
        if (origin.empty()) origin = id;
        strapdown::PoseState st;
        st.t = it->second.t_init;
        states[id] = st;
        refs[id] = it->second.ref;
    }

    // Shared frame and gradient are evaluated where the anchor sensor sits,
    // not at the world origin: a field model is only trusted near the site.
    Vec3 eval_point = Vec3::Zero();
    for (const auto& sc : cfg.sensors) {
        if (sc.id == origin) {
            eval_point = sim::evaluate_trajectory(sc.trajectory, 0.0).s;
            break;
        }
    }

    const wcs::AnchorResult anchor = wcs::anchor_wcs(
        states, refs, cfg.field, eval_point, origin, cfg.init.epoch_window_s);
    if (anchor.heading_only) {
        log_warn("field gradient cannot support displacement; anchoring is "
                 "heading-only and sensor offsets stay zero");
    }

    if (!args.anchor.empty()) {
        io::AnchorDoc doc;
        doc.result = anchor;
        for (const auto& [id, init] : inits) doc.epochs[id] = init.t_init;
        io::write_anchor(args.anchor, doc);
        log_info("wrote anchor " + args.anchor);
    }

    std::vector<io::PoseRecord> all_records;
    std::map<std::string, std::size_t> counts;
    std::map<std::string, std::vector<io::PoseRecord>> per_sensor_records;
    for (const auto& id : trace.order) {
        auto it = inits.find(id);
        if (it == inits.end()) continue;
        try {
            auto records = track_sensor(id, it->second, anchor.transforms.at(id),
                                        anchor.anchor.r_world, cfg);
            counts[id] = records.size();
            all_records.insert(all_records.end(), records.begin(), records.end());
            per_sensor_records[id] = std::move(records);
        } catch (const std::exception& e) {
            log_warn("sensor '" + id + "' failed while tracking: " + e.what());
            failures.push_back({id, "tracking", e.what(), std::current_exception()});
        }
    }
    if (per_sensor_records.empty()) {
        std::rethrow_exception(failures.back().error);
    }
    std::stable_sort(all_records.begin(), all_records.end(),
                     [](const auto& a, const auto& b) { return a.t < b.t; });
    io::write_poses(args.out, all_records);
    log_info("wrote poses " + args.out);

    std::map<std::string, double> sensor_rmse;
    RmseAccumulator pooled;
    if (!args.truth.empty()) {
        const auto truths = io::read_truth(args.truth);
        Vec3 truth_origin = Vec3::Zero();
        for (const auto& truth : truths) {
            if (truth.sensor_id != origin || truth.samples.empty()) continue;
            const double t0 = inits.at(origin).t_init;
            truth_origin = truth.samples.front().s;
            for (const auto& ts : truth.samples) {
                if (ts.t <= t0 + 1e-9) truth_origin = ts.s;
                else break;
            }
        }
        for (const auto& truth : truths) {
            auto it = per_sensor_records.find(truth.sensor_id);
            if (it == per_sensor_records.end()) continue;
            if (auto r = rmse_vs_truth(it->second, truth, truth_origin, pooled)) {
                sensor_rmse[truth.sensor_id] = *r;
            }
        }
        log_info("position RMSE vs truth: " + std::to_string(pooled.rmse()) + " m");
    }

    if (!args.report.empty()) {
        std::vector<std::pair<std::string, std::string>> inputs{{"trace", args.trace}};
        if (!args.cal.empty()) inputs.emplace_back("calibration", args.cal);
        if (!args.truth.empty()) inputs.emplace_back("truth", args.truth);
        json doc = report_envelope("fuse", &cfg, inputs);
        doc["filters_enabled"] = cfg.filters.enabled;
        doc["anchor"] = {{"origin_sensor", anchor.anchor.origin_sensor},
                         {"heading_only", anchor.heading_only}};
        json sensors = json::array();
        for (const auto& id : trace.order) {
            json entry{{"id", id}};
            auto init_it = inits.find(id);
            bool failed = init_it == inits.end();
            std::string failure_text;
            for (const auto& f : failures) {
                if (f.id == id) {
                    failed = true;
                    failure_text = f.stage + ": " + f.message;
                }
            }
            if (failed) {
                entry["status"] = "failed";
                entry["error"] = failure_text;
            } else {
                entry["status"] = "ok";
                entry["poses"] = counts[id];
                entry["t_init"] = init_it->second.t_init;
                entry["d_1n"] = io::vec3_to_json(anchor.transforms.at(id).d_1n);
                if (auto r = sensor_rmse.find(id); r != sensor_rmse.end()) {
                    entry["rmse_m"] = r->second;
                }
            }
            sensors.push_back(std::move(entry));
        }
        doc["sensors"] = std::move(sensors);
        if (pooled.count > 0) doc["rmse_m"] = pooled.rmse();
        write_report(args.report, doc);
    }

    if (!failures.empty()) {
        std::string ids;
        for (const auto& f : failures) ids += " '" + f.id + "'";
        throw PartialFailure(std::to_string(failures.size()) + " of " +
                             std::to_string(trace.order.size()) +
                             " sensors failed:" + ids.substr(1));
    }
    return 0;
}

int cmd_align(const AlignArgs& args) {
    std::optional<RunConfig> cfg;
    if (!args.config.empty()) cfg = load_config(args.config);

    const std::vector<io::PoseRecord> poses = io::read_poses(args.poses);
    if (poses.empty()) {
        throw InsufficientData("pose stream " + args.poses + " is empty");
    }
    std::map<std::string, std::vector<io::PoseRecord>> by_sensor;
    for (const auto& p : poses) by_sensor[p.sensor].push_back(p);

    std::vector<cloud::PointCloud> placed;
    std::vector<std::string> unmatched;
    for (const auto& path : args.clouds) {
        cloud::PointCloud c = io::read_cloud(path);
        auto it = by_sensor.find(c.sensor_id);
        if (it == by_sensor.end()) {
            unmatched.push_back(c.sensor_id);
            continue;
        }
        // Pose nearest the capture time places the cloud.
        const auto& stream = it->second;
        const io::PoseRecord* best = &stream.front();
        for (const auto& rec : stream) {
            if (std::abs(rec.t - c.t) < std::abs(best->t - c.t)) best = &rec;
        }
        cloud::Pose pose{quat_to_rotation(best->q.normalized()), best->s};
        placed.push_back(cloud::transform_cloud(c, pose));
        log_info("placed '" + c.sensor_id + "' (" + std::to_string(c.points.size()) +
                 " points) at t=" + std::to_string(best->t));
    }
    if (!unmatched.empty()) {
        std::string ids;
        for (const auto& id : unmatched) ids += " '" + id + "'";
        std::string have;
        for (const auto& [id, recs] : by_sensor) {
            (void)recs;
            have += " '" + id + "'";
        }
        throw ConfigError("clouds without a matching pose stream:" + ids +
                          " (pose sensors:" + have + ")");
    }
    if (placed.empty()) {
        throw InsufficientData("no point clouds to merge");
    }

    cloud::PointCloud merged;
    merged.sensor_id = "merged";
    for (const auto& c : placed) {
        merged.points.insert(merged.points.end(), c.points.begin(), c.points.end());
    }
    const fs::path out_path(args.out);
    if (out_path.extension() == ".ply") {
        io::write_cloud_ply(out_path, merged);
    } else {
        io::write_cloud_xyz(out_path, merged);
    }
    log_info("wrote merged cloud " + args.out + " (" +
             std::to_string(merged.points.size()) + " points)");

    json pair_stats = json::array();
    std::vector<double> pooled;
    for (std::size_t i = 0; i < placed.size(); ++i) {
        for (std::size_t j = i + 1; j < placed.size(); ++j) {
            const cloud::MergeReport m = cloud::merge_error(placed[i], placed[j]);
            pair_stats.push_back({{"a", placed[i].sensor_id},
                                  {"b", placed[j].sensor_id},
                                  {"rmse_m", m.rmse}});
            pooled.insert(pooled.end(), m.distances.begin(), m.distances.end());
            log_info("merge rmse " + placed[i].sensor_id + " vs " +
                     placed[j].sensor_id + ": " + std::to_string(m.rmse) + " m");
        }
    }

    if (!args.report.empty()) {
        std::vector<std::pair<std::string, std::string>> inputs{{"poses", args.poses}};
        for (const auto& path : args.clouds) {
            inputs.emplace_back("cloud:" + fs::path(path).stem().string(), path);
        }
        json doc = report_envelope("align", cfg ? &*cfg : nullptr, inputs);
        doc["merged_points"] = merged.points.size();
        doc["pairs"] = std::move(pair_stats);
        if (!pooled.empty()) {
            double sq = 0.0;
            for (double d : pooled) sq += d * d;
            doc["rmse_m"] = std::sqrt(sq / static_cast<double>(pooled.size()));
            const double max_d =
                *std::max_element(pooled.begin(), pooled.end());
            const cloud::Histogram hist =
                cloud::distance_histogram(pooled, 24, std::max(max_d, 1e-9));
            doc["histogram"] = {{"bin_width", hist.bin_width},
                                {"counts", hist.counts}};
        }
        write_report(args.report, doc);
    }
    return 0;
}

namespace {

std::string csv_escape(double v) {
    std::ostringstream os;
    os.precision(12);
    os << v;
    return os.str();
}

} // namespace

int cmd_report(const ReportArgs& args) {
    std::optional<RunConfig> cfg;
    if (!args.config.empty()) cfg = load_config(args.config);

    const fs::path dir(args.out_dir);
    std::error_code ec;
    fs::create_directories(dir, ec);

    std::vector<std::string> emitted;
    auto emit = [&](const std::string& name, const std::string& content) {
        io::atomic_write_file(dir / name, content);
        emitted.push_back(name);
        log_info("wrote " + (dir / name).string());
    };

    const std::string text = io::read_file(args.input);
    json whole;
    bool is_document = false;
    try {
        whole = json::parse(text);
        // A lone JSONL line also parses whole; report documents are told
        // apart by their envelope.
        is_document = whole.is_object() &&
                      (whole.contains("command") || whole.contains("tool_version"));
    } catch (const json::parse_error&) {
        is_document = false;
    }

    if (is_document) {
        // A command report: extract plot-ready series.
        if (whole.contains("histogram")) {
            const auto& h = whole.at("histogram");
            const double bw = h.at("bin_width").get<double>();
            std::ostringstream csv;
            csv << "bin_lo,bin_hi,count\n";
            const auto& counts = h.at("counts");
            for (std::size_t i = 0; i < counts.size(); ++i) {
                csv << csv_escape(bw * static_cast<double>(i)) << ','
                    << csv_escape(bw * static_cast<double>(i + 1)) << ','
                    << counts[i].get<std::size_t>() << '\n';
            }
            emit("histogram.csv", csv.str());
        }
        if (whole.contains("sensors")) {
            std::ostringstream csv;
            csv << "sensor,status,poses,rmse_m\n";
            for (const auto& s : whole.at("sensors")) {
                csv << s.value("id", "") << ',' << s.value("status", "") << ','
                    << s.value("poses", std::size_t{0}) << ',';
                if (s.contains("rmse_m")) csv << csv_escape(s.at("rmse_m").get<double>());
                csv << '\n';
            }
            emit("sensors.csv", csv.str());
        }
    } else {
        // JSONL: pose stream or raw trace, split per sensor.
        std::istringstream in(text);
        std::string line;
        std::map<std::string, std::ostringstream> tracks;
        std::map<std::string, std::ostringstream> scatters;
        std::size_t lineno = 0;
        while (std::getline(in, line)) {
            ++lineno;
            if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
            const json j = io::parse_json(line, args.input + ":" +
                                                    std::to_string(lineno));
            const std::string sensor = j.value("sensor", "unknown");
            if (j.contains("acc") && j.contains("mag")) {
                auto [it, inserted] = scatters.try_emplace(sensor);
                if (inserted) it->second << "t,bx,by,bz,b_norm\n";
                const Vec3 b = io::vec3_from_json(j.at("mag"), "mag");
                it->second << csv_escape(j.at("t").get<double>()) << ','
                           << csv_escape(b.x()) << ',' << csv_escape(b.y()) << ','
                           << csv_escape(b.z()) << ',' << csv_escape(b.norm())
                           << '\n';
            } else if (j.contains("q") && j.contains("s")) {
                auto [it, inserted] = tracks.try_emplace(sensor);
                if (inserted) it->second << "t,x,y,z,vx,vy,vz,qw,qx,qy,qz\n";
                const Vec3 s = io::vec3_from_json(j.at("s"), "s");
                const Vec3 v = io::vec3_from_json(j.at("v"), "v");
                const auto& q = j.at("q");
                it->second << csv_escape(j.at("t").get<double>()) << ','
                           << csv_escape(s.x()) << ',' << csv_escape(s.y()) << ','
                           << csv_escape(s.z()) << ',' << csv_escape(v.x()) << ','
                           << csv_escape(v.y()) << ',' << csv_escape(v.z()) << ','
                           << csv_escape(q[0].get<double>()) << ','
                           << csv_escape(q[1].get<double>()) << ','
                           << csv_escape(q[2].get<double>()) << ','
                           << csv_escape(q[3].get<double>()) << '\n';
            } else {
                throw ParseError(args.input + ":" + std::to_string(lineno) +
                                 ": line is neither a trace sample nor a pose");
            }
        }
        for (auto& [sensor, csv] : scatters) {
            emit("mag_scatter_" + sensor + ".csv", csv.str());
        }
        for (auto& [sensor, csv] : tracks) {
            emit("track_" + sensor + ".csv", csv.str());
        }
    }

    json summary = report_envelope("report", cfg ? &*cfg : nullptr,
                                   {{"input", args.input}});
    summary["emitted"] = emitted;
    io::atomic_write_file(dir / "summary.json", summary.dump(2) + "\n");
    log_info("wrote " + (dir / "summary.json").string());
    return 0;
}

} // namespace geomag::cli
