#include "geomag/simkit.hpp"

#include <cmath>
#include <random>

#include "doctest.h"
#include "geomag/errors.hpp"
#include "geomag/magcal.hpp"
#include "geomag/strapdown.hpp"

using namespace geomag;
using namespace geomag::sim;

namespace {

std::mt19937_64 rng(4242u);

Vec3 random_point(double scale) {
    std::uniform_real_distribution<double> u(-scale, scale);
    return {u(rng), u(rng), u(rng)};
}

} // namespace

TEST_CASE("uniform field is flat everywhere") {
    const MagneticFieldModel field = UniformField{Vec3(20, 0, -44)};
    for (int i = 0; i < 50; ++i) {
        const FieldSample fs = field_at(field, random_point(100.0));
        CHECK((fs.b - Vec3(20, 0, -44)).norm() == 0.0);
        CHECK(fs.grad.cwiseAbs().maxCoeff() == 0.0);
    }
}

TEST_CASE("dipole axis field doubles the equatorial one") {
    const MagneticFieldModel field = DipoleField{Vec3::Zero(), Vec3(0, 0, 1000.0)};
    const double r = 2.5;
    const double axial = field_at(field, Vec3(0, 0, r)).b.norm();
    const double equatorial = field_at(field, Vec3(r, 0, 0)).b.norm();
    CHECK(axial == doctest::Approx(2.0 * equatorial).epsilon(1e-12));

    // Textbook components: on the axis B is along +m, on the equator along -m.
    CHECK(field_at(field, Vec3(0, 0, r)).b.z() > 0.0);
    CHECK(field_at(field, Vec3(r, 0, 0)).b.z() < 0.0);

    CHECK_THROWS_AS(field_at(field, Vec3::Zero()), DegenerateInput);
}

TEST_CASE("analytic gradients match central differences") {
    const std::vector<MagneticFieldModel> models = {
        DipoleField{Vec3(1, -2, 0.5), Vec3(300, -100, 800)},
        UniformPlusAnomalies{Vec3(20, 0, -44),
                             {DipoleField{Vec3(3, 1, -1), Vec3(0, 0, 500)},
                              DipoleField{Vec3(-2, 2, 1), Vec3(200, 0, 0)}}},
    };
    const double h = 1e-4;
    for (const auto& field : models) {
        for (int i = 0; i < 30; ++i) {
            Vec3 p = random_point(4.0);
            if ((p - Vec3(1, -2, 0.5)).norm() < 1.0) p += Vec3(2, 2, 2);
            if ((p - Vec3(3, 1, -1)).norm() < 1.0) p += Vec3(2, 2, 2);
            if ((p - Vec3(-2, 2, 1)).norm() < 1.0) p += Vec3(2, 2, 2);

            const FieldSample fs = field_at(field, p);
            Mat3 numeric;
            for (int c = 0; c < 3; ++c) {
                Vec3 dp = Vec3::Zero();
                dp(c) = h;
                numeric.col(c) =
                    (field_at(field, p + dp).b - field_at(field, p - dp).b) / (2 * h);
            }
            const double scale = std::max(1.0, fs.grad.cwiseAbs().maxCoeff());
            CHECK((fs.grad - numeric).cwiseAbs().maxCoeff() / scale < 1e-6);
        }
    }
}

TEST_CASE("stationary synthesis reads one g") {
    TrajectorySpec spec;
    Stationary still;
    still.attitude = {0.3, -0.2, 1.0};
    still.duration = 2.0;
    spec.shape = still;
    const auto [trace, truth] = synthesize_trace(
        spec, UniformField{Vec3(20, 0, -44)}, strapdown::SensorNoiseModel{},
        std::nullopt, 5u);
    REQUIRE(!trace.empty());
    for (const auto& s : trace) {
        CHECK(std::abs(s.acc.norm() - 9.81) < 1e-12);
        CHECK(s.gyro.norm() == 0.0);
    }
    // Magnetometer sees the world field in body axes.
    const Quaternion q = truth.samples.front().q;
    CHECK((trace.front().mag - q.conjugate().rotate(Vec3(20, 0, -44))).norm() < 1e-12);
}

TEST_CASE("constant-velocity line feels only gravity") {
    TrajectorySpec spec;
    Line line;
    line.velocity = Vec3(1.2, -0.3, 0.0);
    line.duration = 3.0;
    spec.shape = line;
    const auto [trace, truth] = synthesize_trace(
        spec, UniformField{Vec3(20, 0, -44)}, strapdown::SensorNoiseModel{},
        std::nullopt, 5u);
    for (const auto& s : trace) {
        CHECK((s.acc - Vec3(0, 0, 9.81)).norm() < 1e-12);
    }
}

TEST_CASE("synthesized noise matches its declared statistics") {
    TrajectorySpec spec;
    Stationary still;
    still.duration = 500.0;
    spec.shape = still;
    spec.sample_rate_hz = 200.0;
    strapdown::SensorNoiseModel noise;
    noise.gyro_sigma = 0.01;
    noise.gyro_bias = Vec3(0.004, -0.002, 0.001);
    const auto [trace, truth] =
        synthesize_trace(spec, UniformField{Vec3(20, 0, -44)}, noise, std::nullopt, 9u);

    const std::size_t n = trace.size();
    REQUIRE(n >= 100000);
    Vec3 sum = Vec3::Zero();
    for (const auto& s : trace) sum += s.gyro - noise.gyro_bias;
    const Vec3 mean = sum / static_cast<double>(n);
    CHECK(mean.cwiseAbs().maxCoeff() < 3.0 * noise.gyro_sigma / std::sqrt(double(n)) * 3.0);

    double var = 0.0;
    for (const auto& s : trace) var += (s.gyro - noise.gyro_bias - mean).squaredNorm();
    var /= (3.0 * n - 1);
    CHECK(std::abs(var - noise.gyro_sigma * noise.gyro_sigma) <
          0.05 * noise.gyro_sigma * noise.gyro_sigma);
}

TEST_CASE("same seed means identical bits") {
    TrajectorySpec spec;
    Line line;
    line.duration = 2.0;
    spec.shape = line;
    strapdown::SensorNoiseModel noise;
    noise.acc_sigma = 0.05;
    noise.gyro_sigma = 0.01;
    noise.mag_sigma = 0.5;
    const auto [a, ta] = synthesize_trace(spec, UniformField{Vec3(20, 0, -44)}, noise,
                                          std::nullopt, 1234u);
    const auto [b, tb] = synthesize_trace(spec, UniformField{Vec3(20, 0, -44)}, noise,
                                          std::nullopt, 1234u);
    REQUIRE(a.size() == b.size());
    for (std::size_t i = 0; i < a.size(); ++i) {
        CHECK(a[i].acc == b[i].acc);
        CHECK(a[i].gyro == b[i].gyro);
        CHECK(a[i].mag == b[i].mag);
    }
    const auto [c, tc] = synthesize_trace(spec, UniformField{Vec3(20, 0, -44)}, noise,
                                          std::nullopt, 1235u);
    CHECK(a.front().acc != c.front().acc);
}

TEST_CASE("clean traces dead-reckon back onto the truth") {
    const MagneticFieldModel field = UniformField{Vec3(20, 0, -44)};

    auto closing_error = [&](const TrajectoryVariant& shape) {
        TrajectorySpec spec;
        spec.shape = shape;
        spec.sample_rate_hz = 200.0;
        const auto [trace, truth] = synthesize_trace(
            spec, field, strapdown::SensorNoiseModel{}, std::nullopt, 11u);
        strapdown::PoseState initial;
        initial.t = truth.samples.front().t;
        initial.q = truth.samples.front().q;
        initial.v = truth.samples.front().v;
        initial.s = truth.samples.front().s;
        const auto states = strapdown::dead_reckon(
            trace, initial, strapdown::EnvironmentConstants::no_earth_rate());
        return (states.back().s - truth.samples.back().s).norm();
    };

    Line line;
    line.velocity = Vec3(0.8, 0.2, 0.05);
    line.duration = 60.0;
    CHECK(closing_error(line) < 0.01);

    Circle circle;
    circle.radius = 1.5;
    circle.speed = 0.5;
    CHECK(closing_error(circle) < 0.01);
}

TEST_CASE("injected iron distortion is recoverable") {
    TrajectorySpec spec;
    Waypoints sweep;
    for (int i = 0; i <= 12; ++i) {
        Waypoint wp;
        wp.t = i * 1.0;
        const double third = 2.0 * M_PI / 3.0;
        wp.attitude = {0.0 + 0.9 * (i / 4), 0.5 * std::sin(i * 0.7), third * i};
        sweep.points.push_back(wp);
    }
    spec.shape = sweep;
    spec.sample_rate_hz = 100.0;

    magcal::MagCalibration distortion;
    distortion.soft_iron = Vec3(1.15, 1.0, 0.85).asDiagonal();
    distortion.hard_iron = Vec3(8.0, -4.0, 2.5);

    const auto [trace, truth] =
        synthesize_trace(spec, UniformField{Vec3(20, 0, -44)},
                         strapdown::SensorNoiseModel{}, distortion, 3u);

    magcal::MagSweep mags;
    for (const auto& s : trace) mags.samples.push_back({s.t, s.mag});
    const magcal::MagCalibration fit = magcal::fit_calibration(mags);

    CHECK((fit.hard_iron - distortion.hard_iron).norm() <
          1e-3 * distortion.hard_iron.norm());
    // The sphere radius is free, so compare shape at unit determinant.
    const Mat3 got = fit.soft_iron / std::cbrt(fit.soft_iron.determinant());
    const Mat3 want =
        distortion.soft_iron / std::cbrt(distortion.soft_iron.determinant());
    CHECK((got - want).cwiseAbs().maxCoeff() < 1e-3);
}

TEST_CASE("field transport identity holds along trajectories") {
    TrajectorySpec spec;
    spec.sample_rate_hz = 1000.0;

    Stationary still;
    still.duration = 1.0;
    spec.shape = still;
    const auto [t0, truth_still] = synthesize_trace(
        spec, DipoleField{Vec3(0, 0, -4), Vec3(0, 0, 2000)},
        strapdown::SensorNoiseModel{}, std::nullopt, 1u);
    CHECK(eq4_consistency_check(truth_still) < 1e-12);

    Circle circle;
    circle.radius = 1.0;
    circle.speed = 0.5;
    spec.shape = circle;
    const auto [t1, truth_circle] = synthesize_trace(
        spec, UniformField{Vec3(20, 0, -44)}, strapdown::SensorNoiseModel{},
        std::nullopt, 1u);
    const double b_mag = Vec3(20, 0, -44).norm();
    CHECK(eq4_consistency_check(truth_circle) < 1e-6 * b_mag);

    Line line;
    line.start = Vec3(2, 0, 0);
    line.velocity = Vec3(0.5, 0, 0);
    line.duration = 4.0;
    spec.shape = line;
    const MagneticFieldModel dipole = DipoleField{Vec3(0, 0, -5), Vec3(0, 0, 3700)};
    const auto [t2, truth_line] = synthesize_trace(
        spec, dipole, strapdown::SensorNoiseModel{}, std::nullopt, 1u);
    const double b_line = field_at(dipole, line.start).b.norm();
    const double residual_1k = eq4_consistency_check(truth_line);
    CHECK(residual_1k < 1e-4 * b_line);

    spec.sample_rate_hz = 2000.0;
    const auto [t3, truth_fine] = synthesize_trace(
        spec, dipole, strapdown::SensorNoiseModel{}, std::nullopt, 1u);
    CHECK(eq4_consistency_check(truth_fine) < 0.5 * residual_1k);
}

TEST_CASE("truth velocity is the derivative of truth position") {
    std::vector<TrajectoryVariant> shapes;
    Stationary still;
    still.duration = 1.0;
    shapes.push_back(still);
    Line line;
    line.velocity = Vec3(0.3, -0.8, 0.1);
    line.duration = 2.0;
    shapes.push_back(line);
    Circle circle;
    circle.radius = 2.0;
    circle.speed = 0.7;
    circle.lead_in_s = 1.0;
    circle.ramp_s = 0.5;
    circle.duration = 8.0;
    shapes.push_back(circle);
    Stairs stairs;
    shapes.push_back(stairs);
    Waypoints wps;
    wps.points.push_back({0.0, Vec3(0, 0, 0), {0, 0, 0}});
    wps.points.push_back({2.0, Vec3(1, 1, 0), {0, 0, 1.0}});
    wps.points.push_back({4.0, Vec3(1, 2, 1), {0.4, 0, 2.0}});
    shapes.push_back(wps);

    for (const auto& shape : shapes) {
        const double duration = trajectory_duration(shape);
        const double h = 1e-6;
        // Probe fractions chosen off the segment boundaries: piecewise shapes
        // are only C0 at their knots and the central difference would average
        // the two one-sided velocities there.
        for (double frac : {0.21, 0.47, 0.83}) {
            const double t = frac * duration;
            const Vec3 v = evaluate_trajectory(shape, t).v;
            const Vec3 numeric = (evaluate_trajectory(shape, t + h).s -
                                  evaluate_trajectory(shape, t - h).s) /
                                 (2 * h);
            CHECK((v - numeric).norm() < 1e-6 * (1.0 + v.norm()) + 1e-7);
        }
    }
}

TEST_CASE("circle samples sit on the circle") {
    Circle circle;
    circle.center = Vec3(1, 2, 0);
    circle.radius = 2.0;
    circle.speed = 0.5;
    for (double t = 0.0; t < trajectory_duration(circle); t += 0.37) {
        const TrajectorySample s = evaluate_trajectory(circle, t);
        CHECK(std::abs((s.s - circle.center).norm() - circle.radius) < 1e-9);
        CHECK(std::abs(s.v.norm() - circle.speed) < 1e-9);
    }
    // One full lap closes.
    const double lap = 2.0 * M_PI * circle.radius / circle.speed;
    CHECK(std::abs(trajectory_duration(circle) - lap) < 1e-12);
    CHECK((evaluate_trajectory(circle, lap).s - evaluate_trajectory(circle, 0.0).s)
              .norm() < 1e-9);
}

TEST_CASE("stairs climb the declared geometry") {
    Stairs stairs;
    stairs.step_length = 0.3;
    stairs.step_height = 0.17;
    stairs.cadence_hz = 1.0;
    stairs.count = 10;
    const double duration = trajectory_duration(stairs);
    CHECK(duration == doctest::Approx(10.0));
    const TrajectorySample end = evaluate_trajectory(stairs, duration);
    CHECK(end.s.x() == doctest::Approx(3.0).epsilon(1e-9));
    CHECK(end.s.z() == doctest::Approx(1.7).epsilon(1e-9));

    double last_z = -1.0;
    for (double t = 0.0; t <= duration; t += 0.05) {
        const double z = evaluate_trajectory(stairs, t).s.z();
        CHECK(z >= last_z - 1e-9);
        last_z = z;
    }
}

TEST_CASE("waypoints pass through their nodes") {
    Waypoints wps;
    wps.points.push_back({0.0, Vec3(0, 0, 0), {0, 0, 0}});
    wps.points.push_back({1.5, Vec3(2, -1, 0.5), {0, 0, 1.2}});
    wps.points.push_back({3.0, Vec3(4, 0, 1), {0.3, 0.1, 2.0}});

    for (const auto& wp : wps.points) {
        const TrajectorySample s = evaluate_trajectory(TrajectoryVariant{wps}, wp.t);
        CHECK((s.s - wp.position).norm() < 1e-12);
        CHECK(rotation_angle_between(quat_to_rotation(s.q),
                                     euler_to_rotation(wp.attitude)) < 1e-9);
    }

    Waypoints bad;
    bad.points.push_back({0.0, Vec3::Zero(), {}});
    CHECK_THROWS_AS(evaluate_trajectory(TrajectoryVariant{bad}, 0.0),
                    ContractViolation);
}

TEST_CASE("synthesis rejects meaningless parameters") {
    TrajectorySpec spec;
    spec.shape = Stationary{};
    spec.sample_rate_hz = 5.0;
    CHECK_THROWS_AS(synthesize_trace(spec, UniformField{Vec3(20, 0, -44)},
                                     strapdown::SensorNoiseModel{}, std::nullopt, 1u),
                    ContractViolation);

    spec.sample_rate_hz = 100.0;
    strapdown::SensorNoiseModel bad;
    bad.acc_sigma = -1.0;
    CHECK_THROWS_AS(synthesize_trace(spec, UniformField{Vec3(20, 0, -44)}, bad,
                                     std::nullopt, 1u),
                    ContractViolation);
}
