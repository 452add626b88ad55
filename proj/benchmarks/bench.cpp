#include <benchmark/benchmark.h>

#include <cmath>
#include <random>
#include <vector>

#include "geomag/cloud_match.hpp"
#include "geomag/magcal.hpp"
#include "geomag/simkit.hpp"
#include "geomag/strapdown.hpp"

using namespace geomag;

namespace {

std::vector<strapdown::ImuSample> noisy_walk_trace(std::size_t n) {
    std::mt19937_64 g(7u);
    std::normal_distribution<double> noise(0.0, 0.02);
    std::vector<strapdown::ImuSample> trace(n);
    for (std::size_t i = 0; i < n; ++i) {
        trace[i].t = 0.005 * static_cast<double>(i);
        trace[i].acc = Vec3(noise(g), noise(g), 9.81 + noise(g));
        trace[i].gyro = Vec3(noise(g), noise(g), noise(g));
    }
    return trace;
}

magcal::MagSweep distorted_sweep(std::size_t n) {
    magcal::MagSweep sweep;
    Mat3 soft = Mat3::Zero();
    soft.diagonal() << 1.2, 1.0, 0.8;
    const Mat3 inv = soft.inverse();
    for (std::size_t i = 0; i < n; ++i) {
        const double z = 1.0 - 2.0 * (static_cast<double>(i) + 0.5) / static_cast<double>(n);
        const double r = std::sqrt(std::max(0.0, 1.0 - z * z));
        const double phi = static_cast<double>(i) * M_PI * (3.0 - std::sqrt(5.0));
        const Vec3 clean = 48.0 * Vec3(r * std::cos(phi), r * std::sin(phi), z);
        sweep.samples.push_back(
            {0.01 * static_cast<double>(i), inv * clean + Vec3(10, -5, 3)});
    }
    return sweep;
}

cloud::PointCloud random_cloud(std::size_t n, std::uint64_t seed) {
    std::mt19937_64 g(seed);
    std::uniform_real_distribution<double> u(-2.0, 2.0);
    cloud::PointCloud c;
    for (std::size_t i = 0; i < n; ++i) c.points.emplace_back(u(g), u(g), u(g));
    return c;
}

void bm_attitude_step(benchmark::State& state) {
    strapdown::PoseState pose;
    const Vec3 rate(0.1, -0.2, 0.3);
    for (auto _ : state) {
        pose = strapdown::propagate_attitude(pose, rate, 1e-3);
        benchmark::DoNotOptimize(pose.q.w);
    }
    state.SetItemsProcessed(state.iterations());
}

void bm_dead_reckon(benchmark::State& state) {
    const auto trace = noisy_walk_trace(static_cast<std::size_t>(state.range(0)));
    const auto env = strapdown::EnvironmentConstants::at_latitude(M_PI / 4.0);
    for (auto _ : state) {
        auto poses = strapdown::dead_reckon(trace, strapdown::PoseState{}, env);
        benchmark::DoNotOptimize(poses.back().s.x());
    }
    state.SetItemsProcessed(state.iterations() * state.range(0));
}

void bm_ellipsoid_fit(benchmark::State& state) {
    const auto sweep = distorted_sweep(static_cast<std::size_t>(state.range(0)));
    for (auto _ : state) {
        const auto cal = magcal::fit_calibration(sweep);
        benchmark::DoNotOptimize(cal.hard_iron.x());
    }
    state.SetItemsProcessed(state.iterations() * state.range(0));
}

void bm_dipole_eval(benchmark::State& state) {
    const sim::MagneticFieldModel field =
        sim::DipoleField{Vec3(0, 0, -5), Vec3(0, 0, 3700)};
    double x = 1.0;
    for (auto _ : state) {
        x = 1.0 + std::fmod(x * 1.1, 3.0);
        const auto sample = sim::field_at(field, Vec3(x, 0.2 * x, 0.0));
        benchmark::DoNotOptimize(sample.b.z());
    }
    state.SetItemsProcessed(state.iterations());
}

void bm_cloud_merge(benchmark::State& state) {
    const auto a = random_cloud(static_cast<std::size_t>(state.range(0)), 1u);
    const auto b = random_cloud(static_cast<std::size_t>(state.range(0)), 2u);
    for (auto _ : state) {
        const auto rep = cloud::merge_error(a, b);
        benchmark::DoNotOptimize(rep.rmse);
    }
    state.SetItemsProcessed(state.iterations() * state.range(0));
}

BENCHMARK(bm_attitude_step);
BENCHMARK(bm_dead_reckon)->Arg(2000)->Arg(20000);
BENCHMARK(bm_ellipsoid_fit)->Arg(500)->Arg(5000);
BENCHMARK(bm_dipole_eval);
BENCHMARK(bm_cloud_merge)->Arg(200)->Arg(600);

} // namespace

BENCHMARK_MAIN();
