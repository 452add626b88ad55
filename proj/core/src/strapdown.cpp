#include "geomag/strapdown.hpp"

#include <cmath>
#include <string>

#include "geomag/errors.hpp"

namespace geomag::strapdown {

EnvironmentConstants EnvironmentConstants::at_latitude(double lat_rad, double rate) {
    EnvironmentConstants env;
    env.latitude = lat_rad;
    env.earth_rate = rate * Vec3(std::cos(lat_rad), 0.0, std::sin(lat_rad));
    return env;
}

EnvironmentConstants EnvironmentConstants::no_earth_rate() {
    EnvironmentConstants env;
    env.earth_rate = Vec3::Zero();
    return env;
}

namespace {

void check_step(double dt) {
    if (!(dt > 0.0)) {
        throw ContractViolation("integration step must be positive, got dt=" +
                                std::to_string(dt));
    }
    // Relative slack so a stream timestamped at exactly the limit (n * 0.1)
    // is not rejected over representation noise in the differences.
    if (dt > kMaxStep * (1.0 + 1e-9)) {
        throw ContractViolation("sample gap " + std::to_string(dt) +
                                " s exceeds the " + std::to_string(kMaxStep) +
                                " s integration limit");
    }
}

Vec3 world_acceleration(const Quaternion& q, const Vec3& acc_body,
                        const EnvironmentConstants& env) {
    // Specific force f = R^T (a_true - g), so a_true = R f + g.
    return q.rotate(acc_body) + env.gravity;
}

IntegrationState step_velocity_position(IntegrationState st, const ImuSample& from,
                                        const ImuSample& to,
                                        const EnvironmentConstants& env) {
    const double dt = to.t - from.t;
    check_step(dt);

    const Vec3 a0 = world_acceleration(st.pose.q, from.acc, env);
    PoseState next = propagate_attitude(st.pose, 0.5 * (from.gyro + to.gyro), dt);
    const Vec3 a1 = world_acceleration(next.q, to.acc, env);
    const Vec3 a_mean = 0.5 * (a0 + a1);

    const Vec3 dv = a_mean * dt;
    const Vec3 dv_earth = -2.0 * env.earth_rate.cross(st.accel_integral) * dt;

    next.v = st.pose.v + dv + dv_earth;
    next.s = st.pose.s + st.pose.v * dt + 0.5 * a_mean * dt * dt + dt * dv +
             0.5 * dt * dv_earth;
    st.accel_integral += dv;
    st.pose = next;
    return st;
}

} // namespace

PoseState propagate_attitude(const PoseState& state, const Vec3& gyro, double dt) {
    check_step(dt);
    if (!all_finite(gyro)) {
        throw ContractViolation("gyro sample has non-finite entries");
    }
    const Vec3 half = 0.5 * gyro * dt;
    const Quaternion step{1.0, half.x(), half.y(), half.z()};
    PoseState next = state;
    next.q = (state.q * step).normalized();
    next.t = state.t + dt;
    return next;
}

Vec3 correct_acceleration(const PoseState& state, const Vec3& acc_body,
                          const EnvironmentConstants& env, const Vec3& omega_body) {
    const Vec3 omega_world = state.q.rotate(omega_body);
    return state.q.rotate(acc_body) + env.gravity + omega_world.cross(state.v);
}

IntegrationState propagate_velocity_position(IntegrationState state,
                                             std::span<const ImuSample> window,
                                             const EnvironmentConstants& env) {
    for (std::size_t i = 1; i < window.size(); ++i) {
        if (!(window[i].t > window[i - 1].t)) {
            throw ContractViolation("window samples must be strictly time-ordered");
        }
        state = step_velocity_position(state, window[i - 1], window[i], env);
    }
    return state;
}

PoseState propagate_velocity_position(const PoseState& state,
                                      std::span<const ImuSample> window,
                                      const EnvironmentConstants& env) {
    IntegrationState st{state, Vec3::Zero()};
    return propagate_velocity_position(std::move(st), window, env).pose;
}

std::vector<PoseState> dead_reckon(std::span<const ImuSample> trace,
                                   const PoseState& initial,
                                   const EnvironmentConstants& env) {
    if (trace.empty()) {
        throw ContractViolation("dead reckoning needs a non-empty trace");
    }
    std::vector<PoseState> out;
    out.reserve(trace.size());

    IntegrationState st{initial, Vec3::Zero()};
    st.pose.t = trace.front().t;
    out.push_back(st.pose);

    for (std::size_t i = 1; i < trace.size(); ++i) {
        try {
            st = step_velocity_position(st, trace[i - 1], trace[i], env);
        } catch (const ContractViolation& e) {
            throw ContractViolation("at t=" + std::to_string(trace[i].t) + ": " +
                                    e.what());
        }
        out.push_back(st.pose);
    }
    return out;
}

std::optional<std::pair<std::size_t, std::size_t>>
find_static_window(std::span<const ImuSample> trace, const StaticDetectionParams& params) {
    auto is_still = [&params](const ImuSample& s) {
        return std::abs(s.acc.norm() - params.gravity_magnitude) <=
                   params.acc_tolerance &&
               s.gyro.norm() < params.gyro_max;
    };

    std::size_t begin = 0;
    while (begin < trace.size()) {
        if (!is_still(trace[begin])) {
            ++begin;
            continue;
        }
        std::size_t end = begin;
        while (end < trace.size() && is_still(trace[end])) ++end;
        if (end > begin &&
            trace[end - 1].t - trace[begin].t >= params.window_s) {
            return std::make_pair(begin, end);
        }
        begin = end;
    }
    return std::nullopt;
}

} // namespace geomag::strapdown
