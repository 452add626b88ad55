#include "geomag/filters.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>

#include "geomag/errors.hpp"

namespace geomag::filters {

std::pair<LowPassState, Vec3> lowpass_step(LowPassState state, const Vec3& sample,
                                           double dt) {
    if (!(dt > 0.0)) {
        throw ContractViolation("low-pass step needs dt > 0");
    }
    if (!(state.cutoff_hz > 0.0)) {
        throw ContractViolation("low-pass cutoff must be positive");
    }
    if (!all_finite(sample)) {
        throw ContractViolation("low-pass sample has non-finite entries");
    }
    const double rc = 1.0 / (2.0 * M_PI * state.cutoff_hz);
    state.alpha = dt / (dt + rc);
    if (!state.primed) {
        state.last_output = sample;
        state.primed = true;
    } else {
        state.last_output += state.alpha * (sample - state.last_output);
    }
    return {state, state.last_output};
}

double lowpass_variance_ratio(double alpha) {
    return alpha / (2.0 - alpha);
}

Mat6 process_noise(double q_accel, double dt) {
    const double d2 = dt * dt;
    Mat6 q = Mat6::Zero();
    q.topLeftCorner<3, 3>() = (q_accel * d2 * d2 / 4.0) * Mat3::Identity();
    q.topRightCorner<3, 3>() = (q_accel * d2 * dt / 2.0) * Mat3::Identity();
    q.bottomLeftCorner<3, 3>() = q.topRightCorner<3, 3>();
    q.bottomRightCorner<3, 3>() = (q_accel * d2) * Mat3::Identity();
    return q;
}

KalmanState kalman_predict(KalmanState state, const Vec3& acc_world, double dt) {
    if (!(dt > 0.0)) {
        throw ContractViolation("predict step needs dt > 0");
    }
    if (!all_finite(acc_world)) {
        throw ContractViolation("acceleration input has non-finite entries");
    }
    Mat6 f = Mat6::Identity();
    f.topRightCorner<3, 3>() = dt * Mat3::Identity();

    state.x.head<3>() += dt * state.x.tail<3>() + 0.5 * dt * dt * acc_world;
    state.x.tail<3>() += dt * acc_world;
    state.P = f * state.P * f.transpose() + process_noise(state.q_accel, dt);
    state.P = 0.5 * (state.P + state.P.transpose()).eval();
    return state;
}

KalmanState kalman_update(KalmanState state, const Vec3& pos_meas,
                          const Mat3& r_meas) {
    if (!all_finite(pos_meas) || !all_finite(r_meas)) {
        throw ContractViolation("measurement input has non-finite entries");
    }
    if ((r_meas - r_meas.transpose()).cwiseAbs().maxCoeff() > 1e-9) {
        throw ContractViolation("measurement noise must be symmetric");
    }
    Eigen::LLT<Mat3> r_llt(r_meas);
    if (r_llt.info() != Eigen::Success) {
        throw ContractViolation("measurement noise must be positive definite");
    }

    const Mat3 s = state.P.topLeftCorner<3, 3>() + r_meas;
    Eigen::LDLT<Mat3> s_ldlt(s);
    if (s_ldlt.info() != Eigen::Success || !s_ldlt.isPositive() ||
        s_ldlt.vectorD().minCoeff() <= 0.0) {
        throw DegenerateInput("innovation covariance is singular");
    }

    // H = [I 0]; K = P H' S^-1.
    const Mat63 ph = state.P.leftCols<3>();
    const Mat63 k = s_ldlt.solve(ph.transpose()).transpose();

    const Vec3 innovation = pos_meas - state.x.head<3>();
    state.x += k * innovation;

    // Joseph form: (I - K H) P (I - K H)' + K R K'.
    Mat6 ikh = Mat6::Identity();
    ikh.leftCols<3>() -= k;
    state.P = ikh * state.P * ikh.transpose() + k * r_meas * k.transpose();
    state.P = 0.5 * (state.P + state.P.transpose()).eval();

    state.last_innovation = innovation;
    state.last_gain = k;
    state.last_nis = innovation.dot(s_ldlt.solve(innovation));
    return state;
}

OffsetEstimate estimate_static_offsets(
    std::span<const strapdown::ImuSample> trace, double window_s,
    const strapdown::StaticDetectionParams& params) {
    strapdown::StaticDetectionParams p = params;
    p.window_s = std::min(p.window_s, window_s);
    const auto window = strapdown::find_static_window(trace, p);
    if (!window) {
        throw NotStatic("no static interval long enough for offset estimation");
    }

    const double t0 = trace[window->first].t;
    OffsetEstimate est;
    est.window_begin = window->first;
    est.window_end = window->first;

    Vec3 acc_sum = Vec3::Zero();
    Vec3 gyro_sum = Vec3::Zero();
    std::size_t n = 0;
    for (std::size_t i = window->first; i < window->second; ++i) {
        if (trace[i].t - t0 > window_s) break;
        acc_sum += trace[i].acc;
        gyro_sum += trace[i].gyro;
        ++n;
        est.window_end = i + 1;
    }
    if (n == 0) {
        throw InsufficientData("static window contains no samples");
    }

    const Vec3 acc_mean = acc_sum / static_cast<double>(n);
    const double mag = acc_mean.norm();
    if (mag < 1e-6) {
        throw DegenerateInput("static accelerometer mean is zero; cannot level");
    }
    est.acc = acc_mean - params.gravity_magnitude * (acc_mean / mag);
    est.gyro = gyro_sum / static_cast<double>(n);
    return est;
}

} // namespace geomag::filters
