#pragma once

#include <Eigen/Core>

#include <span>
#include <utility>

#include "geomag/geometry.hpp"
#include "geomag/strapdown.hpp"

namespace geomag::filters {

using Vec6 = Eigen::Matrix<double, 6, 1>;
using Mat6 = Eigen::Matrix<double, 6, 6>;
using Mat63 = Eigen::Matrix<double, 6, 3>;

// Single-pole exponential smoother. alpha tracks the sample interval:
// alpha = dt / (dt + 1/(2 pi cutoff_hz)).
struct LowPassState {
    double cutoff_hz{1.0};
    double alpha{0.0};
    Vec3 last_output = Vec3::Zero();
    bool primed{false};
};

// y <- y_prev + alpha (x - y_prev); the first sample primes the filter and
// passes through unchanged.
std::pair<LowPassState, Vec3> lowpass_step(LowPassState state, const Vec3& sample,
                                           double dt);

// Steady-state output/input variance ratio of the smoother on white noise.
double lowpass_variance_ratio(double alpha);

// Position+velocity per axis (x = [s, v]), acceleration as control input,
// position as measurement. q_accel is the variance of the per-step
// acceleration noise; each predict discretizes it into the process noise
//   Q(dt) = q_accel * [dt^4/4 I, dt^3/2 I; dt^3/2 I, dt^2 I].
struct KalmanState {
    Vec6 x = Vec6::Zero();
    Mat6 P = Mat6::Identity();
    double q_accel{1e-2};
    Mat3 R_meas = Mat3::Identity();

    // Diagnostics from the latest update.
    Vec3 last_innovation = Vec3::Zero();
    Mat63 last_gain = Mat63::Zero();
    double last_nis{0.0};

    Vec3 position() const { return x.head<3>(); }
    Vec3 velocity() const { return x.tail<3>(); }
};

Mat6 process_noise(double q_accel, double dt);

// x advanced by the constant-acceleration kinematic model, P <- F P F' + Q.
KalmanState kalman_predict(KalmanState state, const Vec3& acc_world, double dt);

// Position measurement update, Joseph-form covariance for robustness.
// Innovation, gain and normalized innovation squared land in the
// diagnostics fields.
KalmanState kalman_update(KalmanState state, const Vec3& pos_meas,
                          const Mat3& R_meas);

// Static-window sensor offsets per the mean-subtraction scheme: gyro offset
// is the window mean (true rate is zero at rest), accelerometer offset is
// the window mean minus a gravity-magnitude vector along the measured
// direction (magnitude correction; tilt stays with attitude init).
struct OffsetEstimate {
    Vec3 acc = Vec3::Zero();
    Vec3 gyro = Vec3::Zero();
    std::size_t window_begin{0};
    std::size_t window_end{0};
};

// Locates the first static window in the trace and averages over its first
// window_s seconds. Throws NotStatic when no window qualifies.
OffsetEstimate estimate_static_offsets(
    std::span<const strapdown::ImuSample> trace, double window_s = 2.0,
    const strapdown::StaticDetectionParams& params = {});

} // namespace geomag::filters
