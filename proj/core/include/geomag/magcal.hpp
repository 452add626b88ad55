#pragma once

#include <cstddef>
#include <optional>
#include <vector>

#include "geomag/geometry.hpp"

namespace geomag::magcal {

// Hard/soft-iron correction B_c = C * (B_raw - b_H). C is symmetric positive
// definite (canonical whitening form); units are microtesla throughout.
struct MagCalibration {
    Mat3 soft_iron = Mat3::Identity();
    Vec3 hard_iron = Vec3::Zero();
    double field_magnitude{0.0};
    double fit_residual{0.0};
};

struct MagSample {
    double t{0.0};
    Vec3 b = Vec3::Zero();
};

// Ordered raw magnetometer sweep. Fitting needs at least kMinFitSamples
// samples and strictly increasing timestamps.
struct MagSweep {
    std::vector<MagSample> samples;

    std::size_t size() const { return samples.size(); }
    void validate_order() const;
};

inline constexpr std::size_t kMinFitSamples = 12;

// Magnitude-stability summary over a static window: sigma_nc on raw samples,
// sigma_c on calibrated ones, epsilon = 100 * (sigma_nc - sigma_c) / sigma_nc.
struct StabilityReport {
    double sigma_nc{0.0};
    double sigma_c{0.0};
    double epsilon{0.0};
    std::size_t sample_count{0};
};

// Least-squares quadric fit of the sweep, reduced to center (hard iron) and
// SPD whitening matrix (soft iron). Corrected samples land on a sphere whose
// mean radius equals the mean raw magnitude; fit_residual is the RMS radial
// deviation of the corrected samples.
MagCalibration fit_calibration(const MagSweep& sweep);

// B_c = C * (raw - b_H).
Vec3 apply_calibration(const MagCalibration& cal, const Vec3& raw);

// Standard deviation of |B| over the window, raw vs calibrated. Without a
// calibration sigma_c repeats sigma_nc and epsilon is 0. A zero-variance
// window also reports epsilon = 0.
StabilityReport stability_metrics(const MagSweep& raw_window,
                                  const std::optional<MagCalibration>& cal);

// The epsilon relation applied to externally measured sigmas.
StabilityReport stability_from_sigmas(double sigma_nc, double sigma_c,
                                      std::size_t sample_count);

// Fraction of direction space the sweep covers, in [0, 1]: directions about
// the sample centroid are binned against a fixed set of reference directions.
// Diagnostic only; the fitter does not gate on it.
double sweep_coverage(const MagSweep& sweep);

} // namespace geomag::magcal
