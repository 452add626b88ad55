#include "geomag/magcal.hpp"

#include <Eigen/Dense>

#include <array>
#include <cmath>
#include <string>

#include "geomag/errors.hpp"

namespace geomag::magcal {

namespace {

// Scatter eigenvalue ratio below which the sweep no longer spans 3D.
constexpr double kCoplanarRatio = 1e-6;

void check_finite(const MagSweep& sweep) {
    for (const auto& s : sweep.samples) {
        if (!all_finite(s.b) || !std::isfinite(s.t)) {
            throw ContractViolation("sweep contains non-finite samples");
        }
    }
}

} // namespace

void MagSweep::validate_order() const {
    for (std::size_t i = 1; i < samples.size(); ++i) {
        if (!(samples[i].t > samples[i - 1].t)) {
            throw ContractViolation("sweep timestamps must be strictly increasing");
        }
    }
}

MagCalibration fit_calibration(const MagSweep& sweep) {
    const std::size_t n = sweep.size();
    if (n < kMinFitSamples) {
        throw InsufficientData("ellipsoid fit needs at least " +
                               std::to_string(kMinFitSamples) + " samples, got " +
                               std::to_string(n));
    }
    check_finite(sweep);
    sweep.validate_order();

    Vec3 centroid = Vec3::Zero();
    for (const auto& s : sweep.samples) centroid += s.b;
    centroid /= static_cast<double>(n);

    Mat3 scatter = Mat3::Zero();
    for (const auto& s : sweep.samples) {
        const Vec3 d = s.b - centroid;
        scatter += d * d.transpose();
    }
    scatter /= static_cast<double>(n);

    Eigen::SelfAdjointEigenSolver<Mat3> scatter_eig(scatter);
    const Vec3 lam = scatter_eig.eigenvalues(); // ascending
    if (lam(2) <= 0.0 || lam(0) < kCoplanarRatio * lam(2)) {
        const int rank = (lam(1) < kCoplanarRatio * lam(2)) ? 1 : 2;
        throw DegenerateFit("sweep spans only rank " + std::to_string(rank) +
                            " of 3 directions; rotate through more orientations");
    }

    // Work on centered, unit-scale data for conditioning; the quadric in
    // y = (x - centroid)/scale maps back to x below.
    const double scale = std::sqrt(scatter.trace());

    Eigen::MatrixXd design(n, 10);
    for (std::size_t i = 0; i < n; ++i) {
        const Vec3 y = (sweep.samples[i].b - centroid) / scale;
        design.row(static_cast<Eigen::Index>(i))
            << y.x() * y.x(), y.y() * y.y(), y.z() * y.z(),
               2.0 * y.x() * y.y(), 2.0 * y.x() * y.z(), 2.0 * y.y() * y.z(),
               2.0 * y.x(), 2.0 * y.y(), 2.0 * y.z(), 1.0;
    }

    // Algebraic fit: minimize |design * p| over unit p; the smallest right
    // singular vector is the quadric y'Ay + 2b'y + c = 0.
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(design, Eigen::ComputeThinV);
    Eigen::Matrix<double, 10, 1> p = svd.matrixV().col(9);
    if (p.head<3>().sum() < 0.0) p = -p;

    Mat3 A;
    A << p(0), p(3), p(4),
         p(3), p(1), p(5),
         p(4), p(5), p(2);
    const Vec3 b = p.segment<3>(6);
    const double c = p(9);

    Eigen::SelfAdjointEigenSolver<Mat3> a_eig(A);
    const Vec3 a_lam = a_eig.eigenvalues();
    if (a_lam(0) <= kCoplanarRatio * a_lam(2) || a_lam(2) <= 0.0) {
        throw DegenerateFit("fitted quadric is not an ellipsoid (sign-indefinite axes)");
    }

    const Vec3 y0 = -A.ldlt().solve(b);
    const double k = y0.dot(A * y0) - c;
    if (!(k > 0.0)) {
        throw DegenerateFit("fitted quadric has no real ellipsoid surface");
    }

    // Whitening root of A/k maps the fitted surface to the unit sphere.
    Eigen::SelfAdjointEigenSolver<Mat3> m_eig(A / k);
    const Mat3 w_unit = m_eig.eigenvectors() *
                        m_eig.eigenvalues().cwiseSqrt().asDiagonal() *
                        m_eig.eigenvectors().transpose();

    MagCalibration cal;
    cal.hard_iron = centroid + scale * y0;

    const Mat3 w = w_unit / scale;
    double mean_raw = 0.0;
    double mean_white = 0.0;
    for (const auto& s : sweep.samples) {
        mean_raw += s.b.norm();
        mean_white += (w * (s.b - cal.hard_iron)).norm();
    }
    mean_raw /= static_cast<double>(n);
    mean_white /= static_cast<double>(n);
    if (!(mean_white > 0.0)) {
        throw DegenerateFit("corrected sweep collapsed to zero radius");
    }

    // Mean corrected magnitude pinned to the mean raw magnitude so the
    // calibration keeps physical microtesla scale.
    cal.soft_iron = (mean_raw / mean_white) * w;

    double sq_dev = 0.0;
    double mean_mag = 0.0;
    std::vector<double> mags(n);
    for (std::size_t i = 0; i < n; ++i) {
        mags[i] = apply_calibration(cal, sweep.samples[i].b).norm();
        mean_mag += mags[i];
    }
    mean_mag /= static_cast<double>(n);
    for (std::size_t i = 0; i < n; ++i) {
        const double d = mags[i] - mean_mag;
        sq_dev += d * d;
    }
    cal.field_magnitude = mean_mag;
    cal.fit_residual = std::sqrt(sq_dev / static_cast<double>(n));
    return cal;
}

Vec3 apply_calibration(const MagCalibration& cal, const Vec3& raw) {
    return cal.soft_iron * (raw - cal.hard_iron);
}

StabilityReport stability_metrics(const MagSweep& raw_window,
                                  const std::optional<MagCalibration>& cal) {
    const std::size_t n = raw_window.size();
    if (n == 0) {
        throw InsufficientData("stability metrics need a non-empty window");
    }
    check_finite(raw_window);

    auto sigma_of = [n](const std::vector<double>& mags) {
        double mean = 0.0;
        for (double m : mags) mean += m;
        mean /= static_cast<double>(n);
        double sq = 0.0;
        for (double m : mags) sq += (m - mean) * (m - mean);
        return std::sqrt(sq / static_cast<double>(n));
    };

    std::vector<double> raw_mags(n), cal_mags(n);
    for (std::size_t i = 0; i < n; ++i) {
        raw_mags[i] = raw_window.samples[i].b.norm();
        cal_mags[i] = cal ? apply_calibration(*cal, raw_window.samples[i].b).norm()
                          : raw_mags[i];
    }
    return stability_from_sigmas(sigma_of(raw_mags), sigma_of(cal_mags), n);
}

StabilityReport stability_from_sigmas(double sigma_nc, double sigma_c,
                                      std::size_t sample_count) {
    if (sigma_nc < 0.0 || sigma_c < 0.0) {
        throw ContractViolation("sigma values must be non-negative");
    }
    StabilityReport rep;
    rep.sigma_nc = sigma_nc;
    rep.sigma_c = sigma_c;
    rep.epsilon = sigma_nc > 0.0 ? 100.0 * (sigma_nc - sigma_c) / sigma_nc : 0.0;
    rep.sample_count = sample_count;
    return rep;
}

double sweep_coverage(const MagSweep& sweep) {
    if (sweep.size() == 0) return 0.0;
    check_finite(sweep);

    Vec3 centroid = Vec3::Zero();
    for (const auto& s : sweep.samples) centroid += s.b;
    centroid /= static_cast<double>(sweep.size());

    // 32 Fibonacci-lattice reference directions; a bin counts as covered when
    // some sample direction lands nearest to it.
    constexpr int kBins = 32;
    std::array<Vec3, kBins> refs;
    const double golden = M_PI * (3.0 - std::sqrt(5.0));
    for (int i = 0; i < kBins; ++i) {
        const double z = 1.0 - 2.0 * (i + 0.5) / kBins;
        const double r = std::sqrt(std::max(0.0, 1.0 - z * z));
        const double a = golden * i;
        refs[static_cast<std::size_t>(i)] = Vec3(r * std::cos(a), r * std::sin(a), z);
    }

    std::array<bool, kBins> hit{};
    for (const auto& s : sweep.samples) {
        const Vec3 d = s.b - centroid;
        const double nrm = d.norm();
        if (nrm < 1e-12) continue;
        const Vec3 u = d / nrm;
        int best = 0;
        double best_dot = -2.0;
        for (int i = 0; i < kBins; ++i) {
            const double dot = u.dot(refs[static_cast<std::size_t>(i)]);
            if (dot > best_dot) {
                best_dot = dot;
                best = i;
            }
        }
        hit[static_cast<std::size_t>(best)] = true;
    }
    int covered = 0;
    for (bool h : hit) covered += h ? 1 : 0;
    return static_cast<double>(covered) / kBins;
}

} // namespace geomag::magcal
