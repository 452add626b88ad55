#pragma once

#include <string>
#include <vector>

#include "geomag/geometry.hpp"

namespace geomag::cloud {

struct PointCloud {
    std::vector<Vec3> points;
    std::string sensor_id;
    double t{0.0};
};

struct Pose {
    Rotation r;
    Vec3 translation = Vec3::Zero();
};

// Every point p -> R p + T.
PointCloud transform_cloud(const PointCloud& cloud, const Pose& pose);

// Symmetric nearest-neighbor merge quality: distances a->b and b->a pooled,
// RMSE over the pool. Brute force; desk-scale clouds only.
struct MergeReport {
    double rmse{0.0};
    std::vector<double> distances; // one per point, a->b then b->a
};

MergeReport merge_error(const PointCloud& a, const PointCloud& b);

// Fixed-width histogram of nearest-neighbor distances for reports.
struct Histogram {
    double bin_width{0.0};
    std::vector<std::size_t> counts;
};

Histogram distance_histogram(const std::vector<double>& distances,
                             std::size_t bins, double max_distance);

} // namespace geomag::cloud
