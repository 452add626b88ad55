#include "geomag/cloud_match.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "geomag/errors.hpp"

namespace geomag::cloud {

PointCloud transform_cloud(const PointCloud& cloud, const Pose& pose) {
    PointCloud out;
    out.sensor_id = cloud.sensor_id;
    out.t = cloud.t;
    out.points.reserve(cloud.points.size());
    for (const Vec3& p : cloud.points) {
        if (!all_finite(p)) {
            throw ContractViolation("cloud contains non-finite points");
        }
        out.points.push_back(pose.r * p + pose.translation);
    }
    return out;
}

namespace {

void nearest_distances(const std::vector<Vec3>& from, const std::vector<Vec3>& to,
                       std::vector<double>& out) {
    for (const Vec3& p : from) {
        double best = std::numeric_limits<double>::infinity();
        for (const Vec3& q : to) {
            best = std::min(best, (p - q).squaredNorm());
        }
        out.push_back(std::sqrt(best));
    }
}

} // namespace

MergeReport merge_error(const PointCloud& a, const PointCloud& b) {
    if (a.points.empty() || b.points.empty()) {
        throw ContractViolation("merge error needs two non-empty clouds");
    }
    for (const Vec3& p : a.points) {
        if (!all_finite(p)) throw ContractViolation("cloud contains non-finite points");
    }
    for (const Vec3& p : b.points) {
        if (!all_finite(p)) throw ContractViolation("cloud contains non-finite points");
    }

    MergeReport rep;
    rep.distances.reserve(a.points.size() + b.points.size());
    nearest_distances(a.points, b.points, rep.distances);
    nearest_distances(b.points, a.points, rep.distances);

    double sq = 0.0;
    for (double d : rep.distances) sq += d * d;
    rep.rmse = std::sqrt(sq / static_cast<double>(rep.distances.size()));
    return rep;
}

Histogram distance_histogram(const std::vector<double>& distances,
                             std::size_t bins, double max_distance) {
    if (bins == 0 || !(max_distance > 0.0)) {
        throw ContractViolation("histogram needs bins > 0 and max_distance > 0");
    }
    Histogram h;
    h.bin_width = max_distance / static_cast<double>(bins);
    h.counts.assign(bins, 0);
    for (double d : distances) {
        auto idx = static_cast<std::size_t>(std::floor(d / h.bin_width));
        if (idx >= bins) idx = bins - 1; // overflow bucket
        ++h.counts[idx];
    }
    return h;
}

} // namespace geomag::cloud
