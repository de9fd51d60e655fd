#include "corotree/centerline.hpp"

#include <array>
#include <cmath>
#include <string>

namespace corotree {

void validate(const Centerline& centerline) {
    if (centerline.points.size() < 2) {
        throw ValidationError("centerline " + std::to_string(centerline.id) +
                              " has fewer than 2 points");
    }
    for (std::size_t i = 0; i < centerline.points.size(); ++i) {
        if (!is_finite(centerline.points[i])) {
            throw ValidationError("centerline " + std::to_string(centerline.id) +
                                  " has a non-finite coordinate at point " + std::to_string(i));
        }
        if (i > 0 && distance(centerline.points[i - 1], centerline.points[i]) <= 0.0) {
            throw ValidationError("centerline " + std::to_string(centerline.id) +
                                  " has duplicate consecutive points at index " + std::to_string(i));
        }
    }
}

void validate(const CenterlineSet& set) {
    if (set.centerlines.empty()) {
        throw ValidationError("centerline set '" + set.case_id + "' is empty");
    }
    for (const Centerline& centerline : set.centerlines) {
        validate(centerline);
    }
    const Point3 root = set.centerlines.front().points.front();
    for (const Centerline& centerline : set.centerlines) {
        if (distance(centerline.points.front(), root) > kSharedRootTolerance) {
            throw ValidationError("centerline " + std::to_string(centerline.id) +
                                  " does not start at the shared aorta center");
        }
    }
}

namespace {

constexpr std::array<std::string_view, kSegmentLabelCount> kLabelNames = {
    "RCA_prox", "RCA_mid", "RCA_dist", "LM",      "LAD_prox", "LAD_mid", "LAD_dist",
    "LAD_D1",   "CX_prox", "CX_dist",  "CX_OM2",  "CX_OM1",   "RAMUS",
};

}  // namespace

std::string_view to_string(SegmentLabel label) {
    return kLabelNames[static_cast<int>(label)];
}

SegmentLabel segment_label_from_string(std::string_view name) {
    for (int i = 0; i < kSegmentLabelCount; ++i) {
        if (kLabelNames[i] == name) {
            return static_cast<SegmentLabel>(i);
        }
    }
    throw ParseError("unknown segment label '" + std::string(name) + "'");
}

double arc_length(std::span<const Point3> points) {
    double total = 0.0;
    for (std::size_t i = 1; i < points.size(); ++i) {
        total += distance(points[i - 1], points[i]);
    }
    return total;
}

std::vector<Point3> resample_polyline(std::span<const Point3> points, double step) {
    if (step <= 0.0 || !std::isfinite(step)) {
        throw GeometryError("resample step must be positive and finite");
    }
    if (points.size() < 2) {
        throw GeometryError("resample requires at least 2 points");
    }

    std::vector<double> cumulative(points.size(), 0.0);
    for (std::size_t i = 1; i < points.size(); ++i) {
        const double d = distance(points[i - 1], points[i]);
        if (d <= 0.0) {
            throw GeometryError("resample requires distinct consecutive points");
        }
        cumulative[i] = cumulative[i - 1] + d;
    }
    const double total = cumulative.back();

    // Small guard so an exact multiple of `step` is not lost to accumulated
    // floating-point error when computing the last on-grid index.
    const double grid_eps = 1e-9;
    const auto count = static_cast<std::size_t>(std::floor(total / step + grid_eps)) + 1;

    std::vector<Point3> out;
    out.reserve(count);
    out.push_back(points.front());  // arc length 0, preserved exactly

    std::size_t seg = 0;
    for (std::size_t k = 1; k < count; ++k) {
        const double target = static_cast<double>(k) * step;
        if (target >= total - grid_eps) {
            out.push_back(points.back());
            break;
        }
        while (seg + 2 < points.size() && cumulative[seg + 1] < target) {
            ++seg;
        }
        const double seg_len = cumulative[seg + 1] - cumulative[seg];
        const double u = (target - cumulative[seg]) / seg_len;
        out.push_back(points[seg] + u * (points[seg + 1] - points[seg]));
    }
    return out;
}

}  // namespace corotree
