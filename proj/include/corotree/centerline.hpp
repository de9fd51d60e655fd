#pragma once

#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "corotree/geometry.hpp"

namespace corotree {

// A single vessel polyline rooted at the aorta center. `id` is the position of
// the centerline within its set as read from file.
struct Centerline {
    int id = 0;
    std::vector<Point3> points;
};

struct CenterlineSet {
    std::string case_id;
    std::vector<Centerline> centerlines;
};

// Tolerance for the shared-first-point invariant of a CenterlineSet.
inline constexpr double kSharedRootTolerance = 1e-6;

// Throw ValidationError if the invariants do not hold.
void validate(const Centerline& centerline);
void validate(const CenterlineSet& set);

// The 13 segment names produced by the heuristic labeler.
enum class SegmentLabel {
    rca_prox,
    rca_mid,
    rca_dist,
    lm,
    lad_prox,
    lad_mid,
    lad_dist,
    lad_d1,
    cx_prox,
    cx_dist,
    cx_om2,
    cx_om1,
    ramus,
};

inline constexpr int kSegmentLabelCount = 13;

std::string_view to_string(SegmentLabel label);
SegmentLabel segment_label_from_string(std::string_view name);  // throws ParseError

// Arc-length spacing of resampled segment points and the fixed segment length.
inline constexpr double kResampleStepMm = 0.25;
inline constexpr double kSegmentLengthMm = 32.0;
// 32 mm / 0.25 mm intervals, endpoint inclusive.
inline constexpr int kSegmentPointCount = 129;

// A named 32 mm run of resampled centerline points. `truncated` is set when the
// anatomy ended before the full 32 mm were available.
struct LabeledSegment {
    SegmentLabel label = SegmentLabel::lm;
    std::vector<Point3> points;
    bool truncated = false;
};

double arc_length(std::span<const Point3> points);

// Resample a polyline at uniform arc-length steps 0, step, 2*step, ... along the
// piecewise-linear curve. The first input point is preserved exactly; the final
// output point is the exact input endpoint when the total length lands on the
// step grid. Throws GeometryError for degenerate input (< 2 distinct points).
std::vector<Point3> resample_polyline(std::span<const Point3> points, double step);

}  // namespace corotree
