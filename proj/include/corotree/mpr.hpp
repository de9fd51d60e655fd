#pragma once

#include <utility>
#include <vector>

#include "corotree/centerline.hpp"
#include "corotree/volume.hpp"

namespace corotree {

// In-plane geometry of an MPR stack: 36 samples at 0.33 mm stay inside the
// 12 mm field of view. The centerline point lies on the sample grid at index
// W/2 so that the angle-0 longitudinal cut is exactly a stored row.
inline constexpr int kMprWidth = 36;
inline constexpr double kMprInPlaneSpacing = 0.33;
inline constexpr double kMprFrameSpacing = kResampleStepMm;
inline constexpr int kMprCenterIndex = kMprWidth / 2;

// HU window applied to every MPR sample before rescaling to [0,1].
inline constexpr double kHuClipLow = -300.0;
inline constexpr double kHuClipHigh = 1024.0;

// Clip to [-300, 1024] HU and map affinely onto [0,1].
inline double normalize_hu(double hu) {
    const double clipped = std::clamp(hu, kHuClipLow, kHuClipHigh);
    return (clipped - kHuClipLow) / (kHuClipHigh - kHuClipLow);
}

// Orthonormal frame at a centerline point.
struct Frame {
    Vec3 tangent;
    Vec3 normal;
    Vec3 binormal;
};

// Per-point frames: tangents by central differences (one-sided at the ends),
// normals propagated by parallel transport from an initial normal chosen as the
// projection of world +y. Parallel transport avoids the Frenet degeneracies on
// straight runs and keeps the in-plane orientation continuous.
std::vector<Frame> build_frames(std::span<const Point3> points);

// Image block sampled orthogonally to a labeled segment, values in [0,1].
// Layout: data[(l*W + row)*W + col]; row runs along the binormal, col along the
// normal, both offset by (index - W/2) * 0.33 mm from the centerline point.
struct MprStack {
    SegmentLabel label = SegmentLabel::lm;
    int length = 0;  // L = number of centerline points
    std::vector<float> data;
    std::vector<Frame> frames;
    std::vector<Point3> points;
    bool truncated = false;

    float at(int l, int row, int col) const {
        return data[(static_cast<std::size_t>(l) * kMprWidth + row) * kMprWidth + col];
    }
};

// Sample a W x W grid per centerline point by trilinear interpolation.
// Out-of-volume samples take -300 HU (0 after normalization). Throws
// OutOfVolumeError when no sample of the whole stack is inside the volume.
MprStack extract_mpr(const Volume& volume, const LabeledSegment& segment);

// L x W cut through the stack containing the centerline axis at angle `angle`.
struct LongitudinalSlice {
    SegmentLabel label = SegmentLabel::lm;
    double angle = 0.0;
    int length = 0;
    std::vector<float> data;

    float at(int l, int k) const { return data[static_cast<std::size_t>(l) * kMprWidth + k]; }
};

// Sample W points per frame along the in-plane line through the frame center at
// the given angle (bilinear within the W x W plane, border samples replicated).
// Angle must be in [0, pi).
LongitudinalSlice extract_longitudinal_slice(const MprStack& stack, double angle);

// Slices at `angle` and `angle + pi/2 (mod pi)`.
std::pair<LongitudinalSlice, LongitudinalSlice> extract_orthogonal_pair(const MprStack& stack,
                                                                        double angle);

}  // namespace corotree
