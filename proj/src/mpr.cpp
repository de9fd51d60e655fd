#include "corotree/mpr.hpp"

#include <cmath>
#include <numbers>
#include <string>

namespace corotree {

namespace {

// Minimal rotation taking unit tangent t0 to unit tangent t1, applied to u.
Vec3 parallel_transport(const Vec3& u, const Vec3& t0, const Vec3& t1) {
    const Vec3 axis = cross(t0, t1);
    const double s = norm(axis);
    const double c = dot(t0, t1);
    if (s < 1e-14) {
        if (c < 0.0) {
            throw GeometryError("tangent reversal within a single step");
        }
        return u;  // tangents parallel, nothing to transport
    }
    return rotate_about_axis(u, axis / s, std::atan2(s, c));
}

Vec3 initial_normal(const Vec3& tangent) {
    const Vec3 ey{0.0, 1.0, 0.0};
    Vec3 n = ey - dot(ey, tangent) * tangent;
    if (norm(n) < 1e-8) {
        const Vec3 ex{1.0, 0.0, 0.0};
        n = ex - dot(ex, tangent) * tangent;
    }
    return normalized(n);
}

}  // namespace

std::vector<Frame> build_frames(std::span<const Point3> points) {
    const std::size_t n = points.size();
    if (n < 2) {
        throw GeometryError("frames require at least 2 points");
    }

    std::vector<Frame> frames(n);
    for (std::size_t i = 0; i < n; ++i) {
        Vec3 t;
        if (i == 0) {
            t = points[1] - points[0];
        } else if (i == n - 1) {
            t = points[n - 1] - points[n - 2];
        } else {
            t = points[i + 1] - points[i - 1];
        }
        if (norm(t) < 1e-12) {
            throw GeometryError("zero-length tangent at point " + std::to_string(i));
        }
        frames[i].tangent = normalized(t);
    }

    frames[0].normal = initial_normal(frames[0].tangent);
    frames[0].binormal = cross(frames[0].tangent, frames[0].normal);
    for (std::size_t i = 1; i < n; ++i) {
        Vec3 nrm = parallel_transport(frames[i - 1].normal, frames[i - 1].tangent, frames[i].tangent);
        // Re-orthogonalize against accumulated drift.
        nrm = nrm - dot(nrm, frames[i].tangent) * frames[i].tangent;
        frames[i].normal = normalized(nrm);
        frames[i].binormal = cross(frames[i].tangent, frames[i].normal);
    }
    return frames;
}

MprStack extract_mpr(const Volume& volume, const LabeledSegment& segment) {
    validate(volume);
    const auto& pts = segment.points;
    if (pts.size() < 2) {
        throw GeometryError("segment needs at least 2 points for MPR extraction");
    }

    MprStack stack;
    stack.label = segment.label;
    stack.length = static_cast<int>(pts.size());
    stack.truncated = segment.truncated;
    stack.points = pts;
    stack.frames = build_frames(pts);
    stack.data.resize(static_cast<std::size_t>(stack.length) * kMprWidth * kMprWidth);

    bool any_inside = false;
    std::size_t out = 0;
    for (int l = 0; l < stack.length; ++l) {
        const Frame& f = stack.frames[l];
        for (int row = 0; row < kMprWidth; ++row) {
            const double v = (row - kMprCenterIndex) * kMprInPlaneSpacing;
            for (int col = 0; col < kMprWidth; ++col) {
                const double u = (col - kMprCenterIndex) * kMprInPlaneSpacing;
                const Point3 pos = pts[l] + u * f.normal + v * f.binormal;
                bool inside = false;
                const double hu = sample_trilinear(volume, pos, kHuClipLow, &inside);
                any_inside = any_inside || inside;
                stack.data[out++] = static_cast<float>(normalize_hu(hu));
            }
        }
    }
    if (!any_inside) {
        throw OutOfVolumeError("segment '" + std::string(to_string(segment.label)) +
                               "' does not intersect the volume");
    }
    return stack;
}

namespace {

// Bilinear lookup within one W x W plane of a stack, border-replicated: the
// W-sample span is centered one half step off the frame center, so a cut can
// overshoot the last sample column by up to half the span at steep angles.
double sample_plane(const MprStack& stack, int l, double row, double col) {
    row = std::clamp(row, 0.0, static_cast<double>(kMprWidth - 1));
    col = std::clamp(col, 0.0, static_cast<double>(kMprWidth - 1));
    int r0 = static_cast<int>(row);
    int c0 = static_cast<int>(col);
    if (r0 > kMprWidth - 2) r0 = kMprWidth - 2;
    if (c0 > kMprWidth - 2) c0 = kMprWidth - 2;
    const double fr = row - r0;
    const double fc = col - c0;
    const double v00 = stack.at(l, r0, c0);
    const double v01 = stack.at(l, r0, c0 + 1);
    const double v10 = stack.at(l, r0 + 1, c0);
    const double v11 = stack.at(l, r0 + 1, c0 + 1);
    return (v00 * (1.0 - fc) + v01 * fc) * (1.0 - fr) + (v10 * (1.0 - fc) + v11 * fc) * fr;
}

}  // namespace

LongitudinalSlice extract_longitudinal_slice(const MprStack& stack, double angle) {
    if (!(angle >= 0.0 && angle < std::numbers::pi)) {
        throw ValidationError("slice angle must lie in [0, pi)");
    }

    double ca = std::cos(angle);
    double sa = std::sin(angle);
    // Snap the axis-aligned cuts so alpha = 0 / pi/2 reproduce a stored row /
    // column bit-exactly.
    if (std::abs(ca) < 1e-12) ca = 0.0;
    if (std::abs(sa) < 1e-12) sa = 0.0;

    LongitudinalSlice slice;
    slice.label = stack.label;
    slice.angle = angle;
    slice.length = stack.length;
    slice.data.resize(static_cast<std::size_t>(stack.length) * kMprWidth);

    std::size_t out = 0;
    for (int l = 0; l < stack.length; ++l) {
        for (int k = 0; k < kMprWidth; ++k) {
            const double off = k - kMprCenterIndex;
            const double col = kMprCenterIndex + off * ca;
            const double row = kMprCenterIndex + off * sa;
            slice.data[out++] = static_cast<float>(sample_plane(stack, l, row, col));
        }
    }
    return slice;
}

std::pair<LongitudinalSlice, LongitudinalSlice> extract_orthogonal_pair(const MprStack& stack,
                                                                        double angle) {
    double second = angle + std::numbers::pi / 2.0;
    if (second >= std::numbers::pi) {
        second -= std::numbers::pi;
    }
    return {extract_longitudinal_slice(stack, angle), extract_longitudinal_slice(stack, second)};
}

}  // namespace corotree
