#pragma once

// Test-only oracles and fixture builders. Everything here is written from the
// operation definitions, independent of the library's implementation paths.

#include <algorithm>
#include <cmath>
#include <numbers>
#include <optional>
#include <random>
#include <vector>

#include "corotree/centerline.hpp"
#include "corotree/combine.hpp"
#include "corotree/labeler.hpp"
#include "corotree/metrics.hpp"
#include "corotree/mpr.hpp"

namespace corotree::testing {

// ---------------------------------------------------------------------------
// Metric oracles

// O(n^2) pairwise Mann-Whitney statistic, ties counted 1/2.
inline double brute_force_auc(const std::vector<BinaryOutcome>& outcomes) {
    double wins = 0.0;
    long n_pos = 0;
    long n_neg = 0;
    for (const BinaryOutcome& p : outcomes) {
        if (!p.positive) {
            ++n_neg;
            continue;
        }
        ++n_pos;
        for (const BinaryOutcome& n : outcomes) {
            if (n.positive) {
                continue;
            }
            if (p.score > n.score) {
                wins += 1.0;
            } else if (p.score == n.score) {
                wins += 0.5;
            }
        }
    }
    return wins / (static_cast<double>(n_pos) * static_cast<double>(n_neg));
}

inline double trapezoid_auc(const std::vector<RocPoint>& curve) {
    double area = 0.0;
    for (std::size_t i = 1; i < curve.size(); ++i) {
        area += 0.5 * (curve[i].tpr + curve[i - 1].tpr) * (curve[i].fpr - curve[i - 1].fpr);
    }
    return area;
}

// ---------------------------------------------------------------------------
// Bifurcation oracle: exhaustive pair and index enumeration straight from the
// definition. For every unordered pair, a candidate index n is the divergence
// point when the polylines coincide within tolerance at every index <= n and
// separate at n + 1 within the common range.
struct OracleBifurcation {
    int point_index = -1;
    int pair_count = 0;
    int centerline_pos = -1;
    Point3 point;
};

inline std::optional<OracleBifurcation> oracle_bifurcation(
    const std::vector<Centerline>& lines, double tolerance) {
    struct Entry {
        int index;
        int count;
        int min_pos;
    };
    std::vector<Entry> entries;
    for (std::size_t i = 0; i < lines.size(); ++i) {
        for (std::size_t j = i + 1; j < lines.size(); ++j) {
            const auto& a = lines[i].points;
            const auto& b = lines[j].points;
            const std::size_t common = std::min(a.size(), b.size());
            std::optional<int> divergence;
            for (std::size_t n = 0; n + 1 < common; ++n) {
                bool together = true;
                for (std::size_t m = 0; m <= n; ++m) {
                    if (distance(a[m], b[m]) > tolerance) {
                        together = false;
                        break;
                    }
                }
                if (together && distance(a[n + 1], b[n + 1]) > tolerance) {
                    divergence = static_cast<int>(n);
                    break;
                }
            }
            if (!divergence.has_value()) {
                continue;
            }
            bool found = false;
            for (Entry& e : entries) {
                if (e.index == *divergence) {
                    e.count += 1;
                    e.min_pos = std::min(e.min_pos, static_cast<int>(i));
                    found = true;
                }
            }
            if (!found) {
                entries.push_back({*divergence, 1, static_cast<int>(i)});
            }
        }
    }
    if (entries.empty()) {
        return std::nullopt;
    }
    const Entry* best = &entries.front();
    for (const Entry& e : entries) {
        if (e.count > best->count || (e.count == best->count && e.index < best->index)) {
            best = &e;
        }
    }
    OracleBifurcation result;
    result.point_index = best->index;
    result.pair_count = best->count;
    result.centerline_pos = best->min_pos;
    result.point = lines[best->min_pos].points[best->index];
    return result;
}

// ---------------------------------------------------------------------------
// Geometry helpers

// Arc-length position of a point lying on a polyline, via projection onto each
// segment (independent of the resampler's bookkeeping).
inline double arc_position_on_polyline(const std::vector<Point3>& poly, const Point3& p) {
    double best_dist = std::numeric_limits<double>::infinity();
    double best_arc = 0.0;
    double arc = 0.0;
    for (std::size_t i = 0; i + 1 < poly.size(); ++i) {
        const Vec3 d = poly[i + 1] - poly[i];
        const double len = norm(d);
        const double t = std::clamp(dot(p - poly[i], d) / (len * len), 0.0, 1.0);
        const Point3 foot = poly[i] + t * d;
        const double dist = distance(p, foot);
        if (dist < best_dist) {
            best_dist = dist;
            best_arc = arc + t * len;
        }
        arc += len;
    }
    return best_arc;
}

inline double point_to_polyline_distance(const Point3& p, const std::vector<Point3>& poly) {
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i + 1 < poly.size(); ++i) {
        const Vec3 d = poly[i + 1] - poly[i];
        const double len2 = squared_norm(d);
        const double t = len2 > 0.0 ? std::clamp(dot(p - poly[i], d) / len2, 0.0, 1.0) : 0.0;
        best = std::min(best, distance(p, poly[i] + t * d));
    }
    return best;
}

struct RigidTransform {
    double angle_z = 0.0;
    Vec3 translation;

    Point3 operator()(const Point3& p) const {
        const double c = std::cos(angle_z);
        const double s = std::sin(angle_z);
        return {c * p.x - s * p.y + translation.x, s * p.x + c * p.y + translation.y,
                p.z + translation.z};
    }
};

inline std::vector<Point3> transformed(const RigidTransform& t, const std::vector<Point3>& pts) {
    std::vector<Point3> out;
    out.reserve(pts.size());
    for (const Point3& p : pts) {
        out.push_back(t(p));
    }
    return out;
}

inline std::vector<Point3> random_polyline(std::mt19937_64& rng, int n_points,
                                           double step_lo = 0.2, double step_hi = 2.0) {
    std::uniform_real_distribution<double> step(step_lo, step_hi);
    std::uniform_real_distribution<double> turn(-0.4, 0.4);
    std::vector<Point3> pts;
    pts.push_back({0.0, 0.0, 0.0});
    Vec3 dir{1.0, 0.0, 0.0};
    for (int i = 1; i < n_points; ++i) {
        const Vec3 axis = normalized(Vec3{turn(rng), turn(rng), 1.0});
        dir = normalized(rotate_about_axis(dir, axis, turn(rng)));
        pts.push_back(pts.back() + step(rng) * dir);
    }
    return pts;
}

// Straight centerline from the aorta center: `aorta_mm` of run-in plus
// `length_past_ostium` measured from the first point outside the 15 mm radius,
// on the 0.25 mm grid.
inline Centerline straight_centerline(int id, const Vec3& direction, double aorta_mm,
                                      double length_past_ostium, double step = 0.25) {
    const Vec3 dir = normalized(direction);
    const int n =
        static_cast<int>(std::lround((aorta_mm + length_past_ostium) / step)) + 1;
    Centerline line;
    line.id = id;
    line.points.reserve(n);
    for (int i = 0; i < n; ++i) {
        line.points.push_back(Point3{} + (i * step) * dir);
    }
    return line;
}

// ---------------------------------------------------------------------------
// Synthetic MPR stacks (no volume involved): antialiased tube cross sections
// centered on the frame center, optionally elliptical per row.
struct RowLumen {
    double minor_mm = 2.0;
    double major_mm = 2.0;
    double axis_angle = 0.0;  // orientation of the major axis in the plane
};

inline MprStack make_tube_stack(const std::vector<RowLumen>& rows, double edge_mm = 0.5) {
    MprStack stack;
    stack.label = SegmentLabel::lad_prox;
    stack.length = static_cast<int>(rows.size());
    stack.data.resize(static_cast<std::size_t>(stack.length) * kMprWidth * kMprWidth);
    std::size_t out = 0;
    for (const RowLumen& lumen : rows) {
        const double ca = std::cos(lumen.axis_angle);
        const double sa = std::sin(lumen.axis_angle);
        for (int r = 0; r < kMprWidth; ++r) {
            for (int c = 0; c < kMprWidth; ++c) {
                const double x = (c - kMprCenterIndex) * kMprInPlaneSpacing;
                const double y = (r - kMprCenterIndex) * kMprInPlaneSpacing;
                const double along_major = x * ca + y * sa;
                const double along_minor = -x * sa + y * ca;
                double signed_dist;
                if (lumen.minor_mm <= 0.0) {
                    signed_dist = edge_mm;  // fully occluded row
                } else {
                    const double e = std::sqrt(
                        (along_major / lumen.major_mm) * (along_major / lumen.major_mm) +
                        (along_minor / lumen.minor_mm) * (along_minor / lumen.minor_mm));
                    signed_dist = (e - 1.0) * lumen.minor_mm;
                }
                const double v = std::clamp(0.5 - signed_dist / (2.0 * edge_mm), 0.0, 1.0);
                stack.data[out++] = static_cast<float>(v);
            }
        }
    }
    return stack;
}

inline std::vector<RowLumen> uniform_rows(int n, double radius_mm) {
    return std::vector<RowLumen>(n, RowLumen{radius_mm, radius_mm, 0.0});
}

}  // namespace corotree::testing
