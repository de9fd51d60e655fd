#include "corotree/phantom.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "corotree/combine.hpp"

namespace corotree {

namespace {

constexpr double kPathStep = 0.25;       // growth step of the synthetic paths, mm
constexpr double kAortaRadius = 15.0;    // matches the labeler's ostium definition
constexpr double kAntialiasHalfWidth = 0.3;   // linear partial-volume ramp, mm
constexpr double kOcclusionRadius = 0.15;     // lumen below this radius is fully closed
constexpr double kEccentricMajorFactor = 0.577;  // major-axis share of the severity
constexpr int kMaxVolumeDim = 320;

// splitmix64; cheap deterministic seeding and uniforms independent of the
// standard library's distribution implementations.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : state_(seed) {}

    std::uint64_t next() {
        std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ULL);
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }

    double uniform(double lo, double hi) {
        const double u = static_cast<double>(next() >> 11) * 0x1.0p-53;
        return lo + (hi - lo) * u;
    }

    bool flip() { return (next() & 1ULL) != 0ULL; }

private:
    std::uint64_t state_;
};

Vec3 random_unit(Rng& rng) {
    while (true) {
        const Vec3 v{rng.uniform(-1.0, 1.0), rng.uniform(-1.0, 1.0), rng.uniform(-1.0, 1.0)};
        const double n = norm(v);
        if (n > 0.1 && n < 1.0) {
            return v / n;
        }
    }
}

Vec3 random_perpendicular(Rng& rng, const Vec3& axis) {
    while (true) {
        const Vec3 v = random_unit(rng);
        const Vec3 p = v - dot(v, axis) * axis;
        if (norm(p) > 0.1) {
            return normalized(p);
        }
    }
}

// Gentle helix: the direction rotates about `plane_normal` at constant
// curvature while keeping a small drift component along it, which prevents
// long branches from folding back onto their own start.
std::vector<Point3> grow_path(const Point3& start, const Vec3& direction,
                              const Vec3& plane_normal, double curvature, double drift,
                              double length) {
    Vec3 dir = normalized(direction + drift * plane_normal);
    std::vector<Point3> points;
    points.reserve(static_cast<std::size_t>(length / kPathStep) + 2);
    points.push_back(start);
    const int steps = static_cast<int>(std::lround(length / kPathStep));
    Point3 p = start;
    for (int i = 0; i < steps; ++i) {
        p += kPathStep * dir;
        points.push_back(p);
        dir = normalized(rotate_about_axis(dir, plane_normal, curvature * kPathStep));
    }
    return points;
}

int first_index_outside(const std::vector<Point3>& points, const Point3& root, double radius) {
    for (std::size_t i = 0; i < points.size(); ++i) {
        if (distance(points[i], root) > radius) {
            return static_cast<int>(i);
        }
    }
    return -1;
}

struct BranchGeometry {
    std::string name;
    std::vector<Point3> path;   // full polyline from the aorta center
    int labeled_start = 0;      // index of the ostium / bifurcation / divergence
    int raster_from = 0;        // first index this branch rasterizes (owned part)
    double radius = 2.0;
    std::vector<StenosisSpec> stenoses;  // centered in full-path arc via labeled_start
};

const BranchSpec* find_branch(const PhantomSpec& spec, const std::string& name) {
    for (const BranchSpec& b : spec.branches) {
        if (b.name == name) {
            return &b;
        }
    }
    return nullptr;
}

// Radius profile of one branch at a full-path index, plus the eccentric-axis
// scaling when an eccentric stenosis covers the position.
struct LocalLumen {
    double minor = 0.0;   // semi-axis along the eccentric direction
    double major = 0.0;   // semi-axis orthogonal to it
    bool eccentric = false;
};

LocalLumen lumen_at(const BranchGeometry& branch, int index) {
    const double arc = index * kPathStep;
    double minor_scale = 1.0;
    double major_scale = 1.0;
    bool eccentric = false;
    for (const StenosisSpec& s : branch.stenoses) {
        const double center = branch.labeled_start * kPathStep + s.position_mm;
        const double u = arc - center;
        if (std::abs(u) > 0.5 * s.length_mm) {
            continue;
        }
        const double taper = 0.5 * (1.0 + std::cos(2.0 * std::numbers::pi * u / s.length_mm));
        if (s.eccentric) {
            eccentric = true;
            minor_scale *= 1.0 - s.severity * taper;
            major_scale *= 1.0 - kEccentricMajorFactor * s.severity * taper;
        } else {
            minor_scale *= 1.0 - s.severity * taper;
            major_scale *= 1.0 - s.severity * taper;
        }
    }
    return {branch.radius * minor_scale, branch.radius * major_scale, eccentric};
}

// Smooth low-frequency warp with |delta| <= amplitude; shared points warp
// identically so overlapping branch prefixes stay coincident.
class JitterWarp {
public:
    JitterWarp(double amplitude, Rng& rng) : amplitude_(amplitude) {
        const double wavenumber = 2.0 * std::numbers::pi / 80.0;
        for (int c = 0; c < 3; ++c) {
            freq_[c] = wavenumber * random_unit(rng);
            phase_[c] = rng.uniform(0.0, 2.0 * std::numbers::pi);
        }
    }

    Point3 operator()(const Point3& p) const {
        if (amplitude_ <= 0.0) {
            return p;
        }
        const double a = amplitude_ / std::sqrt(3.0);
        return {p.x + a * std::sin(dot(p, freq_[0]) + phase_[0]),
                p.y + a * std::sin(dot(p, freq_[1]) + phase_[1]),
                p.z + a * std::sin(dot(p, freq_[2]) + phase_[2])};
    }

private:
    double amplitude_;
    Vec3 freq_[3];
    double phase_[3];
};

std::vector<SegmentLabel> expected_labels_for(const std::string& name, double length) {
    std::vector<SegmentLabel> labels;
    if (name == "RCA") {
        labels.push_back(SegmentLabel::rca_prox);
        if (length > 33.0) labels.push_back(SegmentLabel::rca_mid);
        if (length > 65.0) labels.push_back(SegmentLabel::rca_dist);
    } else if (name == "LAD") {
        labels.push_back(SegmentLabel::lad_prox);
        if (length > 33.0) labels.push_back(SegmentLabel::lad_mid);
        if (length > 65.0) labels.push_back(SegmentLabel::lad_dist);
    } else if (name == "CX") {
        labels.push_back(SegmentLabel::cx_prox);
        if (length > 33.0) labels.push_back(SegmentLabel::cx_dist);
        if (length > 65.0) labels.push_back(SegmentLabel::cx_om2);
    } else if (name == "RAMUS") {
        labels.push_back(SegmentLabel::ramus);
    } else if (name == "D1") {
        labels.push_back(SegmentLabel::lad_d1);
    } else if (name == "OM1") {
        labels.push_back(SegmentLabel::cx_om1);
    } else if (name == "LM") {
        labels.push_back(SegmentLabel::lm);
    }
    return labels;
}

void rasterize_branch(Volume& volume, const BranchGeometry& branch, const Vec3& eccentric_axis,
                      double lumen_hu, double background_hu) {
    const auto& path = branch.path;
    const int n = static_cast<int>(path.size());
    const double axial_half = 0.72 * kPathStep;  // slab overlap against curvature gaps

    for (int i = branch.raster_from; i < n; ++i) {
        const LocalLumen lumen = lumen_at(branch, i);
        if (lumen.minor < kOcclusionRadius) {
            continue;  // fully occluded: plaque fills the lumen, leave background
        }
        Vec3 tangent;
        if (i == 0) {
            tangent = path[1] - path[0];
        } else if (i == n - 1) {
            tangent = path[n - 1] - path[n - 2];
        } else {
            tangent = path[i + 1] - path[i - 1];
        }
        tangent = normalized(tangent);

        Vec3 minor_dir{};
        Vec3 major_dir{};
        if (lumen.eccentric) {
            minor_dir = eccentric_axis - dot(eccentric_axis, tangent) * tangent;
            if (norm(minor_dir) < 1e-6) {
                continue;  // eccentric axis parallel to the tangent; skip this point
            }
            minor_dir = normalized(minor_dir);
            major_dir = cross(tangent, minor_dir);
        }

        const double reach = std::max(lumen.minor, lumen.major) + kAntialiasHalfWidth + 0.25;
        const Point3& c = path[i];
        const auto bound = [&](double center, double origin, double spacing, int dim, bool hi) {
            const double g = (center + (hi ? reach : -reach) - origin) / spacing;
            const int idx = hi ? static_cast<int>(std::ceil(g)) : static_cast<int>(std::floor(g));
            return std::clamp(idx, 0, dim - 1);
        };
        const int x0 = bound(c.x, volume.origin.x, volume.spacing[0], volume.dims[0], false);
        const int x1 = bound(c.x, volume.origin.x, volume.spacing[0], volume.dims[0], true);
        const int y0 = bound(c.y, volume.origin.y, volume.spacing[1], volume.dims[1], false);
        const int y1 = bound(c.y, volume.origin.y, volume.spacing[1], volume.dims[1], true);
        const int z0 = bound(c.z, volume.origin.z, volume.spacing[2], volume.dims[2], false);
        const int z1 = bound(c.z, volume.origin.z, volume.spacing[2], volume.dims[2], true);

        for (int k = z0; k <= z1; ++k) {
            for (int j = y0; j <= y1; ++j) {
                for (int ii = x0; ii <= x1; ++ii) {
                    const Point3 v = volume.voxel_center(ii, j, k);
                    const Vec3 q = v - c;
                    const double axial = dot(q, tangent);
                    if (std::abs(axial) > axial_half) {
                        continue;
                    }
                    const Vec3 planar = q - axial * tangent;
                    double signed_dist;
                    if (lumen.eccentric) {
                        const double em = dot(planar, minor_dir) / lumen.minor;
                        const double eM = dot(planar, major_dir) / lumen.major;
                        signed_dist = (std::sqrt(em * em + eM * eM) - 1.0) * lumen.minor;
                    } else {
                        signed_dist = norm(planar) - lumen.minor;
                    }
                    const double fraction =
                        std::clamp(0.5 - signed_dist / (2.0 * kAntialiasHalfWidth), 0.0, 1.0);
                    const auto value =
                        static_cast<float>(background_hu + fraction * (lumen_hu - background_hu));
                    float& voxel = volume.at(ii, j, k);
                    voxel = std::max(voxel, value);
                }
            }
        }
    }
}

void validate_spec(const PhantomSpec& spec) {
    for (const char* required : {"RCA", "LAD", "CX"}) {
        if (find_branch(spec, required) == nullptr) {
            throw SpecError(std::string("phantom spec requires branch ") + required);
        }
    }
    for (const BranchSpec& b : spec.branches) {
        if (!(b.radius_mm > 0.0)) {
            throw SpecError("branch radius must be positive: " + b.name);
        }
        if (!(b.length_mm > 1.0)) {
            throw SpecError("branch length must exceed 1 mm: " + b.name);
        }
    }
    for (const StenosisSpec& s : spec.stenoses) {
        if (!(s.severity >= 0.0 && s.severity <= 1.0)) {
            throw SpecError("stenosis severity must lie in [0,1]");
        }
        if (!(s.length_mm > 0.0)) {
            throw SpecError("stenosis length must be positive");
        }
        const bool on_lm = s.branch == "LM";
        if (!on_lm && find_branch(spec, s.branch) == nullptr) {
            throw SpecError("stenosis references unknown branch " + s.branch);
        }
        const double branch_len =
            on_lm ? 0.0 : find_branch(spec, s.branch)->length_mm;  // LM checked below
        if (on_lm) {
            if (s.position_mm + 0.5 * s.length_mm > spec.lm_length_mm) {
                throw SpecError("LM stenosis extends past the bifurcation");
            }
        } else if (s.position_mm - 0.5 * s.length_mm < 0.0 ||
                   s.position_mm + 0.5 * s.length_mm > branch_len) {
            throw SpecError("stenosis extends past branch " + s.branch);
        }
    }
    if (!(spec.voxel_spacing_mm > 0.05)) {
        throw SpecError("voxel spacing too small");
    }
    if (!(spec.lumen_hu > spec.background_hu)) {
        throw SpecError("lumen must be brighter than background");
    }
}

}  // namespace

CadRadsGrade phantom_grade(const PhantomSpec& spec) {
    double max_severity = 0.0;
    for (const StenosisSpec& s : spec.stenoses) {
        max_severity = std::max(max_severity, s.severity);
    }
    return stenosis_band(max_severity);
}

namespace {

struct Built {
    BranchGeometry geometry;
    double spec_length = 0.0;
};

// The world is split at x = 0: the RCA spirals into patient-right (x < 0) on a
// helix around the -x axis, while the left tree stays at x > trunk length. Left
// branches cap their total turning below pi with the curl oriented forward
// (positive x), so they can never fold back across the bifurcation plane.
std::vector<Built> build_tree(const PhantomSpec& spec, Rng& rng, int* cb_index_out,
                              int* left_ostium_out) {
    const Point3 aorta_center{0.0, 0.0, 0.0};
    const Vec3 x_axis{1.0, 0.0, 0.0};

    std::vector<Built> built;
    const auto add_branch = [&built](const std::string& name, std::vector<Point3> path,
                                     int labeled_start, int raster_from, double radius,
                                     double spec_length) {
        Built b;
        b.geometry.name = name;
        b.geometry.path = std::move(path);
        b.geometry.labeled_start = labeled_start;
        b.geometry.raster_from = raster_from;
        b.geometry.radius = radius;
        b.spec_length = spec_length;
        built.push_back(std::move(b));
    };

    // RCA: helix with its axis along -x. Rotation about x preserves the axial
    // direction component, so x falls monotonically and the transverse circle
    // stays within ~11 mm of the axis.
    {
        const BranchSpec& rca_spec = *find_branch(spec, "RCA");
        const double phase = rng.uniform(0.0, 2.0 * std::numbers::pi);
        const double pitch = rng.uniform(0.42, 0.5);
        const double transverse = std::sqrt(1.0 - pitch * pitch);
        const Vec3 dir{-pitch, transverse * std::cos(phase), transverse * std::sin(phase)};
        const double turn_rate = rng.uniform(0.08, 0.09);  // rad per mm about the axis
        std::vector<Point3> path = grow_path(aorta_center, dir, x_axis, turn_rate, 0.0,
                                             kAortaRadius + 8.0 + rca_spec.length_mm);
        const int ostium = first_index_outside(path, aorta_center, kAortaRadius);
        if (ostium < 0) {
            throw SpecError("RCA never exits the aorta radius");
        }
        path.resize(ostium + static_cast<int>(std::lround(rca_spec.length_mm / kPathStep)) + 1);
        add_branch("RCA", std::move(path), ostium, 0, rca_spec.radius_mm, rca_spec.length_mm);
    }

    // Left trunk up to the bifurcation.
    const Vec3 trunk_dir =
        normalized(Vec3{1.0, rng.uniform(-0.2, 0.2), rng.uniform(-0.2, 0.2)});
    const Vec3 trunk_plane = random_perpendicular(rng, trunk_dir);
    std::vector<Point3> trunk = grow_path(aorta_center, trunk_dir, trunk_plane, 1.0 / 40.0, 0.0,
                                          kAortaRadius + 4.0 + spec.lm_length_mm);
    const int left_ostium = first_index_outside(trunk, aorta_center, kAortaRadius);
    if (left_ostium < 0) {
        throw SpecError("left trunk never exits the aorta radius");
    }
    trunk.resize(left_ostium + static_cast<int>(std::lround(spec.lm_length_mm / kPathStep)) + 1);
    const Point3 c_b = trunk.back();
    const int cb_index = static_cast<int>(trunk.size()) - 1;
    const Vec3 trunk_end_dir = normalized(trunk.back() - trunk[trunk.size() - 2]);
    *cb_index_out = cb_index;
    *left_ostium_out = left_ostium;

    // Branch directions at the bifurcation, ranked along the right axis:
    // LAD rightmost, CX leftmost, RAMUS (when present) in between.
    const Vec3 right_axis{-1.0, 0.0, 0.0};
    Vec3 right_in_plane = right_axis - dot(right_axis, trunk_end_dir) * trunk_end_dir;
    if (norm(right_in_plane) < 1e-6) {
        throw SpecError("degenerate trunk direction");
    }
    right_in_plane = normalized(right_in_plane);
    const Vec3 up_in_plane = cross(trunk_end_dir, right_in_plane);

    const double beta = rng.uniform(0.5, 0.62);
    const auto branch_direction = [&](double gamma) {
        return normalized(std::cos(beta) * trunk_end_dir +
                          std::sin(beta) * (std::cos(gamma) * right_in_plane +
                                            std::sin(gamma) * up_in_plane));
    };
    const double ramus_side = rng.flip() ? 1.0 : -1.0;
    const Vec3 lad_dir = branch_direction(rng.uniform(-0.15, 0.15));
    const Vec3 cx_dir = branch_direction(std::numbers::pi + rng.uniform(-0.15, 0.15));
    const Vec3 ramus_dir =
        branch_direction(ramus_side * std::numbers::pi / 2.0 + rng.uniform(-0.15, 0.15));

    // Arc with the curl center oriented forward: x(theta) >= x(start) for any
    // turning below pi as long as the initial direction points into +x.
    const auto grow_forward_arc = [&rng, &x_axis](const Point3& start, const Vec3& dir,
                                                  double length) {
        Vec3 plane = random_perpendicular(rng, dir);
        if (cross(plane, dir).x < 0.0) {
            plane = -1.0 * plane;
        }
        const double radius = rng.uniform(22.0, 26.0);
        return grow_path(start, dir, plane, 1.0 / radius, 0.1, length);
    };

    const auto add_left_main = [&](const std::string& name, const Vec3& dir) {
        const BranchSpec* branch_spec = find_branch(spec, name);
        if (branch_spec == nullptr) {
            return;
        }
        std::vector<Point3> own = grow_forward_arc(c_b, dir, branch_spec->length_mm);
        std::vector<Point3> full = trunk;
        full.insert(full.end(), own.begin() + 1, own.end());
        add_branch(name, std::move(full), cb_index,
                   name == "LAD" ? 0 : cb_index,  // the LAD owns the trunk voxels
                   branch_spec->radius_mm, branch_spec->length_mm);
    };
    add_left_main("LAD", lad_dir);
    add_left_main("CX", cx_dir);
    add_left_main("RAMUS", ramus_dir);

    const auto add_side_branch = [&](const std::string& name, const std::string& parent_name,
                                     double offset_mm) {
        const BranchSpec* side_spec = find_branch(spec, name);
        if (side_spec == nullptr) {
            return;
        }
        const std::vector<Point3>* parent = nullptr;
        for (const Built& b : built) {
            if (b.geometry.name == parent_name) {
                parent = &b.geometry.path;
            }
        }
        const int divergence = cb_index + static_cast<int>(std::lround(offset_mm / kPathStep));
        if (parent == nullptr || divergence + 1 >= static_cast<int>(parent->size())) {
            throw SpecError(name + " divergence lies past the parent branch");
        }
        const Vec3 local = normalized((*parent)[divergence + 1] - (*parent)[divergence - 1]);
        const Vec3 swing_axis = random_perpendicular(rng, local);
        const double swing = rng.uniform(0.62, 0.78);
        // Of the two swing senses, keep the one heading further into +x so the
        // side branch stays in left-tree territory.
        Vec3 dir = rotate_about_axis(local, swing_axis, swing);
        const Vec3 other = rotate_about_axis(local, swing_axis, -swing);
        if (other.x > dir.x) {
            dir = other;
        }
        std::vector<Point3> own = grow_forward_arc((*parent)[divergence], normalized(dir),
                                                   side_spec->length_mm);
        std::vector<Point3> full(parent->begin(), parent->begin() + divergence + 1);
        full.insert(full.end(), own.begin() + 1, own.end());
        add_branch(name, std::move(full), divergence, divergence, side_spec->radius_mm,
                   side_spec->length_mm);
    };
    add_side_branch("D1", "LAD", spec.d1_offset_mm);
    add_side_branch("OM1", "CX", spec.om1_offset_mm);
    return built;
}

// First index at which two paths stop being the same stored points.
int shared_prefix_end(const std::vector<Point3>& a, const std::vector<Point3>& b) {
    const std::size_t common = std::min(a.size(), b.size());
    std::size_t i = 0;
    while (i < common && a[i] == b[i]) {
        ++i;
    }
    return static_cast<int>(i);
}

// Reject trees that outgrow the maximum volume footprint.
bool tree_too_large(const std::vector<Built>& built, double voxel_spacing, double margin) {
    Point3 lo{1e30, 1e30, 1e30};
    Point3 hi{-1e30, -1e30, -1e30};
    for (const Built& b : built) {
        for (const Point3& p : b.geometry.path) {
            lo = {std::min(lo.x, p.x), std::min(lo.y, p.y), std::min(lo.z, p.z)};
            hi = {std::max(hi.x, p.x), std::max(hi.y, p.y), std::max(hi.z, p.z)};
        }
    }
    // Headroom for the jitter warp (applied after placement) and rounding.
    const double budget = (kMaxVolumeDim - 12) * voxel_spacing - 2.0 * margin;
    return (hi.x - lo.x) > budget || (hi.y - lo.y) > budget || (hi.z - lo.z) > budget;
}

// Reject trees whose tubes come close enough to bridge into one lumen run.
// Shared prefixes, the junction fan-out cone, and the common aorta interior
// are exempt; everything else must keep clear axis separation.
bool tree_has_collision(const std::vector<Built>& built) {
    constexpr double kMinClearance = 6.5;
    constexpr int kJunctionWindow = 64;  // 16 mm past the divergence
    constexpr int kStride = 2;

    for (std::size_t a = 0; a < built.size(); ++a) {
        const auto& pa = built[a].geometry.path;
        // Self approach (a tightly curled branch folding onto itself).
        for (std::size_t i = 0; i < pa.size(); i += kStride) {
            for (std::size_t j = i + 100; j < pa.size(); j += kStride) {
                if (distance(pa[i], pa[j]) < kMinClearance) {
                    return true;
                }
            }
        }
        for (std::size_t b = a + 1; b < built.size(); ++b) {
            const auto& pb = built[b].geometry.path;
            const int shared = shared_prefix_end(pa, pb);
            for (std::size_t i = 0; i < pa.size(); i += kStride) {
                for (std::size_t j = 0; j < pb.size(); j += kStride) {
                    const bool in_junction = static_cast<int>(i) < shared + kJunctionWindow &&
                                             static_cast<int>(j) < shared + kJunctionWindow;
                    if (in_junction) {
                        continue;
                    }
                    if (distance(pa[i], pb[j]) < kMinClearance) {
                        return true;
                    }
                }
            }
        }
    }
    return false;
}

}  // namespace

PhantomCase generate(const PhantomSpec& spec) {
    validate_spec(spec);

    // Geometry priors make collisions and oversized trees rare; a
    // deterministic reseed handles the remainder.
    constexpr double kVolumeMargin = 6.0;
    std::vector<Built> built;
    int cb_index = 0;
    int left_ostium = 0;
    Rng rng(0);
    bool placed = false;
    for (std::uint64_t attempt = 0; attempt < 64 && !placed; ++attempt) {
        rng = Rng(spec.seed * 0x9e3779b97f4a7c15ULL + attempt * 0xda942042e4dd58b5ULL + 1);
        built = build_tree(spec, rng, &cb_index, &left_ostium);
        placed = !tree_has_collision(built) &&
                 !tree_too_large(built, spec.voxel_spacing_mm, kVolumeMargin);
    }
    if (!placed) {
        throw SpecError("could not place a collision-free tree for " + spec.case_id);
    }

    // Attach stenoses to the geometry that rasterizes the affected lumen; LM
    // narrowings live on the trunk, which the LAD geometry owns.
    for (const StenosisSpec& s : spec.stenoses) {
        const std::string owner = s.branch == "LM" ? "LAD" : s.branch;
        bool attached = false;
        for (Built& b : built) {
            if (b.geometry.name != owner) {
                continue;
            }
            StenosisSpec mapped = s;
            if (s.branch == "LM") {
                // Positions on the LM are measured from the left ostium.
                mapped.position_mm = (left_ostium - cb_index) * kPathStep + s.position_mm;
            }
            b.geometry.stenoses.push_back(mapped);
            attached = true;
            break;
        }
        if (!attached) {
            throw SpecError("stenosis references absent branch " + s.branch);
        }
    }

    // Jitter last so shared prefixes stay exactly coincident.
    JitterWarp warp(spec.jitter_mm, rng);
    for (Built& b : built) {
        for (Point3& p : b.geometry.path) {
            p = warp(p);
        }
    }
    const Vec3 eccentric_axis = random_unit(rng);

    // Volume sized to the warped tree plus clearance for the tubes themselves;
    // MPR samples beyond the box read as air, which matches the background.
    Point3 lo{1e30, 1e30, 1e30};
    Point3 hi{-1e30, -1e30, -1e30};
    for (const Built& b : built) {
        for (const Point3& p : b.geometry.path) {
            lo = {std::min(lo.x, p.x), std::min(lo.y, p.y), std::min(lo.z, p.z)};
            hi = {std::max(hi.x, p.x), std::max(hi.y, p.y), std::max(hi.z, p.z)};
        }
    }
    const double margin = kVolumeMargin;
    Volume volume;
    volume.spacing = {spec.voxel_spacing_mm, spec.voxel_spacing_mm, spec.voxel_spacing_mm};
    volume.origin = {lo.x - margin, lo.y - margin, lo.z - margin};
    for (int d = 0; d < 3; ++d) {
        const double extent = (d == 0 ? hi.x - lo.x : d == 1 ? hi.y - lo.y : hi.z - lo.z);
        volume.dims[d] =
            static_cast<int>(std::ceil((extent + 2.0 * margin) / spec.voxel_spacing_mm)) + 1;
        if (volume.dims[d] > kMaxVolumeDim) {
            throw SpecError("phantom tree does not fit the maximum volume size");
        }
    }
    volume.voxels.assign(volume.voxel_count(), static_cast<float>(spec.background_hu));

    for (const Built& b : built) {
        // Continue the tube a little past the captured centerline so segment
        // tails do not fade into background within their own rows.
        BranchGeometry raster = b.geometry;
        const std::size_t n = raster.path.size();
        const Vec3 end_dir = normalized(raster.path[n - 1] - raster.path[n - 2]);
        for (int e = 1; e <= 10; ++e) {
            raster.path.push_back(raster.path[n - 1] + (e * kPathStep) * end_dir);
        }
        rasterize_branch(volume, raster, eccentric_axis, spec.lumen_hu, spec.background_hu);
    }

    PhantomCase result;
    result.spec = spec;
    result.volume = std::move(volume);
    result.ground_truth = phantom_grade(spec);

    result.centerlines.case_id = spec.case_id;
    int id = 0;
    for (const Built& b : built) {
        result.centerlines.centerlines.push_back({id++, b.geometry.path});
    }

    for (const Built& b : built) {
        BranchTruth truth;
        truth.name = b.geometry.name;
        truth.path = b.geometry.path;
        truth.expected_labels = expected_labels_for(b.geometry.name, b.spec_length);
        for (const StenosisSpec& s : spec.stenoses) {
            if (s.branch == b.geometry.name) {
                truth.max_severity = std::max(truth.max_severity, s.severity);
            }
        }
        result.per_branch_truth[truth.name] = truth;
    }
    {
        // The LM is the shared trunk up to the bifurcation; track it as its own
        // pseudo-branch for label verification.
        BranchTruth lm;
        lm.name = "LM";
        const auto& lad_path = result.per_branch_truth.at("LAD").path;
        lm.path.assign(lad_path.begin(), lad_path.begin() + cb_index + 1);
        lm.expected_labels = expected_labels_for("LM", spec.lm_length_mm);
        for (const StenosisSpec& s : spec.stenoses) {
            if (s.branch == "LM") {
                lm.max_severity = std::max(lm.max_severity, s.severity);
            }
        }
        result.per_branch_truth["LM"] = lm;
    }
    return result;
}

std::vector<PhantomSpec> generate_cohort(int n, std::uint64_t seed, double jitter_mm) {
    if (n < 6) {
        throw ValidationError("cohort needs at least 6 cases to cover every grade");
    }

    std::vector<PhantomSpec> cohort;
    cohort.reserve(n);
    for (int k = 0; k < n; ++k) {
        Rng rng(seed ^ (0xd1342543de82ef95ULL * static_cast<std::uint64_t>(k + 1)));
        const int grade = k % 6;
        const int variant = k / 6;

        PhantomSpec spec;
        spec.case_id = "case_" + std::string(k < 10 ? "00" : k < 100 ? "0" : "") + std::to_string(k);
        spec.seed = rng.next();
        spec.jitter_mm = jitter_mm;
        spec.lm_length_mm = rng.uniform(10.0, 14.0);

        const char* majors[] = {"RCA", "LAD", "CX"};
        const std::string target = majors[variant % 3];
        const bool eccentric = grade == 3 && (k % 2 == 1);

        double rca_radius = 2.0;
        double lad_radius = 2.0;
        double cx_radius = 1.9;
        if (grade >= 1) {
            double* target_radius = target == "RCA"   ? &rca_radius
                                    : target == "LAD" ? &lad_radius
                                                      : &cx_radius;
            if (grade == 4) {
                *target_radius = 3.2;  // keep the residual lumen resolvable
            } else if (eccentric) {
                *target_radius = 3.0;
            }
        }

        spec.branches.push_back({"RCA", rca_radius, rng.uniform(70.0, 74.0)});
        spec.branches.push_back({"LAD", lad_radius, rng.uniform(50.0, 54.0)});
        spec.branches.push_back({"CX", cx_radius, rng.uniform(44.0, 48.0)});
        if (variant % 2 == 0) {
            spec.branches.push_back({"RAMUS", 1.6, rng.uniform(34.0, 38.0)});
        }
        spec.branches.push_back({"D1", 1.5, rng.uniform(32.0, 36.0)});
        spec.branches.push_back({"OM1", 1.5, rng.uniform(26.0, 30.0)});
        spec.d1_offset_mm = rng.uniform(7.5, 9.5);
        spec.om1_offset_mm = rng.uniform(7.5, 9.5);

        // Stenoses on a left main branch sit distal of the side-branch fan-out
        // so the neighbour's lumen cannot backfill the narrowing.
        const auto stenosis_position = [&rng](const std::string& branch) {
            return branch == "RCA" ? rng.uniform(13.0, 21.0) : rng.uniform(25.0, 27.5);
        };
        if (grade >= 1) {
            StenosisSpec stenosis;
            stenosis.branch = target;
            stenosis.position_mm = stenosis_position(target);
            stenosis.length_mm = rng.uniform(6.0, 7.5);
            stenosis.eccentric = eccentric;
            switch (grade) {
                case 1: stenosis.severity = 0.18; break;
                case 2: stenosis.severity = 0.375; break;
                case 3: stenosis.severity = eccentric ? 0.65 : 0.60; break;
                case 4: stenosis.severity = 0.85; break;
                default: stenosis.severity = 1.0; break;
            }
            spec.stenoses.push_back(stenosis);

            if (grade >= 3 && variant % 2 == 1) {
                StenosisSpec secondary;
                secondary.branch = target == "RCA" ? "LAD" : "RCA";
                secondary.position_mm = stenosis_position(secondary.branch);
                secondary.length_mm = rng.uniform(6.0, 7.5);
                secondary.severity = 0.18;
                spec.stenoses.push_back(secondary);
            }
        }
        cohort.push_back(std::move(spec));
    }
    return cohort;
}

}  // namespace corotree
