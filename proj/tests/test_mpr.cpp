#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <random>

#include "corotree/io.hpp"
#include "corotree/mpr.hpp"
#include "support.hpp"

using namespace corotree;
using namespace corotree::testing;

namespace {

LabeledSegment straight_z_segment(int n_points, Point3 start = {0, 0, 0}) {
    LabeledSegment segment;
    segment.label = SegmentLabel::lad_prox;
    for (int i = 0; i < n_points; ++i) {
        segment.points.push_back({start.x, start.y, start.z + 0.25 * i});
    }
    return segment;
}

Volume uniform_volume(float hu, std::array<int, 3> dims = {32, 32, 48}) {
    Volume volume;
    volume.dims = dims;
    volume.spacing = {0.4, 0.4, 0.4};
    volume.origin = {-0.4 * (dims[0] / 2), -0.4 * (dims[1] / 2), -2.0};
    volume.voxels.assign(volume.voxel_count(), hu);
    return volume;
}

// Antialiased straight tube along z through the volume center, with an
// optional eccentric lumen offset.
Volume tube_volume(double radius, double lumen_hu, double background_hu,
                   Vec3 lumen_offset = {0, 0, 0}, double edge_mm = 0.4) {
    Volume volume = uniform_volume(static_cast<float>(background_hu), {48, 48, 48});
    for (int k = 0; k < volume.dims[2]; ++k) {
        for (int j = 0; j < volume.dims[1]; ++j) {
            for (int i = 0; i < volume.dims[0]; ++i) {
                const Point3 p = volume.voxel_center(i, j, k);
                const double dx = p.x - lumen_offset.x;
                const double dy = p.y - lumen_offset.y;
                const double d = std::sqrt(dx * dx + dy * dy) - radius;
                const double fraction = std::clamp(0.5 - d / (2.0 * edge_mm), 0.0, 1.0);
                volume.at(i, j, k) =
                    static_cast<float>(background_hu + fraction * (lumen_hu - background_hu));
            }
        }
    }
    return volume;
}

// Smooth bright blob around the z axis with a linear angular modulation along
// `direction`; infinitely differentiable, so interpolation errors stay small.
Volume smooth_angular_volume(double phi0) {
    Volume volume = uniform_volume(0.0f, {48, 48, 48});
    const double cx = std::cos(phi0);
    const double sx = std::sin(phi0);
    for (int k = 0; k < volume.dims[2]; ++k) {
        for (int j = 0; j < volume.dims[1]; ++j) {
            for (int i = 0; i < volume.dims[0]; ++i) {
                const Point3 p = volume.voxel_center(i, j, k);
                const double rho2 = p.x * p.x + p.y * p.y;
                const double f =
                    std::exp(-rho2 / 8.0) * (1.0 + 0.1 * (p.x * cx + p.y * sx));
                volume.at(i, j, k) = static_cast<float>(-300.0 + 600.0 * f);
            }
        }
    }
    return volume;
}

double nearest_neighbor_sample(const Volume& volume, const Point3& world) {
    const int i = static_cast<int>(std::lround((world.x - volume.origin.x) / volume.spacing[0]));
    const int j = static_cast<int>(std::lround((world.y - volume.origin.y) / volume.spacing[1]));
    const int k = static_cast<int>(std::lround((world.z - volume.origin.z) / volume.spacing[2]));
    return volume.at(i, j, k);
}

double frame_rotation_angle(const Frame& a, const Frame& b) {
    // trace of the relative rotation between two orthonormal frames
    const double trace = dot(b.tangent, a.tangent) + dot(b.normal, a.normal) +
                         dot(b.binormal, a.binormal);
    return std::acos(std::clamp(0.5 * (trace - 1.0), -1.0, 1.0));
}

}  // namespace

TEST_SUITE("mpr") {

TEST_CASE("frames on a straight line") {
    const LabeledSegment segment = straight_z_segment(41);
    const auto frames = build_frames(segment.points);
    REQUIRE(frames.size() == 41);
    for (const Frame& f : frames) {
        CHECK(distance(f.tangent, {0, 0, 1}) < 1e-12);
        CHECK(distance(f.normal, {0, 1, 0}) < 1e-12);  // projection of world +y
        CHECK(distance(f.binormal, {-1, 0, 0}) < 1e-12);
    }
}

TEST_CASE("frames on a planar arc keep the plane normal fixed") {
    std::vector<Point3> arc;
    const double radius = 25.0;
    for (int i = 0; i <= 120; ++i) {
        const double t = 0.3 + 0.01 * i;
        arc.push_back({radius * std::cos(t), radius * std::sin(t), 0.0});
    }
    const auto frames = build_frames(arc);
    // The transported frame axis matching the plane normal stays put; with the
    // +y-projection seed on an xy-arc that is the binormal.
    for (const Frame& f : frames) {
        CHECK(std::abs(std::abs(f.binormal.z) - 1.0) < 1e-9);
        CHECK(distance(f.binormal, frames.front().binormal) < 1e-9);
    }
}

TEST_CASE("frames are orthonormal and rotate minimally") {
    std::vector<Point3> helix;
    for (int i = 0; i <= 400; ++i) {
        const double t = 0.02 * i;
        helix.push_back({12.0 * std::cos(t), 12.0 * std::sin(t), 3.0 * t});
    }
    const auto frames = build_frames(helix);
    for (std::size_t i = 0; i < frames.size(); ++i) {
        CHECK(std::abs(norm(frames[i].tangent) - 1.0) < 1e-9);
        CHECK(std::abs(norm(frames[i].normal) - 1.0) < 1e-9);
        CHECK(std::abs(norm(frames[i].binormal) - 1.0) < 1e-9);
        CHECK(std::abs(dot(frames[i].tangent, frames[i].normal)) < 1e-9);
        CHECK(std::abs(dot(frames[i].tangent, frames[i].binormal)) < 1e-9);
        CHECK(std::abs(dot(frames[i].normal, frames[i].binormal)) < 1e-9);
        if (i > 0) {
            const double tangent_angle =
                angle_between(frames[i - 1].tangent, frames[i].tangent);
            CHECK(frame_rotation_angle(frames[i - 1], frames[i]) <= tangent_angle + 1e-9);
            CHECK(dot(frames[i - 1].normal, frames[i].normal) > 0.0);  // no flips
        }
    }
}

TEST_CASE("degenerate tangents are rejected") {
    std::vector<Point3> bad{{0, 0, 0}, {0, 0, 0}, {0, 0, 1}};
    CHECK_THROWS_AS(build_frames(bad), GeometryError);
    CHECK_THROWS_AS(build_frames(std::vector<Point3>{{0, 0, 0}}), GeometryError);
}

TEST_CASE("HU normalization anchors") {
    CHECK(normalize_hu(-300.0) == 0.0);
    CHECK(normalize_hu(362.0) == 0.5);
    CHECK(normalize_hu(1024.0) == 1.0);
    CHECK(normalize_hu(-1000.0) == 0.0);  // clipped
    CHECK(normalize_hu(3000.0) == 1.0);
    for (double hu = -400.0; hu < 1100.0; hu += 7.0) {
        CHECK(normalize_hu(hu) <= normalize_hu(hu + 7.0));  // monotone
    }
}

TEST_CASE("uniform volumes map to the clip bounds") {
    const LabeledSegment segment = straight_z_segment(9);
    for (const auto& [hu, expected] : std::vector<std::pair<float, float>>{
             {1024.0f, 1.0f}, {-300.0f, 0.0f}, {-800.0f, 0.0f}, {362.0f, 0.5f}}) {
        const MprStack stack = extract_mpr(uniform_volume(hu), segment);
        CHECK(stack.length == 9);
        for (float v : stack.data) {
            CHECK(v == expected);
        }
    }
}

TEST_CASE("every stack sample lies in [0,1]") {
    std::mt19937_64 rng(4);
    Volume volume = uniform_volume(0.0f);
    std::uniform_real_distribution<float> hu(-2000.0f, 4000.0f);
    for (float& v : volume.voxels) {
        v = hu(rng);
    }
    const MprStack stack = extract_mpr(volume, straight_z_segment(17));
    for (float v : stack.data) {
        CHECK(v >= 0.0f);
        CHECK(v <= 1.0f);
    }
}

TEST_CASE("tube phantom: bright lumen, dark corners, plausible area") {
    const double radius = 2.0;
    const Volume volume = tube_volume(radius, 400.0, -50.0);
    const MprStack stack = extract_mpr(volume, straight_z_segment(21));

    const double threshold = normalize_hu(0.5 * (400.0 + -50.0));
    int lumen_samples = 0;
    for (int r = 0; r < kMprWidth; ++r) {
        for (int c = 0; c < kMprWidth; ++c) {
            lumen_samples += stack.at(10, r, c) > threshold;
        }
    }
    const double area = lumen_samples * kMprInPlaneSpacing * kMprInPlaneSpacing;
    const double expected = std::numbers::pi * radius * radius;
    CHECK(std::abs(area - expected) / expected < 0.15);

    CHECK(stack.at(10, kMprCenterIndex, kMprCenterIndex) > 0.4);  // 400 HU lumen
    CHECK(stack.at(10, 0, 0) < 0.25);                             // background corner
}

TEST_CASE("out-of-volume segments fail, out-of-volume samples read as air") {
    const Volume volume = uniform_volume(500.0f, {16, 16, 16});
    LabeledSegment far = straight_z_segment(9, {500.0, 0.0, 0.0});
    CHECK_THROWS_AS(extract_mpr(volume, far), OutOfVolumeError);

    // Segment along the volume edge: the plane reaches outside, which must
    // read as -300 HU -> 0.
    LabeledSegment edge = straight_z_segment(9, {volume.origin.x + 0.2, 0.0, 0.0});
    const MprStack stack = extract_mpr(volume, edge);
    // Rows run along the binormal (-x): the row extremes overshoot the small
    // volume and read as air, while the centerline sample stays bright.
    CHECK(stack.at(4, kMprWidth - 1, kMprCenterIndex) == 0.0f);
    CHECK(stack.at(4, kMprCenterIndex, kMprCenterIndex) > 0.5f);
}

TEST_CASE("trilinear equals nearest neighbor away from block boundaries") {
    Volume volume = uniform_volume(100.0f, {24, 24, 24});
    for (int k = 0; k < volume.dims[2]; ++k) {
        for (int j = 0; j < volume.dims[1]; ++j) {
            for (int i = 12; i < volume.dims[0]; ++i) {
                volume.at(i, j, k) = 300.0f;
            }
        }
    }
    const double boundary_x = volume.origin.x + 11.5 * volume.spacing[0];
    std::mt19937_64 rng(17);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int trial = 0; trial < 500; ++trial) {
        const Point3 p{volume.origin.x + u(rng) * 0.4 * 23.0,
                       volume.origin.y + u(rng) * 0.4 * 23.0,
                       volume.origin.z + u(rng) * 0.4 * 23.0};
        if (std::abs(p.x - boundary_x) < 1.2 * volume.spacing[0]) {
            continue;  // skip the transition band
        }
        CHECK(sample_trilinear(volume, p, -300.0) ==
              doctest::Approx(nearest_neighbor_sample(volume, p)).epsilon(1e-12));
    }
}

TEST_CASE("slice at angle 0 is exactly the central row, pi/2 the central column") {
    const Volume volume = tube_volume(2.0, 400.0, -50.0, {0.7, 0.3, 0.0});
    const MprStack stack = extract_mpr(volume, straight_z_segment(15));

    const LongitudinalSlice row = extract_longitudinal_slice(stack, 0.0);
    for (int l = 0; l < stack.length; ++l) {
        for (int k = 0; k < kMprWidth; ++k) {
            CHECK(row.at(l, k) == stack.at(l, kMprCenterIndex, k));
        }
    }
    const LongitudinalSlice col = extract_longitudinal_slice(stack, std::numbers::pi / 2.0);
    for (int l = 0; l < stack.length; ++l) {
        for (int k = 0; k < kMprWidth; ++k) {
            CHECK(col.at(l, k) == stack.at(l, k, kMprCenterIndex));
        }
    }
    CHECK_THROWS_AS(extract_longitudinal_slice(stack, -0.1), ValidationError);
    CHECK_THROWS_AS(extract_longitudinal_slice(stack, std::numbers::pi), ValidationError);
}

TEST_CASE("TTA slices of a rotationally symmetric stack agree") {
    // Broad compact-support radial bump, smooth at the interpolation scale.
    MprStack stack;
    stack.label = SegmentLabel::lm;
    stack.length = 7;
    stack.data.resize(static_cast<std::size_t>(stack.length) * kMprWidth * kMprWidth);
    const double support = 5.5;
    const double floor = std::exp(-support * support / 16.0);
    std::size_t out = 0;
    for (int l = 0; l < stack.length; ++l) {
        for (int r = 0; r < kMprWidth; ++r) {
            for (int c = 0; c < kMprWidth; ++c) {
                const double x = (c - kMprCenterIndex) * kMprInPlaneSpacing;
                const double y = (r - kMprCenterIndex) * kMprInPlaneSpacing;
                const double g = std::exp(-(x * x + y * y) / 16.0) - floor;
                stack.data[out++] =
                    static_cast<float>(g > 0.0 ? 0.15 * g / (1.0 - floor) : 0.0);
            }
        }
    }

    std::vector<LongitudinalSlice> slices;
    for (int j = 0; j < 16; ++j) {
        slices.push_back(extract_longitudinal_slice(stack, j * std::numbers::pi / 16.0));
    }
    double worst = 0.0;
    for (std::size_t a = 0; a < slices.size(); ++a) {
        for (std::size_t b = a + 1; b < slices.size(); ++b) {
            for (std::size_t i = 0; i < slices[a].data.size(); ++i) {
                worst = std::max(worst,
                                 static_cast<double>(std::abs(slices[a].data[i] - slices[b].data[i])));
            }
        }
    }
    CHECK(worst < 1e-3);

    // A stack varying only along the axis is symmetric as well; its cuts must
    // agree exactly once border samples replicate.
    MprStack axial;
    axial.label = SegmentLabel::lm;
    axial.length = 7;
    axial.data.resize(static_cast<std::size_t>(axial.length) * kMprWidth * kMprWidth);
    for (int l = 0; l < axial.length; ++l) {
        std::fill_n(axial.data.begin() + static_cast<std::size_t>(l) * kMprWidth * kMprWidth,
                    kMprWidth * kMprWidth, static_cast<float>(0.1 * l));
    }
    const LongitudinalSlice first = extract_longitudinal_slice(axial, 0.0);
    for (int j = 1; j < 16; ++j) {
        CHECK(extract_longitudinal_slice(axial, j * std::numbers::pi / 16.0).data == first.data);
    }
}

TEST_CASE("orthogonal pairs") {
    const Volume volume = tube_volume(2.0, 400.0, -50.0, {0.8, 0.0, 0.0});
    const MprStack stack = extract_mpr(volume, straight_z_segment(15));

    const auto [first, second] = extract_orthogonal_pair(stack, 0.0);
    CHECK(first.angle == 0.0);
    CHECK(second.angle == doctest::Approx(std::numbers::pi / 2.0));

    // pair(a).second == single(a + pi/2 mod pi), bit for bit.
    for (double angle : {0.0, 0.4, 2.0}) {
        const auto pair = extract_orthogonal_pair(stack, angle);
        double wrapped = angle + std::numbers::pi / 2.0;
        if (wrapped >= std::numbers::pi) {
            wrapped -= std::numbers::pi;
        }
        const LongitudinalSlice direct = extract_longitudinal_slice(stack, wrapped);
        CHECK(pair.second.angle == direct.angle);
        CHECK(pair.second.data == direct.data);
    }

    // With an eccentric lumen the two views differ; swapping the order swaps
    // what a downstream scorer sees first.
    const auto views = extract_orthogonal_pair(stack, 0.3);
    CHECK(views.first.data != views.second.data);
}

TEST_CASE("rotating the content matches shifting the slice angle") {
    const double theta = std::numbers::pi / 5.0;
    const Volume base = smooth_angular_volume(0.9);
    const Volume rotated = smooth_angular_volume(0.9 + theta);
    const LabeledSegment segment = straight_z_segment(15);
    const MprStack stack_base = extract_mpr(base, segment);
    const MprStack stack_rot = extract_mpr(rotated, segment);

    for (double alpha : {theta + 0.1, theta + 0.8, theta + 2.0}) {
        const LongitudinalSlice a = extract_longitudinal_slice(stack_rot, alpha);
        const LongitudinalSlice b = extract_longitudinal_slice(stack_base, alpha - theta);
        REQUIRE(a.data.size() == b.data.size());
        for (std::size_t i = 0; i < a.data.size(); ++i) {
            CHECK(std::abs(a.data[i] - b.data[i]) < 1e-2);
        }
    }
}

TEST_CASE("stack io round trip") {
    const Volume volume = tube_volume(1.5, 400.0, -50.0);
    const MprStack stack = extract_mpr(volume, straight_z_segment(11));
    const auto dir = std::filesystem::temp_directory_path() / "corotree_test_mpr";
    std::filesystem::create_directories(dir);
    write_stack(stack, dir / "stack.json");
    const MprStack back = read_stack(dir / "stack.json");
    CHECK(back.label == stack.label);
    CHECK(back.length == stack.length);
    CHECK(back.truncated == stack.truncated);
    CHECK(back.data == stack.data);
}

}  // TEST_SUITE
