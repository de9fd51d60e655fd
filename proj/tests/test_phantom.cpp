#include <doctest.h>

#include <map>

#include "corotree/io.hpp"
#include "corotree/labeler.hpp"
#include "corotree/phantom.hpp"
#include "support.hpp"

using namespace corotree;
using namespace corotree::testing;

namespace {

PhantomSpec simple_spec() {
    PhantomSpec spec;
    spec.case_id = "simple";
    spec.seed = 11;
    spec.branches = {{"RCA", 2.0, 72.0}, {"LAD", 2.0, 52.0}, {"CX", 1.9, 46.0}};
    return spec;
}

// Lumen width through a path point, measured by bisecting the half-intensity
// crossing of the rasterized volume along a perpendicular direction.
double measured_width(const Volume& volume, const Point3& center, const Vec3& tangent,
                      const Vec3& probe, double threshold_hu) {
    const Vec3 dir = normalized(probe - dot(probe, tangent) * tangent);
    const auto crossing = [&](double sign) {
        double lo = 0.0;
        double hi = 6.0;
        while (sample_trilinear(volume, center + (sign * hi) * dir, -1000.0) > threshold_hu) {
            hi += 1.0;
            if (hi > 12.0) {
                return 12.0;
            }
        }
        for (int it = 0; it < 60; ++it) {
            const double mid = 0.5 * (lo + hi);
            if (sample_trilinear(volume, center + (sign * mid) * dir, -1000.0) > threshold_hu) {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        return 0.5 * (lo + hi);
    };
    return crossing(1.0) + crossing(-1.0);
}

}  // namespace

TEST_SUITE("phantom") {

TEST_CASE("grade follows the maximum severity band") {
    PhantomSpec spec = simple_spec();
    CHECK(phantom_grade(spec).value() == 0);

    spec.stenoses.push_back({"LAD", 16.0, 7.0, 0.6, false});
    CHECK(phantom_grade(spec).value() == 3);

    spec.stenoses.clear();
    spec.stenoses.push_back({"CX", 16.0, 7.0, 0.3, false});
    spec.stenoses.push_back({"RCA", 16.0, 7.0, 0.8, false});
    CHECK(phantom_grade(spec).value() == 4);
}

TEST_CASE("spec validation") {
    PhantomSpec spec = simple_spec();
    spec.stenoses.push_back({"XYZ", 16.0, 7.0, 0.5, false});
    CHECK_THROWS_AS(generate(spec), SpecError);

    spec = simple_spec();
    spec.stenoses.push_back({"CX", 45.0, 7.0, 0.5, false});  // past the branch end
    CHECK_THROWS_AS(generate(spec), SpecError);

    spec = simple_spec();
    spec.branches.erase(spec.branches.begin());  // no RCA
    CHECK_THROWS_AS(generate(spec), SpecError);
}

TEST_CASE("generated cases are structurally valid") {
    const PhantomCase phantom = generate(simple_spec());
    CHECK_NOTHROW(validate(phantom.centerlines));
    CHECK_NOTHROW(validate(phantom.volume));
    CHECK(phantom.centerlines.centerlines.size() == 3);
    CHECK(phantom.per_branch_truth.count("LM") == 1);
    CHECK(phantom.per_branch_truth.at("RCA").expected_labels.size() == 3);
    CHECK(phantom.per_branch_truth.at("LAD").expected_labels.size() == 2);  // 52 mm: prox + mid
    CHECK(phantom.per_branch_truth.at("CX").expected_labels.size() == 2);
}

TEST_CASE("rasterized stenosis width matches the analytic target") {
    PhantomSpec spec = simple_spec();
    spec.seed = 23;
    const double severity = 0.5;
    const double position = 18.0;
    spec.stenoses.push_back({"RCA", position, 8.0, severity, false});
    const PhantomCase phantom = generate(spec);

    const auto& path = phantom.per_branch_truth.at("RCA").path;
    int ostium = 0;
    while (distance(path[ostium], path.front()) <= 15.0) {
        ++ostium;
    }
    const int center_idx = ostium + static_cast<int>(std::lround(position / 0.25));
    const Point3 center = path[center_idx];
    const Vec3 tangent = normalized(path[center_idx + 1] - path[center_idx - 1]);

    const double threshold = 0.5 * (spec.lumen_hu + spec.background_hu);
    const double voxel_diagonal = spec.voxel_spacing_mm * std::sqrt(3.0);
    const double expected_min = (1.0 - severity) * 2.0 * 2.0;
    for (const Vec3 probe : {Vec3{0, 1, 0}, Vec3{0, 0, 1}, Vec3{0, 0.7, 0.7}}) {
        const double width = measured_width(phantom.volume, center, tangent, probe, threshold);
        CHECK(std::abs(width - expected_min) < voxel_diagonal);
    }

    // Away from the stenosis the full caliber is restored.
    const int clean_idx = ostium + static_cast<int>(std::lround(40.0 / 0.25));
    const Vec3 clean_tangent = normalized(path[clean_idx + 1] - path[clean_idx - 1]);
    const double clean =
        measured_width(phantom.volume, path[clean_idx], clean_tangent, {0, 1, 0}, threshold);
    CHECK(std::abs(clean - 4.0) < voxel_diagonal);
}

TEST_CASE("labeler recovers the constructed branches on clean geometry") {
    const std::vector<PhantomSpec> cohort = generate_cohort(6, 99, 0.0);
    for (const PhantomSpec& spec : cohort) {
        const PhantomCase phantom = generate(spec);
        const LabelingResult result = label_centerlines(phantom.centerlines);
        for (const auto& [name, truth] : phantom.per_branch_truth) {
            for (const SegmentLabel expected : truth.expected_labels) {
                INFO("case ", spec.case_id, " branch ", name, " label ", to_string(expected));
                const LabeledSegment* found = nullptr;
                for (const LabeledSegment& s : result.segments) {
                    if (s.label == expected) {
                        found = &s;
                    }
                }
                REQUIRE(found != nullptr);
                double worst = 0.0;
                for (const Point3& p : found->points) {
                    worst = std::max(worst, point_to_polyline_distance(p, truth.path));
                }
                CHECK(worst < 0.5);
            }
        }
    }
}

TEST_CASE("cohorts are stratified and deterministic") {
    CHECK_THROWS_AS(generate_cohort(5, 1, 0.0), ValidationError);

    const std::vector<PhantomSpec> cohort = generate_cohort(12, 7, 0.0);
    REQUIRE(cohort.size() == 12);
    std::map<int, int> histogram;
    for (std::size_t k = 0; k < cohort.size(); ++k) {
        const int g = phantom_grade(cohort[k]).value();
        CHECK(g == static_cast<int>(k) % 6);
        histogram[g] += 1;
    }
    for (int g = 0; g <= 5; ++g) {
        CHECK(histogram[g] == 2);
    }

    const std::vector<PhantomSpec> again = generate_cohort(12, 7, 0.0);
    const PhantomCase a = generate(cohort[3]);
    const PhantomCase b = generate(again[3]);
    CHECK(a.volume.voxels == b.volume.voxels);
    REQUIRE(a.centerlines.centerlines.size() == b.centerlines.centerlines.size());
    for (std::size_t i = 0; i < a.centerlines.centerlines.size(); ++i) {
        CHECK(a.centerlines.centerlines[i].points == b.centerlines.centerlines[i].points);
    }
}

TEST_CASE("volume io round-trips in both dtypes") {
    const PhantomCase phantom = generate(simple_spec());
    const auto dir = std::filesystem::temp_directory_path() / "corotree_test_phantom";
    std::filesystem::create_directories(dir);

    write_volume(phantom.volume, dir / "vol_f32.json", "f32");
    const Volume f32 = read_volume(dir / "vol_f32.json");
    CHECK(f32.dims == phantom.volume.dims);
    CHECK(f32.voxels == phantom.volume.voxels);  // lossless

    write_volume(phantom.volume, dir / "vol_i16.json", "i16");
    const Volume i16 = read_volume(dir / "vol_i16.json");
    double worst = 0.0;
    for (std::size_t i = 0; i < i16.voxels.size(); ++i) {
        worst = std::max(worst, std::abs(static_cast<double>(i16.voxels[i]) -
                                         phantom.volume.voxels[i]));
    }
    CHECK(worst <= 0.5);  // integer rounding only
}

TEST_CASE("jitter moves points by at most its amplitude") {
    std::vector<PhantomSpec> clean = generate_cohort(6, 42, 0.0);
    std::vector<PhantomSpec> jittered = generate_cohort(6, 42, 1.0);
    const PhantomCase a = generate(clean[2]);
    const PhantomCase b = generate(jittered[2]);
    REQUIRE(a.centerlines.centerlines.size() == b.centerlines.centerlines.size());
    double max_shift = 0.0;
    for (std::size_t i = 0; i < a.centerlines.centerlines.size(); ++i) {
        const auto& pa = a.centerlines.centerlines[i].points;
        const auto& pb = b.centerlines.centerlines[i].points;
        REQUIRE(pa.size() == pb.size());
        for (std::size_t k = 0; k < pa.size(); ++k) {
            max_shift = std::max(max_shift, distance(pa[k], pb[k]));
        }
    }
    CHECK(max_shift > 0.05);  // the warp actually does something
    CHECK(max_shift <= 1.0 + 1e-9);
}

}  // TEST_SUITE
