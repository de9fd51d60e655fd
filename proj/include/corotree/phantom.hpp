#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "corotree/centerline.hpp"
#include "corotree/ordinal.hpp"
#include "corotree/volume.hpp"

namespace corotree {

// One luminal narrowing. `position_mm` is measured from the branch's labeled
// start: the ostium for RCA and LM, the bifurcation for LAD/CX/RAMUS, the
// side-branch divergence for D1/OM1. Eccentric stenoses narrow an elliptical
// lumen mostly along one seeded direction, so the apparent severity depends on
// the longitudinal view angle.
struct StenosisSpec {
    std::string branch;
    double position_mm = 15.0;
    double length_mm = 7.0;
    double severity = 0.5;
    bool eccentric = false;
};

struct BranchSpec {
    std::string name;       // RCA, LAD, CX, RAMUS, D1, OM1
    double radius_mm = 2.0;
    double length_mm = 40.0;  // beyond the labeled start
};

struct PhantomSpec {
    std::string case_id = "phantom";
    std::vector<BranchSpec> branches;  // RCA, LAD, CX required; RAMUS/D1/OM1 optional
    double lm_length_mm = 12.0;        // left ostium to bifurcation
    double d1_offset_mm = 9.0;         // divergence arc past the bifurcation along the LAD
    double om1_offset_mm = 9.0;
    std::vector<StenosisSpec> stenoses;
    double lumen_hu = 800.0;
    double background_hu = -50.0;
    double voxel_spacing_mm = 0.4;
    double jitter_mm = 0.0;            // amplitude of a smooth random warp
    std::uint64_t seed = 0;
};

struct BranchTruth {
    std::string name;
    std::vector<Point3> path;  // full aorta-rooted polyline, jitter applied
    std::vector<SegmentLabel> expected_labels;
    double max_severity = 0.0;
};

struct PhantomCase {
    PhantomSpec spec;
    Volume volume;
    CenterlineSet centerlines;
    CadRadsGrade ground_truth;
    std::map<std::string, BranchTruth> per_branch_truth;
};

// Ground-truth grade implied by a spec: the stenosis band of the maximum
// severity across branches (0 when there is no stenosis).
CadRadsGrade phantom_grade(const PhantomSpec& spec);

// Rasterize the tree into a volume sized to fit it and emit aorta-rooted
// centerlines plus per-branch ground truth. Deterministic for a fixed spec.
// Throws SpecError when the spec is inconsistent or the tree does not fit.
PhantomCase generate(const PhantomSpec& spec);

// Deterministic stratified cohort: case k carries grade k % 6, geometry and
// stenosis placement vary with the per-case seed. Cases are materialized one
// at a time via generate(). Requires n >= 6.
std::vector<PhantomSpec> generate_cohort(int n, std::uint64_t seed, double jitter_mm = 0.0);

}  // namespace corotree
