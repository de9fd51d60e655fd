#pragma once

#include <optional>
#include <string>
#include <vector>

#include "corotree/centerline.hpp"

namespace corotree {

struct LabelerConfig {
    double segment_length_mm = kSegmentLengthMm;
    int direction_lookahead = 10;          // points past a reference index
    double split_tolerance_mm = 0.5;       // polyline coincidence tolerance
    double direction_cluster_angle_deg = 20.0;
    Vec3 right_axis{-1.0, 0.0, 0.0};       // patient-right in LPS
    double resample_step_mm = kResampleStepMm;
    // The ostium is the first point where a centerline exits this radius around
    // the aorta center; RCA/LM arc lengths are measured from there.
    double aorta_radius_mm = 15.0;

    void validate() const;  // throws ValidationError
};

struct LabelingResult {
    std::vector<LabeledSegment> segments;
    std::optional<Point3> bifurcation_point;
    std::vector<std::string> diagnostics;
};

struct SplitResult {
    std::vector<Centerline> left;
    std::vector<Centerline> right;
    std::vector<int> skipped_ids;  // shorter than the lookahead
};

// Assign each centerline to patient-left or patient-right by the sign of
// dot(c_lookahead - c_0, right_axis): positive -> right, else left. Too-short
// centerlines are excluded and recorded.
SplitResult split_left_right(const CenterlineSet& set, const LabelerConfig& config,
                             std::vector<std::string>* diagnostics = nullptr);

// Longest right centerline, resampled at 0.25 mm; three subsequent 32 mm
// segments from the ostium labeled RCA_prox/mid/dist, remaining vessel
// excluded. Empty input yields an empty list (single-vessel patients).
std::vector<LabeledSegment> label_right_tree(const std::vector<Centerline>& right,
                                             const LabelerConfig& config,
                                             std::vector<std::string>* diagnostics = nullptr);

// Index of the last point at which two polylines coincide within `tolerance`
// when walking from the start, provided they separate afterwards within the
// common index range. No value when they never coincide or never separate.
std::optional<int> pair_divergence_index(std::span<const Point3> a, std::span<const Point3> b,
                                         double tolerance);

struct BifurcationHit {
    Point3 point;
    int point_index = 0;     // index along the participating centerlines
    int pair_count = 0;      // pairs diverging at this index
    int centerline_pos = 0;  // canonical position of the representative centerline
};

// The point where the left-tree centerlines split most frequently: the
// divergence index shared by the greatest number of unordered pairs, ties
// broken most-proximal. Throws NoBifurcationError when fewer than two
// centerlines are given or no pair ever diverges.
BifurcationHit find_bifurcation_detail(const std::vector<Centerline>& left,
                                       const LabelerConfig& config);
Point3 find_bifurcation(const std::vector<Centerline>& left, const LabelerConfig& config);

struct DirectionCluster {
    Vec3 direction;            // normalized mean of member directions
    std::vector<int> members;  // positions into the input list
};

// Directions c_{b+lookahead} - c_b of all centerlines passing within the split
// tolerance of c_b, greedily agglomerated while the closest pair of cluster
// means is separated by less than the cluster angle.
std::vector<DirectionCluster> cluster_branch_directions(const std::vector<Centerline>& left,
                                                        const Point3& c_b,
                                                        const LabelerConfig& config,
                                                        std::vector<std::string>* diagnostics = nullptr);

// LM from the left ostium to the bifurcation, LAD/CX (and RAMUS when a third
// direction exists) ranked by dot(direction, right_axis), three 32 mm segments
// along the longest member of each, plus LAD_D1 / CX_OM1 along the side branch
// with the longest non-overlapping part.
std::vector<LabeledSegment> label_left_tree(const std::vector<Centerline>& left,
                                            const LabelerConfig& config,
                                            std::optional<Point3>* bifurcation = nullptr,
                                            std::vector<std::string>* diagnostics = nullptr);

// Full heuristic pipeline. Deterministic and independent of the input
// centerline ordering; sub-errors are aggregated into diagnostics and only a
// tree with no labelable centerline at all fails hard.
LabelingResult label_centerlines(const CenterlineSet& set, const LabelerConfig& config = {});

}  // namespace corotree
