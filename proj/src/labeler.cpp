#include "corotree/labeler.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

namespace corotree {

void LabelerConfig::validate() const {
    if (!(segment_length_mm > 0.0)) {
        throw ValidationError("segment length must be positive");
    }
    if (direction_lookahead < 1) {
        throw ValidationError("direction lookahead must be >= 1");
    }
    if (!(split_tolerance_mm > 0.0)) {
        throw ValidationError("split tolerance must be positive");
    }
    if (!(direction_cluster_angle_deg > 0.0 && direction_cluster_angle_deg < 90.0)) {
        throw ValidationError("direction cluster angle must lie in (0, 90) degrees");
    }
    if (norm(right_axis) <= 0.0) {
        throw ValidationError("right axis must be non-zero");
    }
    if (!(resample_step_mm > 0.0)) {
        throw ValidationError("resample step must be positive");
    }
    if (!(aorta_radius_mm >= 0.0)) {
        throw ValidationError("aorta radius must be non-negative");
    }
}

namespace {

void note(std::vector<std::string>* diagnostics, std::string message) {
    if (diagnostics != nullptr) {
        diagnostics->push_back(std::move(message));
    }
}

// Canonical ordering of resampled centerlines: longest first (uniform spacing
// makes point count a proxy for arc length), then lexicographically by
// coordinates, then by id. Geometry decides before ids so the labeling is
// independent of the input ordering even for equal-length centerlines.
bool canonical_less(const Centerline& a, const Centerline& b) {
    if (a.points.size() != b.points.size()) {
        return a.points.size() > b.points.size();
    }
    for (std::size_t i = 0; i < a.points.size(); ++i) {
        const Point3& p = a.points[i];
        const Point3& q = b.points[i];
        if (p.x != q.x) return p.x < q.x;
        if (p.y != q.y) return p.y < q.y;
        if (p.z != q.z) return p.z < q.z;
    }
    return a.id < b.id;
}

std::vector<Centerline> resample_lines(const std::vector<Centerline>& lines, double step,
                                       std::vector<std::string>* diagnostics) {
    std::vector<Centerline> out;
    out.reserve(lines.size());
    int dropped = 0;
    for (const Centerline& line : lines) {
        std::vector<Point3> pts = resample_polyline(line.points, step);
        if (pts.size() < 2) {
            ++dropped;
            continue;
        }
        out.push_back({line.id, std::move(pts)});
    }
    if (dropped > 0) {
        note(diagnostics, "dropped " + std::to_string(dropped) +
                              " centerline(s) shorter than one resample step");
    }
    std::sort(out.begin(), out.end(), canonical_less);
    return out;
}

// First index whose point lies outside the aorta radius around the root.
std::optional<int> ostium_index(std::span<const Point3> points, double aorta_radius) {
    for (std::size_t i = 0; i < points.size(); ++i) {
        if (distance(points[i], points.front()) > aorta_radius) {
            return static_cast<int>(i);
        }
    }
    return std::nullopt;
}

std::pair<int, double> nearest_index(std::span<const Point3> points, const Point3& target) {
    int best = 0;
    double best_dist = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < points.size(); ++i) {
        const double d = distance(points[i], target);
        if (d < best_dist) {
            best_dist = d;
            best = static_cast<int>(i);
        }
    }
    return {best, best_dist};
}

int segment_intervals(const LabelerConfig& config) {
    return static_cast<int>(std::lround(config.segment_length_mm / config.resample_step_mm));
}

// Consecutive fixed-length windows along a resampled polyline. Stops after the
// first truncated window; windows with fewer than 2 points are not emitted.
void emit_windows(std::span<const Point3> points, int start,
                  std::span<const SegmentLabel> labels, int intervals,
                  std::vector<LabeledSegment>& out) {
    const int last = static_cast<int>(points.size()) - 1;
    for (std::size_t k = 0; k < labels.size(); ++k) {
        const int a = start + intervals * static_cast<int>(k);
        if (a >= last) {
            break;
        }
        const int b = std::min(a + intervals, last);
        const bool truncated = (b - a) < intervals;
        LabeledSegment segment;
        segment.label = labels[k];
        segment.points.assign(points.begin() + a, points.begin() + b + 1);
        segment.truncated = truncated;
        out.push_back(std::move(segment));
        if (truncated) {
            break;
        }
    }
}

SplitResult split_impl(const std::vector<Centerline>& lines, const LabelerConfig& config,
                       std::vector<std::string>* diagnostics) {
    SplitResult result;
    const Vec3 right_axis = normalized(config.right_axis);
    int skipped = 0;
    for (const Centerline& line : lines) {
        try {
            if (static_cast<int>(line.points.size()) <= config.direction_lookahead) {
                throw TooShortError("centerline has " + std::to_string(line.points.size()) +
                                    " points, need more than " +
                                    std::to_string(config.direction_lookahead));
            }
            const Vec3 heading = line.points[config.direction_lookahead] - line.points.front();
            if (dot(heading, right_axis) > 0.0) {
                result.right.push_back(line);
            } else {
                result.left.push_back(line);
            }
        } catch (const TooShortError&) {
            result.skipped_ids.push_back(line.id);
            ++skipped;
        }
    }
    if (skipped > 0) {
        note(diagnostics, "excluded " + std::to_string(skipped) +
                              " centerline(s) shorter than the direction lookahead");
    }
    return result;
}

// Labels along the longest right centerline, assumed resampled and canonically
// sorted so the first entry is the longest.
std::vector<LabeledSegment> label_right_impl(const std::vector<Centerline>& right,
                                             const LabelerConfig& config,
                                             std::vector<std::string>* diagnostics) {
    std::vector<LabeledSegment> segments;
    if (right.empty()) {
        note(diagnostics, "right tree empty; no RCA segments");
        return segments;
    }
    const Centerline& star = right.front();
    const std::optional<int> ostium = ostium_index(star.points, config.aorta_radius_mm);
    if (!ostium.has_value()) {
        note(diagnostics, "right centerline never exits the aorta radius; no RCA segments");
        return segments;
    }
    static constexpr SegmentLabel kRcaLabels[] = {SegmentLabel::rca_prox, SegmentLabel::rca_mid,
                                                  SegmentLabel::rca_dist};
    emit_windows(star.points, *ostium, kRcaLabels, segment_intervals(config), segments);
    return segments;
}

struct ClusterAssignment {
    const DirectionCluster* lad = nullptr;
    const DirectionCluster* cx = nullptr;
    const DirectionCluster* ramus = nullptr;
};

ClusterAssignment rank_clusters(const std::vector<const DirectionCluster*>& ordered,
                                std::vector<std::string>* diagnostics) {
    ClusterAssignment assignment;
    switch (ordered.size()) {
        case 0:
            break;
        case 1:
            assignment.lad = ordered[0];
            note(diagnostics, "single direction cluster at the bifurcation; CX labels skipped");
            break;
        case 2:
            assignment.lad = ordered[0];
            assignment.cx = ordered[1];
            break;
        case 3:
            assignment.lad = ordered[0];
            assignment.ramus = ordered[1];
            assignment.cx = ordered[2];
            break;
        default:
            assignment.lad = ordered.front();
            assignment.cx = ordered.back();
            note(diagnostics, "more than three direction clusters; RAMUS skipped");
            break;
    }
    return assignment;
}

// Three 32 mm segments from the bifurcation along the longest cluster member,
// then the 32 mm side-branch segment along the member with the longest
// non-overlapping part relative to it.
void emit_cluster_branch(const std::vector<Centerline>& left, const DirectionCluster& cluster,
                         const Point3& c_b, std::span<const SegmentLabel> main_labels,
                         SegmentLabel side_label, const LabelerConfig& config,
                         std::vector<LabeledSegment>& out,
                         std::vector<std::string>* diagnostics) {
    const int star_pos = *std::min_element(cluster.members.begin(), cluster.members.end());
    const Centerline& star = left[star_pos];
    const int start = nearest_index(star.points, c_b).first;
    emit_windows(star.points, start, main_labels, segment_intervals(config), out);

    int best_pos = -1;
    int best_divergence = -1;
    double best_overhang = 0.0;
    for (int pos : cluster.members) {
        if (pos == star_pos) {
            continue;
        }
        const auto d = pair_divergence_index(star.points, left[pos].points,
                                             config.split_tolerance_mm);
        if (!d.has_value()) {
            continue;
        }
        const double overhang =
            (static_cast<double>(left[pos].points.size()) - 1.0 - *d) * config.resample_step_mm;
        if (overhang > best_overhang) {
            best_overhang = overhang;
            best_pos = pos;
            best_divergence = *d;
        }
    }
    if (best_pos < 0) {
        if (cluster.members.size() > 1) {
            note(diagnostics, std::string("no non-overlapping side branch for ") +
                                  std::string(to_string(side_label)));
        }
        return;
    }
    const SegmentLabel side_labels[] = {side_label};
    emit_windows(left[best_pos].points, best_divergence, side_labels, segment_intervals(config),
                 out);
}

// Degenerate left tree: LM along the given line from the ostium, capped at one
// segment length; nothing else can be labeled without a bifurcation.
void emit_lm_only(const Centerline& line, const LabelerConfig& config,
                  std::vector<LabeledSegment>& out, std::vector<std::string>* diagnostics) {
    const std::optional<int> ostium = ostium_index(line.points, config.aorta_radius_mm);
    if (!ostium.has_value()) {
        note(diagnostics, "left centerline never exits the aorta radius; LM skipped");
        return;
    }
    static constexpr SegmentLabel kLm[] = {SegmentLabel::lm};
    emit_windows(line.points, *ostium, kLm, segment_intervals(config), out);
}

std::vector<LabeledSegment> label_left_impl(const std::vector<Centerline>& left,
                                            const LabelerConfig& config,
                                            std::optional<Point3>* bifurcation,
                                            std::vector<std::string>* diagnostics) {
    std::vector<LabeledSegment> segments;
    if (bifurcation != nullptr) {
        *bifurcation = std::nullopt;
    }
    if (left.empty()) {
        note(diagnostics, "left tree empty; no left segments");
        return segments;
    }

    BifurcationHit hit;
    try {
        hit = find_bifurcation_detail(left, config);
    } catch (const NoBifurcationError& e) {
        note(diagnostics, std::string("no bifurcation: ") + e.what());
        emit_lm_only(left.front(), config, segments, diagnostics);
        return segments;
    }
    if (bifurcation != nullptr) {
        *bifurcation = hit.point;
    }
    const Point3 c_b = hit.point;

    // LM runs from the left ostium to c_b along the longest centerline passing
    // through the bifurcation; longer trunks keep the 32 mm closest to c_b.
    const Centerline* lm_line = nullptr;
    for (const Centerline& line : left) {
        if (nearest_index(line.points, c_b).second <= config.split_tolerance_mm) {
            lm_line = &line;
            break;  // canonical order: first hit is the longest
        }
    }
    if (lm_line == nullptr) {
        lm_line = &left.front();
    }
    const std::optional<int> ostium = ostium_index(lm_line->points, config.aorta_radius_mm);
    if (!ostium.has_value()) {
        note(diagnostics, "left trunk never exits the aorta radius; LM skipped");
    } else {
        const int near = nearest_index(lm_line->points, c_b).first;
        int lm_start = *ostium;
        const int intervals = segment_intervals(config);
        if (near - lm_start > intervals) {
            lm_start = near - intervals;
            note(diagnostics, "LM longer than the segment length; capped at the bifurcation side");
        }
        if (near > lm_start) {
            LabeledSegment lm;
            lm.label = SegmentLabel::lm;
            lm.points.assign(lm_line->points.begin() + lm_start, lm_line->points.begin() + near + 1);
            lm.truncated = (near - lm_start) < intervals;
            segments.push_back(std::move(lm));
        } else {
            note(diagnostics, "bifurcation not distal to the left ostium; LM skipped");
        }
    }

    const std::vector<DirectionCluster> clusters =
        cluster_branch_directions(left, c_b, config, diagnostics);
    if (clusters.empty()) {
        note(diagnostics, "no branch directions at the bifurcation; LAD/CX labels skipped");
        return segments;
    }

    // Rightmost cluster (largest projection onto the right axis) is the LAD,
    // leftmost the CX, the middle one of three the RAMUS.
    const Vec3 right_axis = normalized(config.right_axis);
    std::vector<const DirectionCluster*> ordered;
    ordered.reserve(clusters.size());
    for (const DirectionCluster& c : clusters) {
        ordered.push_back(&c);
    }
    std::sort(ordered.begin(), ordered.end(),
              [&](const DirectionCluster* a, const DirectionCluster* b) {
                  const double sa = dot(a->direction, right_axis);
                  const double sb = dot(b->direction, right_axis);
                  if (sa != sb) return sa > sb;
                  return a->members.front() < b->members.front();
              });
    const ClusterAssignment assignment = rank_clusters(ordered, diagnostics);

    if (assignment.lad != nullptr) {
        static constexpr SegmentLabel kLadLabels[] = {SegmentLabel::lad_prox, SegmentLabel::lad_mid,
                                                      SegmentLabel::lad_dist};
        emit_cluster_branch(left, *assignment.lad, c_b, kLadLabels, SegmentLabel::lad_d1, config,
                            segments, diagnostics);
    }
    if (assignment.cx != nullptr) {
        static constexpr SegmentLabel kCxLabels[] = {SegmentLabel::cx_prox, SegmentLabel::cx_dist,
                                                     SegmentLabel::cx_om2};
        emit_cluster_branch(left, *assignment.cx, c_b, kCxLabels, SegmentLabel::cx_om1, config,
                            segments, diagnostics);
    }
    if (assignment.ramus != nullptr) {
        const int star_pos =
            *std::min_element(assignment.ramus->members.begin(), assignment.ramus->members.end());
        const Centerline& star = left[star_pos];
        const int start = nearest_index(star.points, c_b).first;
        static constexpr SegmentLabel kRamus[] = {SegmentLabel::ramus};
        emit_windows(star.points, start, kRamus, segment_intervals(config), segments);
    }
    return segments;
}

}  // namespace

SplitResult split_left_right(const CenterlineSet& set, const LabelerConfig& config,
                             std::vector<std::string>* diagnostics) {
    config.validate();
    return split_impl(set.centerlines, config, diagnostics);
}

std::vector<LabeledSegment> label_right_tree(const std::vector<Centerline>& right,
                                             const LabelerConfig& config,
                                             std::vector<std::string>* diagnostics) {
    config.validate();
    const std::vector<Centerline> resampled =
        resample_lines(right, config.resample_step_mm, diagnostics);
    return label_right_impl(resampled, config, diagnostics);
}

std::optional<int> pair_divergence_index(std::span<const Point3> a, std::span<const Point3> b,
                                         double tolerance) {
    const std::size_t common = std::min(a.size(), b.size());
    for (std::size_t i = 0; i < common; ++i) {
        if (distance(a[i], b[i]) > tolerance) {
            if (i == 0) {
                return std::nullopt;  // never together
            }
            return static_cast<int>(i) - 1;
        }
    }
    return std::nullopt;  // never separate within the common range
}

BifurcationHit find_bifurcation_detail(const std::vector<Centerline>& left,
                                       const LabelerConfig& config) {
    config.validate();
    if (left.size() < 2) {
        throw NoBifurcationError("need at least two left centerlines");
    }

    struct Bucket {
        int count = 0;
        int min_pos = std::numeric_limits<int>::max();
    };
    std::vector<std::pair<int, Bucket>> buckets;  // divergence index -> stats
    const auto bucket_for = [&buckets](int index) -> Bucket& {
        for (auto& [idx, b] : buckets) {
            if (idx == index) {
                return b;
            }
        }
        buckets.emplace_back(index, Bucket{});
        return buckets.back().second;
    };

    for (std::size_t i = 0; i < left.size(); ++i) {
        for (std::size_t j = i + 1; j < left.size(); ++j) {
            const auto d = pair_divergence_index(left[i].points, left[j].points,
                                                 config.split_tolerance_mm);
            if (!d.has_value()) {
                continue;
            }
            Bucket& bucket = bucket_for(*d);
            bucket.count += 1;
            bucket.min_pos = std::min(bucket.min_pos, static_cast<int>(i));
        }
    }
    if (buckets.empty()) {
        throw NoBifurcationError("left centerlines never diverge");
    }

    const auto best = std::max_element(
        buckets.begin(), buckets.end(), [](const auto& a, const auto& b) {
            if (a.second.count != b.second.count) return a.second.count < b.second.count;
            return a.first > b.first;  // tie: most proximal (smallest index) wins
        });

    BifurcationHit hit;
    hit.point_index = best->first;
    hit.pair_count = best->second.count;
    hit.centerline_pos = best->second.min_pos;
    hit.point = left[hit.centerline_pos].points[hit.point_index];
    return hit;
}

Point3 find_bifurcation(const std::vector<Centerline>& left, const LabelerConfig& config) {
    return find_bifurcation_detail(left, config).point;
}

std::vector<DirectionCluster> cluster_branch_directions(const std::vector<Centerline>& left,
                                                        const Point3& c_b,
                                                        const LabelerConfig& config,
                                                        std::vector<std::string>* diagnostics) {
    config.validate();

    struct Item {
        Vec3 direction;
        int pos;
    };
    std::vector<Item> items;
    for (std::size_t pos = 0; pos < left.size(); ++pos) {
        const auto [near, dist] = nearest_index(left[pos].points, c_b);
        if (dist > config.split_tolerance_mm) {
            continue;
        }
        int ahead = near + config.direction_lookahead;
        const int last = static_cast<int>(left[pos].points.size()) - 1;
        if (ahead > last) {
            ahead = last;
            note(diagnostics,
                 "centerline ends within the lookahead of the bifurcation; using its last point");
        }
        if (ahead == near) {
            continue;  // bifurcation at the very tip, no direction available
        }
        items.push_back({normalized(left[pos].points[ahead] - left[pos].points[near]),
                         static_cast<int>(pos)});
    }

    std::vector<DirectionCluster> clusters;
    clusters.reserve(items.size());
    for (const Item& item : items) {
        clusters.push_back({item.direction, {item.pos}});
    }

    const double threshold = config.direction_cluster_angle_deg * std::numbers::pi / 180.0;
    const auto mean_direction = [&items](const std::vector<int>& members,
                                         const Vec3& fallback) -> Vec3 {
        Vec3 sum{};
        for (int m : members) {
            for (const Item& item : items) {
                if (item.pos == m) {
                    sum += item.direction;
                    break;
                }
            }
        }
        return norm(sum) > 1e-12 ? normalized(sum) : fallback;
    };

    // Agglomerate the closest pair of cluster means until no pair is within the
    // cluster angle.
    while (clusters.size() > 1) {
        std::size_t best_a = 0;
        std::size_t best_b = 1;
        double best_angle = std::numeric_limits<double>::infinity();
        for (std::size_t a = 0; a < clusters.size(); ++a) {
            for (std::size_t b = a + 1; b < clusters.size(); ++b) {
                const double angle = angle_between(clusters[a].direction, clusters[b].direction);
                if (angle < best_angle) {
                    best_angle = angle;
                    best_a = a;
                    best_b = b;
                }
            }
        }
        if (!(best_angle < threshold)) {
            break;
        }
        DirectionCluster& target = clusters[best_a];
        target.members.insert(target.members.end(), clusters[best_b].members.begin(),
                              clusters[best_b].members.end());
        std::sort(target.members.begin(), target.members.end());
        target.direction = mean_direction(target.members, target.direction);
        clusters.erase(clusters.begin() + static_cast<std::ptrdiff_t>(best_b));
    }
    return clusters;
}

std::vector<LabeledSegment> label_left_tree(const std::vector<Centerline>& left,
                                            const LabelerConfig& config,
                                            std::optional<Point3>* bifurcation,
                                            std::vector<std::string>* diagnostics) {
    config.validate();
    const std::vector<Centerline> resampled =
        resample_lines(left, config.resample_step_mm, diagnostics);
    return label_left_impl(resampled, config, bifurcation, diagnostics);
}

LabelingResult label_centerlines(const CenterlineSet& set, const LabelerConfig& config) {
    config.validate();
    validate(set);

    LabelingResult result;
    const std::vector<Centerline> resampled =
        resample_lines(set.centerlines, config.resample_step_mm, &result.diagnostics);

    const SplitResult split = split_impl(resampled, config, &result.diagnostics);

    std::vector<LabeledSegment> segments =
        label_right_impl(split.right, config, &result.diagnostics);
    std::vector<LabeledSegment> left_segments =
        label_left_impl(split.left, config, &result.bifurcation_point, &result.diagnostics);
    segments.insert(segments.end(), std::make_move_iterator(left_segments.begin()),
                    std::make_move_iterator(left_segments.end()));

    if (segments.empty()) {
        throw ValidationError("no centerline could be labeled");
    }
    std::sort(segments.begin(), segments.end(),
              [](const LabeledSegment& a, const LabeledSegment& b) { return a.label < b.label; });
    result.segments = std::move(segments);
    return result;
}

}  // namespace corotree
