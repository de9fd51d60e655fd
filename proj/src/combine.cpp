#include "corotree/combine.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

namespace corotree {

std::vector<double> pool_segments(const std::vector<std::vector<double>>& features) {
    if (features.empty()) {
        throw NoSegmentsError("pooling requires at least one segment feature");
    }
    const std::size_t dim = features.front().size();
    for (const auto& f : features) {
        if (f.size() != dim) {
            throw ValidationError("segment feature dimensions differ");
        }
    }
    std::vector<double> pooled = features.front();
    for (std::size_t s = 1; s < features.size(); ++s) {
        for (std::size_t d = 0; d < dim; ++d) {
            pooled[d] = std::max(pooled[d], features[s][d]);
        }
    }
    return pooled;
}

namespace {

LongitudinalSlice padded_to_segment_rows(LongitudinalSlice slice) {
    if (slice.length < kSegmentPointCount) {
        slice.data.resize(static_cast<std::size_t>(kSegmentPointCount) * kMprWidth, 0.0f);
        slice.length = kSegmentPointCount;
    }
    return slice;
}

}  // namespace

CaseAngles predict_case(const std::vector<MprStack>& stacks, const SegmentScorer& scorer,
                        int n_angles, bool dual_view) {
    if (stacks.empty()) {
        throw NoSegmentsError("case prediction requires at least one MPR stack");
    }
    if (n_angles < 1) {
        throw ValidationError("need at least one view angle");
    }

    CaseAngles result;
    result.per_angle.reserve(n_angles);
    for (int j = 0; j < n_angles; ++j) {
        const double angle = static_cast<double>(j) * std::numbers::pi / n_angles;
        std::vector<std::vector<double>> features;
        features.reserve(stacks.size());
        for (const MprStack& stack : stacks) {
            if (dual_view) {
                auto [first, second] = extract_orthogonal_pair(stack, angle);
                features.push_back(scorer.features(padded_to_segment_rows(std::move(first)),
                                                   padded_to_segment_rows(std::move(second))));
            } else {
                features.push_back(scorer.features(
                    padded_to_segment_rows(extract_longitudinal_slice(stack, angle))));
            }
        }
        const GradeVector prediction = scorer.head(pool_segments(features));
        result.per_angle.push_back(decode(prediction).cumulative);
    }

    double sum = 0.0;
    for (double c : result.per_angle) {
        sum += c;
    }
    result.cumulative = sum / static_cast<double>(n_angles);
    return result;
}

CasePrediction ensemble(const std::vector<CaseAngles>& per_model) {
    if (per_model.empty()) {
        throw NoModelsError("ensembling requires at least one model output");
    }
    const std::size_t n_angles = per_model.front().per_angle.size();
    for (const CaseAngles& m : per_model) {
        if (m.per_angle.size() != n_angles) {
            throw ValidationError("ensemble members disagree on the number of angles");
        }
    }

    CasePrediction prediction;
    prediction.n_models = static_cast<int>(per_model.size());
    prediction.per_angle_cumulatives.assign(n_angles, 0.0);
    double sum = 0.0;
    for (const CaseAngles& m : per_model) {
        sum += m.cumulative;
        for (std::size_t j = 0; j < n_angles; ++j) {
            prediction.per_angle_cumulatives[j] += m.per_angle[j];
        }
    }
    prediction.cumulative = sum / static_cast<double>(per_model.size());
    for (double& c : prediction.per_angle_cumulatives) {
        c /= static_cast<double>(per_model.size());
    }
    prediction.grade = grade_from_cumulative(prediction.cumulative);
    prediction.rule_out_score = binarize(prediction.cumulative, BinaryTask::rule_out);
    prediction.hold_out_score = binarize(prediction.cumulative, BinaryTask::hold_out);
    return prediction;
}

CadRadsGrade stenosis_band(double severity) {
    if (!(severity >= 0.0 && severity <= 1.0)) {
        throw ValidationError("stenosis severity must lie in [0,1]");
    }
    if (severity == 0.0) return CadRadsGrade(0);
    if (severity < 0.25) return CadRadsGrade(1);
    if (severity < 0.5) return CadRadsGrade(2);
    if (severity < 0.7) return CadRadsGrade(3);
    if (severity < 1.0) return CadRadsGrade(4);
    return CadRadsGrade(5);
}

double PhantomScorer::row_lumen_width_mm(const LongitudinalSlice& slice, int row) const {
    const double threshold = config_.lumen_threshold;
    const int center = kMprCenterIndex;
    if (slice.at(row, center) <= threshold) {
        return 0.0;
    }
    int left = center;
    while (left > 0 && slice.at(row, left - 1) > threshold) {
        --left;
    }
    int right = center;
    while (right < kMprWidth - 1 && slice.at(row, right + 1) > threshold) {
        ++right;
    }

    // Subpixel edges by linear interpolation of the threshold crossing; the run
    // boundary guarantees a sign change unless the lumen touches the grid edge.
    double x_left = left - 0.5;
    if (left > 0) {
        const double inside = slice.at(row, left);
        const double outside = slice.at(row, left - 1);
        x_left = left - (inside - threshold) / (inside - outside);
    }
    double x_right = right + 0.5;
    if (right < kMprWidth - 1) {
        const double inside = slice.at(row, right);
        const double outside = slice.at(row, right + 1);
        x_right = right + (inside - threshold) / (inside - outside);
    }
    return (x_right - x_left) * kMprInPlaneSpacing;
}

double PhantomScorer::slice_stenosis(const LongitudinalSlice& slice) const {
    std::vector<double> widths(slice.length, 0.0);
    for (int l = 0; l < slice.length; ++l) {
        widths[l] = row_lumen_width_mm(slice, l);
    }

    // Leading/trailing zero-width rows are out-of-anatomy padding; zero rows
    // strictly between lumen rows count as occlusion.
    int first = -1;
    int last = -1;
    for (int l = 0; l < slice.length; ++l) {
        if (widths[l] > 0.0) {
            if (first < 0) first = l;
            last = l;
        }
    }
    if (first < 0) {
        return 0.0;  // no lumen visible in this view
    }

    double min_width = widths[first];
    std::vector<double> positive;
    positive.reserve(last - first + 1);
    for (int l = first; l <= last; ++l) {
        min_width = std::min(min_width, widths[l]);
        if (widths[l] > 0.0) {
            positive.push_back(widths[l]);
        }
    }
    std::sort(positive.begin(), positive.end());
    const double reference = positive[positive.size() / 2];
    if (!(reference > 0.0)) {
        return 0.0;
    }
    const double severity = 1.0 - min_width / reference;
    return severity < config_.min_detectable_stenosis ? 0.0 : severity;
}

std::vector<double> PhantomScorer::features(const LongitudinalSlice& slice) const {
    return {slice_stenosis(slice)};
}

std::vector<double> PhantomScorer::features(const LongitudinalSlice& first,
                                            const LongitudinalSlice& second) const {
    return {std::max(slice_stenosis(first), slice_stenosis(second))};
}

GradeVector PhantomScorer::head(const std::vector<double>& pooled) const {
    if (pooled.size() != 1) {
        throw ValidationError("phantom scorer expects a single pooled feature");
    }
    return encode(stenosis_band(std::clamp(pooled[0], 0.0, 1.0)));
}

std::unique_ptr<SegmentScorer> phantom_scorer(PhantomScorerConfig config) {
    return std::make_unique<PhantomScorer>(config);
}

}  // namespace corotree
