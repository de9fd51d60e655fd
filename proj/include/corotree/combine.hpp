#pragma once

#include <memory>
#include <vector>

#include "corotree/mpr.hpp"
#include "corotree/ordinal.hpp"

namespace corotree {

// Seam for the per-segment feature extractor and case-level head. Implementations
// must be deterministic for fixed inputs and report a fixed feature dimension.
class SegmentScorer {
public:
    virtual ~SegmentScorer() = default;

    virtual int feature_dim() const = 0;
    virtual std::vector<double> features(const LongitudinalSlice& slice) const = 0;
    virtual std::vector<double> features(const LongitudinalSlice& first,
                                         const LongitudinalSlice& second) const = 0;
    virtual GradeVector head(const std::vector<double>& pooled) const = 0;
};

// Elementwise maximum across segment feature vectors.
std::vector<double> pool_segments(const std::vector<std::vector<double>>& features);

// One model's test-time-augmented output: cumulative per angle and their mean.
struct CaseAngles {
    double cumulative = 0.0;
    std::vector<double> per_angle;
};

// For each angle j*pi/n_angles (the same angle for every segment), slice each
// stack (single view or orthogonal pair), score, max-pool across segments and
// run the head; the per-angle cumulatives are averaged in index order.
// Truncated stacks are zero-padded to the full segment length before scoring.
CaseAngles predict_case(const std::vector<MprStack>& stacks, const SegmentScorer& scorer,
                        int n_angles = 16, bool dual_view = false);

struct CasePrediction {
    CadRadsGrade grade;
    double cumulative = 0.0;
    double rule_out_score = 0.0;
    double hold_out_score = 0.0;
    std::vector<double> per_angle_cumulatives;
    int n_models = 0;
};

// Arithmetic mean over model outputs; grade and task scores via the ordinal
// codec. Throws NoModelsError on empty input.
CasePrediction ensemble(const std::vector<CaseAngles>& per_model);

// Stenosis fraction to CAD-RADS band: 0 -> 0, (0,0.25) -> 1, [0.25,0.5) -> 2,
// [0.5,0.7) -> 3, [0.7,1) -> 4, 1 -> 5.
CadRadsGrade stenosis_band(double severity);

struct PhantomScorerConfig {
    double lumen_threshold = 0.5;
    // Width-estimation noise floor: smaller stenosis estimates clamp to exactly 0
    // so an unnarrowed tube maps to the zero band.
    double min_detectable_stenosis = 0.08;
};

// Deterministic stand-in for the CNN. The single feature is the per-segment
// maximum stenosis estimate from the slice intensity profile: per-row lumen
// width around the centerline by thresholding, stenosis = 1 - min interior
// width / reference width, with the reference taken as the median positive row
// width. The head maps the pooled maximum through the CAD-RADS stenosis bands.
class PhantomScorer final : public SegmentScorer {
public:
    explicit PhantomScorer(PhantomScorerConfig config = {}) : config_(config) {}

    int feature_dim() const override { return 1; }
    std::vector<double> features(const LongitudinalSlice& slice) const override;
    std::vector<double> features(const LongitudinalSlice& first,
                                 const LongitudinalSlice& second) const override;
    GradeVector head(const std::vector<double>& pooled) const override;

    // Exposed for tests and diagnostics.
    double slice_stenosis(const LongitudinalSlice& slice) const;
    double row_lumen_width_mm(const LongitudinalSlice& slice, int row) const;

private:
    PhantomScorerConfig config_;
};

std::unique_ptr<SegmentScorer> phantom_scorer(PhantomScorerConfig config = {});

}  // namespace corotree
