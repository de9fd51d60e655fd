#pragma once

#include <span>
#include <vector>

#include "corotree/ordinal.hpp"

namespace corotree {

struct BinaryOutcome {
    double score = 0.0;
    bool positive = false;
};

struct ConfusionCounts {
    long tp = 0;
    long fp = 0;
    long tn = 0;
    long fn = 0;

    long total() const { return tp + fp + tn + fn; }
};

// Mann-Whitney AUC: probability that a random positive outranks a random
// negative, ties counted 1/2. Throws UndefinedMetricError when only one class
// is present.
double auc(std::span<const BinaryOutcome> outcomes);

// score > threshold predicts positive.
ConfusionCounts confusion(std::span<const BinaryOutcome> outcomes, double threshold);

struct ClassifierMetrics {
    double acc = 0.0;
    double sens = 0.0;
    double spec = 0.0;
    double mcc = 0.0;
};

// Standard formulas; any zero factor in the MCC denominator (and empty
// sensitivity/specificity denominators) yield 0 by convention.
ClassifierMetrics acc_sens_spec_mcc(const ConfusionCounts& counts);

struct RocPoint {
    double fpr = 0.0;
    double tpr = 0.0;
    double threshold = 0.0;  // score strictly above this predicts positive
};

// Empirical ROC curve from (0,0) to (1,1), one step per distinct score.
// Trapezoidal integration of these points equals the Mann-Whitney AUC.
std::vector<RocPoint> roc_curve(std::span<const BinaryOutcome> outcomes);

struct SixClassMetrics {
    ClassifierMetrics macro;                // unweighted mean over evaluated classes
    std::vector<int> evaluated_classes;
    std::vector<int> skipped_classes;       // absent from the ground truth
};

// Per-class one-vs-rest metrics, macro-averaged. Classes absent from `truth`
// are skipped and reported. Throws ValidationError on length mismatch.
SixClassMetrics six_class_metrics(std::span<const CadRadsGrade> truth,
                                  std::span<const CadRadsGrade> predicted);

}  // namespace corotree
