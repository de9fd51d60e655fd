#include "corotree/ordinal.hpp"

#include <algorithm>
#include <cmath>

namespace corotree {

void GradeVector::validate() const {
    for (double e : entries) {
        if (!(e >= 0.0 && e <= 1.0)) {
            throw ValidationError("grade vector entries must lie in [0,1]");
        }
    }
}

bool GradeVector::is_hard_label() const {
    if (entries[0] != 1.0) {
        return false;
    }
    for (std::size_t i = 0; i < entries.size(); ++i) {
        if (entries[i] != 0.0 && entries[i] != 1.0) {
            return false;
        }
        if (i > 0 && entries[i] > entries[i - 1]) {
            return false;
        }
    }
    return true;
}

GradeVector encode(CadRadsGrade grade) {
    GradeVector v;
    for (int i = 0; i < 6; ++i) {
        v.entries[i] = i <= grade.value() ? 1.0 : 0.0;
    }
    return v;
}

CadRadsGrade grade_from_cumulative(double cumulative) {
    const double raw = std::round(cumulative - 1.0);
    const int clamped = static_cast<int>(std::clamp(raw, 0.0, 5.0));
    return CadRadsGrade(clamped);
}

Decoded decode(const GradeVector& prediction) {
    prediction.validate();
    double cumulative = 0.0;
    for (double e : prediction.entries) {
        cumulative += e;
    }
    return {grade_from_cumulative(cumulative), cumulative};
}

double binarize(double cumulative, BinaryTask /*task*/) {
    // Both tasks rank cases by the same continuous score; they differ only in
    // the positive-class definition and decision threshold.
    return cumulative - 1.0;
}

double decision_threshold(BinaryTask task) {
    return task == BinaryTask::rule_out ? 0.5 : 2.5;
}

bool truth_positive(CadRadsGrade grade, BinaryTask task) {
    return task == BinaryTask::rule_out ? grade.value() >= 1 : grade.value() >= 3;
}

}  // namespace corotree
