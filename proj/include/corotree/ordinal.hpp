#pragma once

#include <array>

#include "corotree/errors.hpp"

namespace corotree {

// Patient-level CAD-RADS grade, 0 (no disease) through 5.
class CadRadsGrade {
public:
    CadRadsGrade() = default;
    explicit CadRadsGrade(int value) : value_(value) {
        if (value < 0 || value > 5) {
            throw ValidationError("CAD-RADS grade must be in 0..5");
        }
    }

    int value() const { return value_; }

    friend bool operator==(const CadRadsGrade&, const CadRadsGrade&) = default;
    friend auto operator<=>(const CadRadsGrade&, const CadRadsGrade&) = default;

private:
    int value_ = 0;
};

// Cumulative ordinal encoding of a grade, or sigmoidal predictions for the six
// outputs. Hard labels are monotone non-increasing binary vectors.
struct GradeVector {
    std::array<double, 6> entries{};

    void validate() const;      // entries in [0,1]
    bool is_hard_label() const; // binary, monotone non-increasing, leading 1
};

// entry i = 1 if i <= grade else 0, e.g. grade 2 -> (1,1,1,0,0,0).
GradeVector encode(CadRadsGrade grade);

struct Decoded {
    CadRadsGrade grade;
    double cumulative = 0.0;
};

// Cumulative probability is the sum over all outputs; the grade is the nearest
// integer of (cumulative - 1), half-integers rounding away from zero, clamped
// to 0..5.
CadRadsGrade grade_from_cumulative(double cumulative);
Decoded decode(const GradeVector& prediction);

enum class BinaryTask { rule_out, hold_out };

// Continuous ROC score shared by both binary tasks.
double binarize(double cumulative, BinaryTask task);

// Hard-decision threshold on (cumulative - 1): 0.5 for rule-out (positive class
// grade >= 1), 2.5 for hold-out (positive class grade >= 3).
double decision_threshold(BinaryTask task);

// Ground-truth positivity of a grade under the task.
bool truth_positive(CadRadsGrade grade, BinaryTask task);

}  // namespace corotree
