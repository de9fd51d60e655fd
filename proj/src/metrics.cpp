#include "corotree/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace corotree {

double auc(std::span<const BinaryOutcome> outcomes) {
    long n_pos = 0;
    long n_neg = 0;
    for (const BinaryOutcome& o : outcomes) {
        (o.positive ? n_pos : n_neg) += 1;
    }
    if (n_pos == 0 || n_neg == 0) {
        throw UndefinedMetricError("AUC requires at least one positive and one negative");
    }

    std::vector<std::size_t> order(outcomes.size());
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        return outcomes[a].score < outcomes[b].score;
    });

    // Midranks over tie groups; rank sum of positives gives the U statistic.
    double rank_sum_pos = 0.0;
    std::size_t i = 0;
    while (i < order.size()) {
        std::size_t j = i;
        while (j + 1 < order.size() &&
               outcomes[order[j + 1]].score == outcomes[order[i]].score) {
            ++j;
        }
        const double midrank = 0.5 * static_cast<double>(i + 1 + j + 1);
        for (std::size_t k = i; k <= j; ++k) {
            if (outcomes[order[k]].positive) {
                rank_sum_pos += midrank;
            }
        }
        i = j + 1;
    }

    const double u = rank_sum_pos - 0.5 * static_cast<double>(n_pos) * (n_pos + 1);
    return u / (static_cast<double>(n_pos) * static_cast<double>(n_neg));
}

ConfusionCounts confusion(std::span<const BinaryOutcome> outcomes, double threshold) {
    if (outcomes.empty()) {
        throw ValidationError("confusion counts require at least one outcome");
    }
    ConfusionCounts c;
    for (const BinaryOutcome& o : outcomes) {
        const bool predicted = o.score > threshold;
        if (o.positive) {
            (predicted ? c.tp : c.fn) += 1;
        } else {
            (predicted ? c.fp : c.tn) += 1;
        }
    }
    return c;
}

ClassifierMetrics acc_sens_spec_mcc(const ConfusionCounts& c) {
    if (c.total() <= 0) {
        throw ValidationError("metrics require a non-empty confusion matrix");
    }
    ClassifierMetrics m;
    m.acc = static_cast<double>(c.tp + c.tn) / static_cast<double>(c.total());
    m.sens = (c.tp + c.fn) > 0 ? static_cast<double>(c.tp) / static_cast<double>(c.tp + c.fn) : 0.0;
    m.spec = (c.tn + c.fp) > 0 ? static_cast<double>(c.tn) / static_cast<double>(c.tn + c.fp) : 0.0;

    const double f1 = static_cast<double>(c.tp + c.fp);
    const double f2 = static_cast<double>(c.tp + c.fn);
    const double f3 = static_cast<double>(c.tn + c.fp);
    const double f4 = static_cast<double>(c.tn + c.fn);
    if (f1 == 0.0 || f2 == 0.0 || f3 == 0.0 || f4 == 0.0) {
        m.mcc = 0.0;
    } else {
        const double num = static_cast<double>(c.tp) * c.tn - static_cast<double>(c.fp) * c.fn;
        m.mcc = num / std::sqrt(f1 * f2 * f3 * f4);
    }
    return m;
}

std::vector<RocPoint> roc_curve(std::span<const BinaryOutcome> outcomes) {
    long n_pos = 0;
    long n_neg = 0;
    for (const BinaryOutcome& o : outcomes) {
        (o.positive ? n_pos : n_neg) += 1;
    }
    if (n_pos == 0 || n_neg == 0) {
        throw UndefinedMetricError("ROC requires at least one positive and one negative");
    }

    std::vector<std::size_t> order(outcomes.size());
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        return outcomes[a].score > outcomes[b].score;
    });

    std::vector<RocPoint> curve;
    curve.push_back({0.0, 0.0, outcomes[order.front()].score});

    long tp = 0;
    long fp = 0;
    std::size_t i = 0;
    while (i < order.size()) {
        const double s = outcomes[order[i]].score;
        while (i < order.size() && outcomes[order[i]].score == s) {
            (outcomes[order[i]].positive ? tp : fp) += 1;
            ++i;
        }
        curve.push_back({static_cast<double>(fp) / n_neg, static_cast<double>(tp) / n_pos, s});
    }
    return curve;
}

SixClassMetrics six_class_metrics(std::span<const CadRadsGrade> truth,
                                  std::span<const CadRadsGrade> predicted) {
    if (truth.size() != predicted.size()) {
        throw ValidationError("truth and prediction lists differ in length");
    }
    if (truth.empty()) {
        throw ValidationError("six-class metrics require at least one case");
    }

    SixClassMetrics result;
    ClassifierMetrics sum;
    for (int cls = 0; cls <= 5; ++cls) {
        ConfusionCounts c;
        bool class_present = false;
        for (std::size_t i = 0; i < truth.size(); ++i) {
            const bool is_true = truth[i].value() == cls;
            const bool is_pred = predicted[i].value() == cls;
            class_present = class_present || is_true;
            if (is_true) {
                (is_pred ? c.tp : c.fn) += 1;
            } else {
                (is_pred ? c.fp : c.tn) += 1;
            }
        }
        if (!class_present) {
            result.skipped_classes.push_back(cls);
            continue;
        }
        const ClassifierMetrics m = acc_sens_spec_mcc(c);
        sum.acc += m.acc;
        sum.sens += m.sens;
        sum.spec += m.spec;
        sum.mcc += m.mcc;
        result.evaluated_classes.push_back(cls);
    }

    const auto n = static_cast<double>(result.evaluated_classes.size());
    result.macro = {sum.acc / n, sum.sens / n, sum.spec / n, sum.mcc / n};
    return result;
}

}  // namespace corotree
