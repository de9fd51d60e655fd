#include "corotree/pipeline.hpp"

#include <algorithm>
#include <map>

#include <json.hpp>

#include "corotree/combine.hpp"
#include "corotree/io.hpp"
#include "corotree/mpr.hpp"
#include "corotree/volume.hpp"

namespace corotree {

namespace {

using nlohmann::json;

std::vector<BinaryOutcome> join_outcomes(
    const std::vector<std::pair<std::string, double>>& cumulative,
    const std::vector<std::pair<std::string, int>>& truth, BinaryTask task) {
    std::map<std::string, int> truth_by_id;
    for (const auto& [case_id, grade] : truth) {
        truth_by_id[case_id] = grade;
    }
    std::vector<BinaryOutcome> outcomes;
    outcomes.reserve(cumulative.size());
    for (const auto& [case_id, cum] : cumulative) {
        const auto it = truth_by_id.find(case_id);
        if (it == truth_by_id.end()) {
            throw ValidationError("no ground truth for case '" + case_id + "'");
        }
        outcomes.push_back(
            {binarize(cum, task), truth_positive(CadRadsGrade(it->second), task)});
    }
    return outcomes;
}

}  // namespace

BinaryTaskReport evaluate_binary(const std::vector<std::pair<std::string, double>>& cumulative,
                                 const std::vector<std::pair<std::string, int>>& truth,
                                 BinaryTask task) {
    const std::vector<BinaryOutcome> outcomes = join_outcomes(cumulative, truth, task);

    BinaryTaskReport report;
    for (const BinaryOutcome& o : outcomes) {
        (o.positive ? report.n_pos : report.n_neg) += 1;
    }
    report.auc = auc(outcomes);
    report.default_threshold = decision_threshold(task);
    report.at_default = acc_sens_spec_mcc(confusion(outcomes, report.default_threshold));

    // Candidate thresholds halfway between adjacent distinct scores, plus one
    // below the minimum (predict everything positive) and the maximum itself
    // (predict everything negative).
    std::vector<double> scores;
    scores.reserve(outcomes.size());
    for (const BinaryOutcome& o : outcomes) {
        scores.push_back(o.score);
    }
    std::sort(scores.begin(), scores.end());
    scores.erase(std::unique(scores.begin(), scores.end()), scores.end());
    std::vector<double> candidates;
    candidates.push_back(scores.front() - 1.0);
    for (std::size_t i = 1; i < scores.size(); ++i) {
        candidates.push_back(0.5 * (scores[i - 1] + scores[i]));
    }
    candidates.push_back(scores.back());

    double best_j = -2.0;
    for (const double threshold : candidates) {
        const ClassifierMetrics m = acc_sens_spec_mcc(confusion(outcomes, threshold));
        const double j = m.sens + m.spec - 1.0;
        if (j > best_j) {
            best_j = j;
            report.best_threshold = threshold;
            report.at_best = m;
        }
    }
    return report;
}

SixClassReport evaluate_six_class(const std::vector<std::pair<std::string, double>>& cumulative,
                                  const std::vector<std::pair<std::string, int>>& truth) {
    std::map<std::string, int> truth_by_id;
    for (const auto& [case_id, grade] : truth) {
        truth_by_id[case_id] = grade;
    }
    std::vector<CadRadsGrade> t;
    std::vector<CadRadsGrade> p;
    SixClassReport report;
    for (const auto& [case_id, cum] : cumulative) {
        const auto it = truth_by_id.find(case_id);
        if (it == truth_by_id.end()) {
            throw ValidationError("no ground truth for case '" + case_id + "'");
        }
        t.push_back(CadRadsGrade(it->second));
        p.push_back(grade_from_cumulative(cum));
        if (t.back() == p.back()) {
            report.n_correct += 1;
        }
    }
    report.n_cases = static_cast<long>(t.size());
    report.metrics = six_class_metrics(t, p);
    return report;
}

namespace {

json metrics_json(const ClassifierMetrics& m) {
    return json{{"acc", m.acc}, {"sens", m.sens}, {"spec", m.spec}, {"mcc", m.mcc}};
}

}  // namespace

void run_pipeline(const PipelineConfig& config) {
    namespace fs = std::filesystem;
    if (!fs::exists(config.cases_dir)) {
        throw IoError("cases directory does not exist: " + config.cases_dir.string());
    }
    if (config.scorer != "phantom") {
        throw ValidationError("unknown scorer '" + config.scorer + "'");
    }
    if (config.n_models < 1) {
        throw ValidationError("need at least one model");
    }
    if (config.task != "all" && config.task != "rule-out" && config.task != "hold-out" &&
        config.task != "six-class") {
        throw ValidationError("unknown task '" + config.task + "'");
    }

    std::vector<fs::path> case_dirs;
    for (const auto& entry : fs::directory_iterator(config.cases_dir)) {
        if (entry.is_directory()) {
            case_dirs.push_back(entry.path());
        }
    }
    std::sort(case_dirs.begin(), case_dirs.end());
    if (case_dirs.empty()) {
        throw ValidationError("no case directories under " + config.cases_dir.string());
    }

    fs::create_directories(config.out_dir);
    const PhantomScorer scorer;

    std::vector<std::pair<std::string, double>> cumulative_rows;
    std::vector<std::pair<std::string, int>> truth_rows;

    for (const fs::path& case_dir : case_dirs) {
        const fs::path centerline_path = case_dir / "centerlines.json";
        const fs::path volume_path = case_dir / "volume.json";
        const fs::path truth_path = case_dir / "truth.json";
        for (const fs::path& required : {centerline_path, volume_path, truth_path}) {
            if (!fs::exists(required)) {
                throw IoError("missing input file: " + required.string());
            }
        }

        const CenterlineSet set = read_centerline_set(centerline_path);
        const Volume volume = read_volume(volume_path);
        int truth_grade = 0;
        try {
            truth_grade = json::parse(read_text_file(truth_path)).at("grade").get<int>();
        } catch (const json::exception& e) {
            throw ParseError("malformed truth file " + truth_path.string() + ": " + e.what());
        }

        const fs::path case_out = config.out_dir / case_dir.filename();
        fs::create_directories(case_out / "stacks");

        const LabelingResult labeling = label_centerlines(set, config.labeler);
        write_labeling(labeling, set.case_id, case_out / "labels.json");

        std::vector<MprStack> stacks;
        stacks.reserve(labeling.segments.size());
        for (const LabeledSegment& segment : labeling.segments) {
            stacks.push_back(extract_mpr(volume, segment));
            const std::string name = std::string(to_string(segment.label)) + ".json";
            write_stack(stacks.back(), case_out / "stacks" / name);
        }

        const CaseAngles one_model =
            predict_case(stacks, scorer, config.n_angles, config.dual_view);
        const std::vector<CaseAngles> models(static_cast<std::size_t>(config.n_models),
                                             one_model);
        const CasePrediction prediction = ensemble(models);
        write_prediction(prediction, set.case_id, case_out / "prediction.json");

        cumulative_rows.emplace_back(set.case_id, prediction.cumulative);
        truth_rows.emplace_back(set.case_id, truth_grade);
    }

    write_cumulative_csv(cumulative_rows, config.out_dir / "predictions.csv");
    write_grade_csv(truth_rows, config.out_dir / "truth.csv");

    const auto binary_json = [](const BinaryTaskReport& r) {
        return json{{"n_pos", r.n_pos},
                    {"n_neg", r.n_neg},
                    {"auc", r.auc},
                    {"default_threshold", r.default_threshold},
                    {"at_default", metrics_json(r.at_default)},
                    {"best_threshold", r.best_threshold},
                    {"at_best", metrics_json(r.at_best)}};
    };
    const bool all = config.task == "all";
    json metrics = json::object();
    if (all || config.task == "rule-out") {
        metrics["rule_out"] =
            binary_json(evaluate_binary(cumulative_rows, truth_rows, BinaryTask::rule_out));
    }
    if (all || config.task == "hold-out") {
        metrics["hold_out"] =
            binary_json(evaluate_binary(cumulative_rows, truth_rows, BinaryTask::hold_out));
    }
    if (all || config.task == "six-class") {
        const SixClassReport six = evaluate_six_class(cumulative_rows, truth_rows);
        metrics["six_class"] = json{{"n_cases", six.n_cases},
                                    {"n_correct", six.n_correct},
                                    {"macro", metrics_json(six.metrics.macro)},
                                    {"evaluated_classes", six.metrics.evaluated_classes},
                                    {"skipped_classes", six.metrics.skipped_classes}};
    }
    write_text_file(metrics.dump(2) + "\n", config.out_dir / "metrics.json");
}

}  // namespace corotree
