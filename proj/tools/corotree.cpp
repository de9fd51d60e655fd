#include <filesystem>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "corotree/combine.hpp"
#include "corotree/io.hpp"
#include "corotree/labeler.hpp"
#include "corotree/metrics.hpp"
#include "corotree/mpr.hpp"
#include "corotree/ordinal.hpp"
#include "corotree/phantom.hpp"
#include "corotree/pipeline.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace corotree;

namespace {

LabelerConfig load_labeler_config(const std::string& path) {
    LabelerConfig config;
    if (path.empty()) {
        return config;
    }
    const json j = json::parse(read_text_file(path));
    if (j.contains("segment_length_mm")) config.segment_length_mm = j["segment_length_mm"];
    if (j.contains("direction_lookahead")) config.direction_lookahead = j["direction_lookahead"];
    if (j.contains("split_tolerance_mm")) config.split_tolerance_mm = j["split_tolerance_mm"];
    if (j.contains("direction_cluster_angle_deg")) {
        config.direction_cluster_angle_deg = j["direction_cluster_angle_deg"];
    }
    if (j.contains("aorta_radius_mm")) config.aorta_radius_mm = j["aorta_radius_mm"];
    if (j.contains("right_axis")) {
        config.right_axis = {j["right_axis"].at(0), j["right_axis"].at(1), j["right_axis"].at(2)};
    }
    config.validate();
    return config;
}

json slice_to_json(const LongitudinalSlice& slice) {
    return json{{"label", std::string(to_string(slice.label))},
                {"angle", slice.angle},
                {"L", slice.length},
                {"W", kMprWidth},
                {"data", slice.data}};
}

json metrics_to_json(const ClassifierMetrics& m) {
    return json{{"acc", m.acc}, {"sens", m.sens}, {"spec", m.spec}, {"mcc", m.mcc}};
}

json binary_report_to_json(const BinaryTaskReport& r) {
    return json{{"n_pos", r.n_pos},
                {"n_neg", r.n_neg},
                {"auc", r.auc},
                {"default_threshold", r.default_threshold},
                {"at_default", metrics_to_json(r.at_default)},
                {"best_threshold", r.best_threshold},
                {"at_best", metrics_to_json(r.at_best)}};
}

void write_phantom_case(const PhantomCase& phantom, const fs::path& dir) {
    fs::create_directories(dir);
    write_centerline_set(phantom.centerlines, dir / "centerlines.json");
    write_volume(phantom.volume, dir / "volume.json", "i16");

    json branches = json::object();
    for (const auto& [name, truth] : phantom.per_branch_truth) {
        json labels = json::array();
        for (const SegmentLabel label : truth.expected_labels) {
            labels.push_back(std::string(to_string(label)));
        }
        branches[name] = json{{"max_severity", truth.max_severity},
                              {"expected_labels", std::move(labels)}};
    }
    const json truth{{"case_id", phantom.spec.case_id},
                     {"grade", phantom.ground_truth.value()},
                     {"branches", std::move(branches)}};
    write_text_file(truth.dump(2) + "\n", dir / "truth.json");
}

int run_label(const std::string& in, const std::string& out, const std::string& config_path) {
    const CenterlineSet set = read_centerline_set(in);
    const LabelingResult result = label_centerlines(set, load_labeler_config(config_path));
    write_labeling(result, set.case_id, out);

    json labels = json::array();
    for (const LabeledSegment& s : result.segments) {
        labels.push_back(std::string(to_string(s.label)));
    }
    std::cout << json{{"case_id", set.case_id},
                      {"n_segments", result.segments.size()},
                      {"labels", std::move(labels)},
                      {"out", out}}
                     .dump()
              << "\n";
    return 0;
}

int run_mpr(const std::string& volume_path, const std::string& segments_path,
            const std::string& out_dir) {
    const Volume volume = read_volume(volume_path);
    const auto [case_id, labeling] = read_labeling(segments_path);
    fs::create_directories(out_dir);

    json names = json::array();
    for (const LabeledSegment& segment : labeling.segments) {
        const MprStack stack = extract_mpr(volume, segment);
        const std::string name = std::string(to_string(segment.label)) + ".json";
        write_stack(stack, fs::path(out_dir) / name);
        names.push_back(name);
    }
    std::cout << json{{"case_id", case_id}, {"stacks", std::move(names)}, {"out_dir", out_dir}}
                     .dump()
              << "\n";
    return 0;
}

int run_slice(const std::string& stack_path, double angle, bool pair) {
    const MprStack stack = read_stack(stack_path);
    if (pair) {
        const auto [first, second] = extract_orthogonal_pair(stack, angle);
        std::cout << json{{"first", slice_to_json(first)}, {"second", slice_to_json(second)}}.dump()
                  << "\n";
    } else {
        std::cout << slice_to_json(extract_longitudinal_slice(stack, angle)).dump() << "\n";
    }
    return 0;
}

int run_encode(int grade) {
    const GradeVector v = encode(CadRadsGrade(grade));
    std::cout << json{{"grade", grade}, {"vector", v.entries}}.dump() << "\n";
    return 0;
}

int run_decode(const std::string& csv) {
    GradeVector v;
    std::size_t start = 0;
    for (int i = 0; i < 6; ++i) {
        const std::size_t comma = csv.find(',', start);
        const std::string token = csv.substr(start, comma == std::string::npos
                                                        ? std::string::npos
                                                        : comma - start);
        try {
            v.entries[i] = std::stod(token);
        } catch (const std::exception&) {
            throw ParseError("expected six comma-separated numbers, got '" + csv + "'");
        }
        if (comma == std::string::npos && i < 5) {
            throw ParseError("expected six comma-separated numbers, got '" + csv + "'");
        }
        start = comma + 1;
    }
    const Decoded d = decode(v);
    std::cout << json{{"cumulative", d.cumulative},
                      {"grade", d.grade.value()},
                      {"rule_out_score", binarize(d.cumulative, BinaryTask::rule_out)},
                      {"hold_out_score", binarize(d.cumulative, BinaryTask::hold_out)}}
                     .dump()
              << "\n";
    return 0;
}

int run_predict(const std::string& stacks_dir, const std::string& scorer_name, int n_angles,
                bool dual_view, int n_models, const std::string& out) {
    if (scorer_name != "phantom") {
        throw ValidationError("unknown scorer '" + scorer_name + "'");
    }
    if (!fs::exists(stacks_dir)) {
        throw IoError("stacks directory does not exist: " + stacks_dir);
    }
    std::vector<fs::path> headers;
    for (const auto& entry : fs::directory_iterator(stacks_dir)) {
        if (entry.path().extension() == ".json") {
            headers.push_back(entry.path());
        }
    }
    std::sort(headers.begin(), headers.end());
    std::vector<MprStack> stacks;
    stacks.reserve(headers.size());
    for (const fs::path& header : headers) {
        stacks.push_back(read_stack(header));
    }

    const PhantomScorer scorer;
    const CaseAngles one_model = predict_case(stacks, scorer, n_angles, dual_view);
    const CasePrediction prediction =
        ensemble(std::vector<CaseAngles>(static_cast<std::size_t>(n_models), one_model));
    const std::string case_id = fs::path(stacks_dir).filename().string();
    if (!out.empty()) {
        write_prediction(prediction, case_id, out);
    }
    std::cout << json{{"case_id", case_id},
                      {"grade", prediction.grade.value()},
                      {"cumulative", prediction.cumulative},
                      {"rule_out_score", prediction.rule_out_score},
                      {"hold_out_score", prediction.hold_out_score},
                      {"per_angle_cumulatives", prediction.per_angle_cumulatives},
                      {"n_models", prediction.n_models}}
                     .dump()
              << "\n";
    return 0;
}

int run_eval(const std::string& pred_path, const std::string& truth_path,
             const std::string& task) {
    const auto cumulative = read_cumulative_csv(pred_path);
    const auto truth = read_grade_csv(truth_path);

    json out;
    if (task == "rule-out" || task == "hold-out") {
        const BinaryTask binary_task =
            task == "rule-out" ? BinaryTask::rule_out : BinaryTask::hold_out;
        out = binary_report_to_json(evaluate_binary(cumulative, truth, binary_task));
        out["task"] = task;
    } else if (task == "six-class") {
        const SixClassReport report = evaluate_six_class(cumulative, truth);
        out = json{{"task", task},
                   {"n_cases", report.n_cases},
                   {"n_correct", report.n_correct},
                   {"macro", metrics_to_json(report.metrics.macro)},
                   {"evaluated_classes", report.metrics.evaluated_classes},
                   {"skipped_classes", report.metrics.skipped_classes}};
    } else {
        throw ValidationError("unknown task '" + task + "'");
    }
    std::cout << out.dump() << "\n";
    return 0;
}

int run_phantom(int n, std::uint64_t seed, double jitter, const std::string& out_dir) {
    const std::vector<PhantomSpec> cohort = generate_cohort(n, seed, jitter);
    fs::create_directories(out_dir);

    json manifest = json::array();
    for (const PhantomSpec& spec : cohort) {
        const PhantomCase phantom = generate(spec);
        write_phantom_case(phantom, fs::path(out_dir) / spec.case_id);
        manifest.push_back(json{{"case_id", spec.case_id},
                                {"grade", phantom.ground_truth.value()}});
        std::cerr << "wrote " << spec.case_id << " (grade " << phantom.ground_truth.value()
                  << ")\n";
    }
    write_text_file(json{{"seed", seed}, {"jitter_mm", jitter}, {"cases", manifest}}.dump(2) + "\n",
                    fs::path(out_dir) / "cohort.json");
    std::cout << json{{"n_cases", n}, {"out_dir", out_dir}}.dump() << "\n";
    return 0;
}

int run_pipeline_command(const std::string& cases_dir, const std::string& out_dir,
                         int n_angles, bool dual_view, int n_models,
                         const std::string& config_path, const std::string& task) {
    PipelineConfig config;
    config.cases_dir = cases_dir;
    config.out_dir = out_dir;
    config.labeler = load_labeler_config(config_path);
    config.n_angles = n_angles;
    config.dual_view = dual_view;
    config.n_models = n_models;
    config.task = task;
    run_pipeline(config);
    std::cout << read_text_file(fs::path(out_dir) / "metrics.json");
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"corotree: coronary centerline labeling, MPR geometry and CAD-RADS scoring"};
    app.require_subcommand(1);

    std::string in_path;
    std::string out_path;
    std::string config_path;
    std::string volume_path;
    std::string segments_path;
    std::string out_dir;
    std::string stack_path;
    std::string stacks_dir;
    std::string scorer_name = "phantom";
    std::string pred_path;
    std::string truth_path;
    std::string task = "rule-out";
    std::string vector_csv;
    double angle = 0.0;
    bool pair = false;
    bool dual_view = false;
    int grade = 0;
    int n_angles = 16;
    int n_models = 1;
    int n_cases = 12;
    std::uint64_t seed = 0;
    double jitter = 0.0;

    auto* label_cmd = app.add_subcommand("label", "Label a centerline tree");
    label_cmd->add_option("--centerlines", in_path, "Input centerline JSON")->required();
    label_cmd->add_option("--out", out_path, "Output labeling JSON")->required();
    label_cmd->add_option("--config", config_path, "Labeler config JSON");

    auto* mpr_cmd = app.add_subcommand("mpr", "Extract MPR stacks for labeled segments");
    mpr_cmd->add_option("--volume", volume_path, "Volume header JSON")->required();
    mpr_cmd->add_option("--segments", segments_path, "Labeling JSON")->required();
    mpr_cmd->add_option("--out-dir", out_dir, "Output directory")->required();

    auto* slice_cmd = app.add_subcommand("slice", "Cut longitudinal slices from a stack");
    slice_cmd->add_option("--stack", stack_path, "Stack header JSON")->required();
    slice_cmd->add_option("--angle", angle, "Angle in radians, [0, pi)")->required();
    slice_cmd->add_flag("--pair", pair, "Also cut the orthogonal slice");

    auto* encode_cmd = app.add_subcommand("encode", "Encode a CAD-RADS grade");
    encode_cmd->add_option("--grade", grade, "Grade 0..5")->required();

    auto* decode_cmd = app.add_subcommand("decode", "Decode a six-entry prediction vector");
    decode_cmd->add_option("--vector", vector_csv, "Six comma-separated values")->required();

    auto* predict_cmd = app.add_subcommand("predict", "TTA + ensemble prediction from stacks");
    predict_cmd->add_option("--stacks", stacks_dir, "Directory of stack files")->required();
    predict_cmd->add_option("--scorer", scorer_name, "Segment scorer (phantom)");
    predict_cmd->add_option("--angles", n_angles, "Number of TTA angles");
    predict_cmd->add_flag("--dual-view", dual_view, "Use orthogonal view pairs");
    predict_cmd->add_option("--models", n_models, "Ensemble size");
    predict_cmd->add_option("--out", out_path, "Prediction JSON output");

    auto* eval_cmd = app.add_subcommand("eval", "Evaluate predictions against ground truth");
    eval_cmd->add_option("--pred", pred_path, "Predictions CSV (case_id,cumulative)")->required();
    eval_cmd->add_option("--truth", truth_path, "Ground-truth CSV (case_id,grade)")->required();
    eval_cmd->add_option("--task", task, "rule-out | hold-out | six-class")->required();

    auto* phantom_cmd = app.add_subcommand("phantom", "Generate a synthetic cohort");
    phantom_cmd->add_option("--n", n_cases, "Number of cases (>= 6)");
    phantom_cmd->add_option("--seed", seed, "Cohort seed");
    phantom_cmd->add_option("--jitter", jitter, "Geometric jitter amplitude in mm");
    phantom_cmd->add_option("--out-dir", out_dir, "Output directory")->required();

    auto* pipeline_cmd = app.add_subcommand("pipeline", "Label, MPR, predict and evaluate a cohort");
    pipeline_cmd->add_option("--cases", stacks_dir, "Cohort directory (from `phantom`)")->required();
    pipeline_cmd->add_option("--out-dir", out_dir, "Output directory")->required();
    pipeline_cmd->add_option("--angles", n_angles, "Number of TTA angles");
    pipeline_cmd->add_flag("--dual-view", dual_view, "Use orthogonal view pairs");
    pipeline_cmd->add_option("--models", n_models, "Ensemble size");
    pipeline_cmd->add_option("--config", config_path, "Labeler config JSON");
    std::string pipeline_task = "all";
    pipeline_cmd->add_option("--task", pipeline_task, "all | rule-out | hold-out | six-class");

    CLI11_PARSE(app, argc, argv);

    try {
        if (label_cmd->parsed()) return run_label(in_path, out_path, config_path);
        if (mpr_cmd->parsed()) return run_mpr(volume_path, segments_path, out_dir);
        if (slice_cmd->parsed()) return run_slice(stack_path, angle, pair);
        if (encode_cmd->parsed()) return run_encode(grade);
        if (decode_cmd->parsed()) return run_decode(vector_csv);
        if (predict_cmd->parsed()) {
            return run_predict(stacks_dir, scorer_name, n_angles, dual_view, n_models, out_path);
        }
        if (eval_cmd->parsed()) return run_eval(pred_path, truth_path, task);
        if (phantom_cmd->parsed()) return run_phantom(n_cases, seed, jitter, out_dir);
        if (pipeline_cmd->parsed()) {
            return run_pipeline_command(stacks_dir, out_dir, n_angles, dual_view, n_models,
                                        config_path, pipeline_task);
        }
    } catch (const Error& e) {
        std::cerr << json{{"error", e.what()}, {"exit_code", static_cast<int>(e.kind())}}.dump()
                  << "\n";
        return static_cast<int>(e.kind());
    } catch (const std::exception& e) {
        std::cerr << json{{"error", e.what()}, {"exit_code", 3}}.dump() << "\n";
        return 3;
    }
    return 0;
}
