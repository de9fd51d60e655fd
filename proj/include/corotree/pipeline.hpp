#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "corotree/labeler.hpp"
#include "corotree/metrics.hpp"
#include "corotree/ordinal.hpp"

namespace corotree {

struct PipelineConfig {
    std::filesystem::path cases_dir;  // per-case subdirectories with centerlines/volume/truth
    std::filesystem::path out_dir;
    LabelerConfig labeler;
    int n_angles = 16;
    bool dual_view = false;
    std::string scorer = "phantom";
    int n_models = 1;
    std::string task = "all";  // all | rule-out | hold-out | six-class
};

// Label -> MPR -> predict every case under cases_dir, persist all intermediate
// artifacts under out_dir and write cohort-level CSVs and metrics. Cases are
// processed in case_id order so reruns are byte-identical.
void run_pipeline(const PipelineConfig& config);

struct BinaryTaskReport {
    long n_pos = 0;
    long n_neg = 0;
    double auc = 0.0;
    double default_threshold = 0.0;
    ClassifierMetrics at_default;
    double best_threshold = 0.0;  // Youden-optimal over the score sweep
    ClassifierMetrics at_best;
};

// Join predictions and ground truth by case id and evaluate one binary task.
// The continuous score is (cumulative - 1); the default threshold comes from
// the ordinal codec, the alternative from maximizing Youden's J.
BinaryTaskReport evaluate_binary(const std::vector<std::pair<std::string, double>>& cumulative,
                                 const std::vector<std::pair<std::string, int>>& truth,
                                 BinaryTask task);

struct SixClassReport {
    long n_cases = 0;
    long n_correct = 0;
    SixClassMetrics metrics;
};

SixClassReport evaluate_six_class(const std::vector<std::pair<std::string, double>>& cumulative,
                                  const std::vector<std::pair<std::string, int>>& truth);

}  // namespace corotree
