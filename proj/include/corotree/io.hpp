#pragma once

#include <filesystem>
#include <string>
#include <utility>
#include <vector>

#include "corotree/centerline.hpp"
#include "corotree/combine.hpp"
#include "corotree/labeler.hpp"
#include "corotree/mpr.hpp"
#include "corotree/volume.hpp"

namespace corotree {

// Centerline JSON: {"case_id": "<str>", "centerlines": [[[x,y,z], ...], ...]},
// coordinates 64-bit floats in mm (LPS). Serialization is lossless.
CenterlineSet read_centerline_set(const std::filesystem::path& path);
void write_centerline_set(const CenterlineSet& set, const std::filesystem::path& path);

// Volume storage: sidecar header JSON {"dims", "spacing", "origin", "dtype"}
// plus a raw little-endian voxel file (x-fastest) next to it with extension
// `.raw`. dtype is "i16" or "f32".
Volume read_volume(const std::filesystem::path& header_path);
void write_volume(const Volume& volume, const std::filesystem::path& header_path,
                  const std::string& dtype = "i16");

// MPR stack storage: header JSON {"label", "L", "W", "truncated", "dtype":"f32"}
// plus sibling `.raw` data. Frames and points are derived artifacts and are not
// persisted.
MprStack read_stack(const std::filesystem::path& header_path);
void write_stack(const MprStack& stack, const std::filesystem::path& header_path);

// Labeling output JSON: {"case_id", "bifurcation": [x,y,z] | null,
// "segments": [{"label", "truncated", "points": [[x,y,z], ...]}], "diagnostics"}.
void write_labeling(const LabelingResult& result, const std::string& case_id,
                    const std::filesystem::path& path);
std::pair<std::string, LabelingResult> read_labeling(const std::filesystem::path& path);

// Case prediction JSON mirroring CasePrediction.
void write_prediction(const CasePrediction& prediction, const std::string& case_id,
                      const std::filesystem::path& path);
std::pair<std::string, CasePrediction> read_prediction(const std::filesystem::path& path);

// Evaluation CSV files: predictions as `case_id,cumulative`, ground truth as
// `case_id,grade`, both with a header row.
std::vector<std::pair<std::string, double>> read_cumulative_csv(const std::filesystem::path& path);
std::vector<std::pair<std::string, int>> read_grade_csv(const std::filesystem::path& path);
void write_cumulative_csv(const std::vector<std::pair<std::string, double>>& rows,
                          const std::filesystem::path& path);
void write_grade_csv(const std::vector<std::pair<std::string, int>>& rows,
                     const std::filesystem::path& path);

std::string read_text_file(const std::filesystem::path& path);
void write_text_file(const std::string& content, const std::filesystem::path& path);

}  // namespace corotree
