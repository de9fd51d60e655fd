#include "corotree/io.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <sstream>

#include <json.hpp>

namespace corotree {

namespace {

using nlohmann::json;

json parse_json_file(const std::filesystem::path& path) {
    const std::string text = read_text_file(path);
    try {
        return json::parse(text);
    } catch (const json::parse_error& e) {
        throw ParseError("invalid JSON in " + path.string() + ": " + e.what());
    }
}

json point_to_json(const Point3& p) { return json::array({p.x, p.y, p.z}); }

Point3 point_from_json(const json& j) {
    if (!j.is_array() || j.size() != 3) {
        throw ParseError("point must be a [x,y,z] array");
    }
    return {j[0].get<double>(), j[1].get<double>(), j[2].get<double>()};
}

std::filesystem::path raw_path_for(const std::filesystem::path& header_path) {
    std::filesystem::path p = header_path;
    p.replace_extension(".raw");
    return p;
}

void write_raw(const std::filesystem::path& path, const void* data, std::size_t bytes) {
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw IoError("cannot open for writing: " + path.string());
    }
    out.write(static_cast<const char*>(data), static_cast<std::streamsize>(bytes));
    if (!out) {
        throw IoError("short write: " + path.string());
    }
}

std::vector<char> read_raw(const std::filesystem::path& path, std::size_t expected_bytes) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw IoError("cannot open: " + path.string());
    }
    std::vector<char> buffer(expected_bytes);
    in.read(buffer.data(), static_cast<std::streamsize>(expected_bytes));
    if (in.gcount() != static_cast<std::streamsize>(expected_bytes)) {
        throw IoError("raw file shorter than the header promises: " + path.string());
    }
    return buffer;
}

}  // namespace

std::string read_text_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw IoError("cannot open: " + path.string());
    }
    std::ostringstream buffer;
    buffer << in.rdbuf();
    return buffer.str();
}

void write_text_file(const std::string& content, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw IoError("cannot open for writing: " + path.string());
    }
    out << content;
    if (!out) {
        throw IoError("short write: " + path.string());
    }
}

CenterlineSet read_centerline_set(const std::filesystem::path& path) {
    const json j = parse_json_file(path);
    CenterlineSet set;
    try {
        set.case_id = j.at("case_id").get<std::string>();
        const json& lines = j.at("centerlines");
        if (!lines.is_array()) {
            throw ParseError("'centerlines' must be an array");
        }
        int id = 0;
        for (const json& line : lines) {
            Centerline centerline;
            centerline.id = id++;
            for (const json& point : line) {
                centerline.points.push_back(point_from_json(point));
            }
            set.centerlines.push_back(std::move(centerline));
        }
    } catch (const json::exception& e) {
        throw ParseError("malformed centerline file " + path.string() + ": " + e.what());
    }
    validate(set);
    return set;
}

void write_centerline_set(const CenterlineSet& set, const std::filesystem::path& path) {
    validate(set);
    json lines = json::array();
    for (const Centerline& centerline : set.centerlines) {
        json line = json::array();
        for (const Point3& p : centerline.points) {
            line.push_back(point_to_json(p));
        }
        lines.push_back(std::move(line));
    }
    const json j{{"case_id", set.case_id}, {"centerlines", std::move(lines)}};
    write_text_file(j.dump(), path);
}

Volume read_volume(const std::filesystem::path& header_path) {
    const json j = parse_json_file(header_path);
    Volume volume;
    std::string dtype;
    try {
        for (int d = 0; d < 3; ++d) {
            volume.dims[d] = j.at("dims").at(d).get<int>();
            volume.spacing[d] = j.at("spacing").at(d).get<double>();
        }
        volume.origin = point_from_json(j.at("origin"));
        dtype = j.at("dtype").get<std::string>();
    } catch (const json::exception& e) {
        throw ParseError("malformed volume header " + header_path.string() + ": " + e.what());
    }
    if (dtype != "i16" && dtype != "f32") {
        throw ParseError("unsupported volume dtype '" + dtype + "'");
    }

    const std::size_t count = static_cast<std::size_t>(volume.dims[0]) * volume.dims[1] *
                              static_cast<std::size_t>(volume.dims[2]);
    const std::size_t elem = dtype == "i16" ? 2 : 4;
    const std::vector<char> raw = read_raw(raw_path_for(header_path), count * elem);
    volume.voxels.resize(count);
    if (dtype == "i16") {
        const auto* src = reinterpret_cast<const std::int16_t*>(raw.data());
        for (std::size_t i = 0; i < count; ++i) {
            volume.voxels[i] = static_cast<float>(src[i]);
        }
    } else {
        const auto* src = reinterpret_cast<const float*>(raw.data());
        for (std::size_t i = 0; i < count; ++i) {
            volume.voxels[i] = src[i];
        }
    }
    validate(volume);
    return volume;
}

void write_volume(const Volume& volume, const std::filesystem::path& header_path,
                  const std::string& dtype) {
    validate(volume);
    if (dtype != "i16" && dtype != "f32") {
        throw ValidationError("unsupported volume dtype '" + dtype + "'");
    }
    const json j{{"dims", volume.dims},
                 {"spacing", volume.spacing},
                 {"origin", point_to_json(volume.origin)},
                 {"dtype", dtype}};
    write_text_file(j.dump(), header_path);

    if (dtype == "i16") {
        std::vector<std::int16_t> data(volume.voxels.size());
        for (std::size_t i = 0; i < data.size(); ++i) {
            data[i] = static_cast<std::int16_t>(std::lround(
                std::clamp(volume.voxels[i], -32768.0f, 32767.0f)));
        }
        write_raw(raw_path_for(header_path), data.data(), data.size() * sizeof(std::int16_t));
    } else {
        write_raw(raw_path_for(header_path), volume.voxels.data(),
                  volume.voxels.size() * sizeof(float));
    }
}

MprStack read_stack(const std::filesystem::path& header_path) {
    const json j = parse_json_file(header_path);
    MprStack stack;
    int width = 0;
    try {
        stack.label = segment_label_from_string(j.at("label").get<std::string>());
        stack.length = j.at("L").get<int>();
        width = j.at("W").get<int>();
        stack.truncated = j.at("truncated").get<bool>();
    } catch (const json::exception& e) {
        throw ParseError("malformed stack header " + header_path.string() + ": " + e.what());
    }
    if (width != kMprWidth) {
        throw ParseError("stack width mismatch in " + header_path.string());
    }
    if (stack.length < 1) {
        throw ParseError("stack length must be positive in " + header_path.string());
    }

    const std::size_t count =
        static_cast<std::size_t>(stack.length) * kMprWidth * kMprWidth;
    const std::vector<char> raw = read_raw(raw_path_for(header_path), count * sizeof(float));
    stack.data.resize(count);
    const auto* src = reinterpret_cast<const float*>(raw.data());
    std::copy(src, src + count, stack.data.begin());
    return stack;
}

void write_stack(const MprStack& stack, const std::filesystem::path& header_path) {
    const json j{{"label", std::string(to_string(stack.label))},
                 {"L", stack.length},
                 {"W", kMprWidth},
                 {"truncated", stack.truncated},
                 {"frame_spacing_mm", kMprFrameSpacing},
                 {"in_plane_spacing_mm", kMprInPlaneSpacing},
                 {"dtype", "f32"}};
    write_text_file(j.dump(), header_path);
    write_raw(raw_path_for(header_path), stack.data.data(), stack.data.size() * sizeof(float));
}

void write_labeling(const LabelingResult& result, const std::string& case_id,
                    const std::filesystem::path& path) {
    json segments = json::array();
    for (const LabeledSegment& segment : result.segments) {
        json points = json::array();
        for (const Point3& p : segment.points) {
            points.push_back(point_to_json(p));
        }
        segments.push_back(json{{"label", std::string(to_string(segment.label))},
                                {"truncated", segment.truncated},
                                {"points", std::move(points)}});
    }
    json j{{"case_id", case_id},
           {"segments", std::move(segments)},
           {"diagnostics", result.diagnostics}};
    j["bifurcation"] = result.bifurcation_point.has_value()
                           ? point_to_json(*result.bifurcation_point)
                           : json(nullptr);
    write_text_file(j.dump(), path);
}

std::pair<std::string, LabelingResult> read_labeling(const std::filesystem::path& path) {
    const json j = parse_json_file(path);
    LabelingResult result;
    std::string case_id;
    try {
        case_id = j.at("case_id").get<std::string>();
        if (!j.at("bifurcation").is_null()) {
            result.bifurcation_point = point_from_json(j.at("bifurcation"));
        }
        for (const json& s : j.at("segments")) {
            LabeledSegment segment;
            segment.label = segment_label_from_string(s.at("label").get<std::string>());
            segment.truncated = s.at("truncated").get<bool>();
            for (const json& p : s.at("points")) {
                segment.points.push_back(point_from_json(p));
            }
            result.segments.push_back(std::move(segment));
        }
        if (j.contains("diagnostics")) {
            result.diagnostics = j.at("diagnostics").get<std::vector<std::string>>();
        }
    } catch (const json::exception& e) {
        throw ParseError("malformed labeling file " + path.string() + ": " + e.what());
    }
    return {case_id, result};
}

void write_prediction(const CasePrediction& prediction, const std::string& case_id,
                      const std::filesystem::path& path) {
    const json j{{"case_id", case_id},
                 {"grade", prediction.grade.value()},
                 {"cumulative", prediction.cumulative},
                 {"rule_out_score", prediction.rule_out_score},
                 {"hold_out_score", prediction.hold_out_score},
                 {"per_angle_cumulatives", prediction.per_angle_cumulatives},
                 {"n_models", prediction.n_models}};
    write_text_file(j.dump(), path);
}

std::pair<std::string, CasePrediction> read_prediction(const std::filesystem::path& path) {
    const json j = parse_json_file(path);
    CasePrediction prediction;
    std::string case_id;
    try {
        case_id = j.at("case_id").get<std::string>();
        prediction.grade = CadRadsGrade(j.at("grade").get<int>());
        prediction.cumulative = j.at("cumulative").get<double>();
        prediction.rule_out_score = j.at("rule_out_score").get<double>();
        prediction.hold_out_score = j.at("hold_out_score").get<double>();
        prediction.per_angle_cumulatives = j.at("per_angle_cumulatives").get<std::vector<double>>();
        prediction.n_models = j.at("n_models").get<int>();
    } catch (const json::exception& e) {
        throw ParseError("malformed prediction file " + path.string() + ": " + e.what());
    }
    return {case_id, prediction};
}

namespace {

std::vector<std::pair<std::string, std::string>> read_two_column_csv(
    const std::filesystem::path& path) {
    const std::string text = read_text_file(path);
    std::vector<std::pair<std::string, std::string>> rows;
    std::istringstream in(text);
    std::string line;
    bool first = true;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') {
            line.pop_back();
        }
        if (line.empty()) {
            continue;
        }
        if (first) {
            first = false;
            continue;  // header row
        }
        const std::size_t comma = line.find(',');
        if (comma == std::string::npos) {
            throw ParseError("expected two CSV columns in " + path.string());
        }
        rows.emplace_back(line.substr(0, comma), line.substr(comma + 1));
    }
    return rows;
}

}  // namespace

std::vector<std::pair<std::string, double>> read_cumulative_csv(
    const std::filesystem::path& path) {
    std::vector<std::pair<std::string, double>> rows;
    for (auto& [case_id, value] : read_two_column_csv(path)) {
        try {
            rows.emplace_back(case_id, std::stod(value));
        } catch (const std::exception&) {
            throw ParseError("invalid cumulative value '" + value + "' in " + path.string());
        }
    }
    return rows;
}

std::vector<std::pair<std::string, int>> read_grade_csv(const std::filesystem::path& path) {
    std::vector<std::pair<std::string, int>> rows;
    for (auto& [case_id, value] : read_two_column_csv(path)) {
        try {
            rows.emplace_back(case_id, std::stoi(value));
        } catch (const std::exception&) {
            throw ParseError("invalid grade value '" + value + "' in " + path.string());
        }
    }
    return rows;
}

void write_cumulative_csv(const std::vector<std::pair<std::string, double>>& rows,
                          const std::filesystem::path& path) {
    std::ostringstream out;
    out << "case_id,cumulative\n";
    for (const auto& [case_id, value] : rows) {
        out << case_id << ',' << json(value).dump() << '\n';
    }
    write_text_file(out.str(), path);
}

void write_grade_csv(const std::vector<std::pair<std::string, int>>& rows,
                     const std::filesystem::path& path) {
    std::ostringstream out;
    out << "case_id,grade\n";
    for (const auto& [case_id, value] : rows) {
        out << case_id << ',' << value << '\n';
    }
    write_text_file(out.str(), path);
}

}  // namespace corotree
