#pragma once

#include <filesystem>
#include <istream>
#include <string>
#include <vector>

#include "detgeom/metrics.hpp"

namespace detgeom {

// One object per non-empty line: "class_id cx cy w h", box fields normalized
// to [0, 1]. Errors are ParseError with file:line.
std::vector<GroundTruth> parse_labels(std::istream& is, const std::string& image_id, const std::string& source);
std::vector<GroundTruth> load_label_file(const std::filesystem::path& path);

// Every *.txt in dir, image id = file stem, files visited in sorted order.
GroundTruthSet load_ground_truth_dir(const std::filesystem::path& dir);

// One record per non-empty line: "image_id class_id cx cy w h confidence".
DetectionSet parse_predictions(std::istream& is, const std::string& source);
DetectionSet load_prediction_file(const std::filesystem::path& path);

// One class name per line.
std::vector<std::string> load_class_names(const std::filesystem::path& path);

std::string format_label_line(const GroundTruth& g);
std::string format_prediction_line(const Detection& d);

}  // namespace detgeom
