#include "detgeom/label_io.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include "detgeom/csv.hpp"
#include "detgeom/error.hpp"

namespace detgeom {

namespace {

std::vector<std::string_view> split_ws(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && std::isspace(static_cast<unsigned char>(line[i]))) ++i;
    const std::size_t start = i;
    while (i < line.size() && !std::isspace(static_cast<unsigned char>(line[i]))) ++i;
    if (i > start) out.push_back(line.substr(start, i - start));
  }
  return out;
}

double parse_number(std::string_view tok, const char* field, const std::string& src, std::size_t line) {
  double v = 0.0;
  const char* begin = tok.data();
  if (!tok.empty() && tok.front() == '+') ++begin;
  auto [ptr, ec] = std::from_chars(begin, tok.data() + tok.size(), v);
  if (ec != std::errc() || ptr != tok.data() + tok.size() || !std::isfinite(v)) {
    throw ParseError(src, line, std::string("field ") + field + ": '" + std::string(tok) + "' is not a finite number");
  }
  return v;
}

int parse_class(std::string_view tok, const std::string& src, std::size_t line) {
  int v = 0;
  auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
  if (ec != std::errc() || ptr != tok.data() + tok.size() || v < 0) {
    throw ParseError(src, line, "field class_id: '" + std::string(tok) + "' is not a non-negative integer");
  }
  return v;
}

BBox parse_box(const std::vector<std::string_view>& f, std::size_t at, const std::string& src, std::size_t line) {
  const double cx = parse_number(f[at], "cx", src, line);
  const double cy = parse_number(f[at + 1], "cy", src, line);
  const double w = parse_number(f[at + 2], "w", src, line);
  const double h = parse_number(f[at + 3], "h", src, line);
  if (cx < 0.0 || cx > 1.0) throw ParseError(src, line, "field cx: outside [0, 1]");
  if (cy < 0.0 || cy > 1.0) throw ParseError(src, line, "field cy: outside [0, 1]");
  if (!(w > 0.0) || w > 1.0) throw ParseError(src, line, "field w: must be in (0, 1]");
  if (!(h > 0.0) || h > 1.0) throw ParseError(src, line, "field h: must be in (0, 1]");
  return {cx, cy, w, h};
}

template <class F>
void for_each_line(std::istream& is, F&& fn) {
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    const auto fields = split_ws(line);
    if (fields.empty()) continue;
    fn(fields, lineno);
  }
}

}  // namespace

std::vector<GroundTruth> parse_labels(std::istream& is, const std::string& image_id, const std::string& source) {
  std::vector<GroundTruth> out;
  for_each_line(is, [&](const std::vector<std::string_view>& f, std::size_t lineno) {
    if (f.size() != 5) {
      throw ParseError(source, lineno, "expected 5 fields (class_id cx cy w h), got " + std::to_string(f.size()));
    }
    const int cls = parse_class(f[0], source, lineno);
    out.push_back({image_id, cls, parse_box(f, 1, source, lineno)});
  });
  return out;
}

std::vector<GroundTruth> load_label_file(const std::filesystem::path& path) {
  std::ifstream is(path);
  if (!is) throw ValidationError("cannot open " + path.string());
  return parse_labels(is, path.stem().string(), path.string());
}

GroundTruthSet load_ground_truth_dir(const std::filesystem::path& dir) {
  if (!std::filesystem::is_directory(dir)) throw ValidationError("ground-truth directory not found: " + dir.string());
  std::vector<std::filesystem::path> files;
  for (const auto& e : std::filesystem::directory_iterator(dir)) {
    if (e.is_regular_file() && e.path().extension() == ".txt") files.push_back(e.path());
  }
  std::sort(files.begin(), files.end());
  GroundTruthSet set;
  for (const auto& f : files) {
    auto entries = load_label_file(f);
    set.entries.insert(set.entries.end(), std::make_move_iterator(entries.begin()),
                       std::make_move_iterator(entries.end()));
  }
  return set;
}

DetectionSet parse_predictions(std::istream& is, const std::string& source) {
  DetectionSet set;
  for_each_line(is, [&](const std::vector<std::string_view>& f, std::size_t lineno) {
    if (f.size() != 7) {
      throw ParseError(source, lineno,
                       "expected 7 fields (image_id class_id cx cy w h confidence), got " + std::to_string(f.size()));
    }
    const int cls = parse_class(f[1], source, lineno);
    const BBox box = parse_box(f, 2, source, lineno);
    const double conf = parse_number(f[6], "confidence", source, lineno);
    if (conf < 0.0 || conf > 1.0) throw ParseError(source, lineno, "field confidence: outside [0, 1]");
    set.entries.push_back({std::string(f[0]), cls, box, conf});
  });
  return set;
}

DetectionSet load_prediction_file(const std::filesystem::path& path) {
  std::ifstream is(path);
  if (!is) throw ValidationError("cannot open " + path.string());
  return parse_predictions(is, path.string());
}

std::vector<std::string> load_class_names(const std::filesystem::path& path) {
  std::ifstream is(path);
  if (!is) throw ValidationError("cannot open " + path.string());
  std::vector<std::string> names;
  std::string line;
  while (std::getline(is, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (!line.empty()) names.push_back(line);
  }
  return names;
}

std::string format_label_line(const GroundTruth& g) {
  return std::to_string(g.class_id) + " " + format_double(g.box.cx()) + " " + format_double(g.box.cy()) + " " +
         format_double(g.box.w()) + " " + format_double(g.box.h());
}

std::string format_prediction_line(const Detection& d) {
  return d.image_id + " " + std::to_string(d.class_id) + " " + format_double(d.box.cx()) + " " +
         format_double(d.box.cy()) + " " + format_double(d.box.w()) + " " + format_double(d.box.h()) + " " +
         format_double(d.confidence);
}

}  // namespace detgeom
