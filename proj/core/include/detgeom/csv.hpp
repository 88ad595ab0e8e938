#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace detgeom {

// Shortest of fixed/scientific with 9 significant digits, '.' decimal
// separator regardless of locale.
std::string format_double(double v);

class CsvWriter {
 public:
  explicit CsvWriter(std::vector<std::string> header);

  CsvWriter& row(const std::vector<std::string>& cells);
  const std::string& str() const { return text_; }

  static std::string cell(double v) { return format_double(v); }
  static std::string cell(std::size_t v) { return std::to_string(v); }
  static std::string cell(int v) { return std::to_string(v); }
  static std::string cell(std::string_view v);

 private:
  std::size_t columns_;
  std::string text_;
};

// Writes to "<path>.tmp" and renames over path. Throws IoError naming the path.
void write_file_atomic(const std::filesystem::path& path, std::string_view content);

// Creates dir (and parents) if missing; throws IoError if it cannot be created
// or is not writable.
void ensure_output_dir(const std::filesystem::path& dir);

std::string read_file(const std::filesystem::path& path);

}  // namespace detgeom
