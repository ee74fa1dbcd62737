#pragma once

// Minimal CSV emission: one header row, constant field count, 17 significant digits.

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace preytaxis::cli {

/// %.17g, which round-trips every finite double. Non-finite values print as nan, inf, -inf.
std::string format_number(double x);
std::string format_number(const std::optional<double>& x);  // empty when absent

class CsvTable {
 public:
  explicit CsvTable(std::vector<std::string> header);

  /// Throws std::logic_error when the field count differs from the header.
  void add_row(std::vector<std::string> fields);

  std::size_t rows() const { return rows_.size(); }
  const std::vector<std::string>& header() const { return header_; }
  std::string str() const;
  void write(const std::filesystem::path& path) const;

 private:
  std::vector<std::string> header_;
  std::vector<std::vector<std::string>> rows_;
};

}  // namespace preytaxis::cli
