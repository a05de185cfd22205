#pragma once

#include <cstdint>
#include <optional>
#include <ostream>
#include <string>
#include <string_view>
#include <vector>

namespace mlnv::cli {

/// RFC-4180 field quoting: fields containing a comma, quote, CR or LF are
/// wrapped in double quotes with inner quotes doubled.
std::string csv_escape(std::string_view field);

// Locale-independent cell formatting.
std::string money(double x);                 // 2 decimals
std::string ratio(double x);                 // 6 decimals
std::string number(double x);                // shortest round-trip form
std::string optional_number(const std::optional<double>& x);  // empty when absent

class CsvTable {
 public:
  explicit CsvTable(std::vector<std::string> header);

  /// Throws std::invalid_argument when the width differs from the header.
  void add_row(std::vector<std::string> cells);

  const std::vector<std::string>& header() const { return header_; }
  std::size_t rows() const { return rows_.size(); }

  void write(std::ostream& out) const;
  std::string str() const;

 private:
  std::vector<std::string> header_;
  std::vector<std::vector<std::string>> rows_;
};

}  // namespace mlnv::cli
