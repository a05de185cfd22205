#include "csv.hpp"

#include <fmt/format.h>

#include <sstream>
#include <stdexcept>

namespace mlnv::cli {

std::string csv_escape(std::string_view field) {
  if (field.find_first_of(",\"\r\n") == std::string_view::npos) return std::string(field);
  std::string out = "\"";
  for (char ch : field) {
    if (ch == '"') out += '"';
    out += ch;
  }
  out += '"';
  return out;
}

std::string money(double x) {
  std::string s = fmt::format("{:.2f}", x);
  if (s == "-0.00") s = "0.00";
  return s;
}

std::string ratio(double x) { return fmt::format("{:.6f}", x); }

std::string number(double x) { return fmt::format("{}", x); }

std::string optional_number(const std::optional<double>& x) { return x ? number(*x) : std::string(); }

CsvTable::CsvTable(std::vector<std::string> header) : header_(std::move(header)) {}

void CsvTable::add_row(std::vector<std::string> cells) {
  if (cells.size() != header_.size()) {
    throw std::invalid_argument(fmt::format("csv row has {} cells, header has {}", cells.size(), header_.size()));
  }
  rows_.push_back(std::move(cells));
}

void CsvTable::write(std::ostream& out) const {
  auto line = [&out](const std::vector<std::string>& cells) {
    for (std::size_t k = 0; k < cells.size(); ++k) {
      if (k > 0) out << ',';
      out << csv_escape(cells[k]);
    }
    out << '\n';
  };
  line(header_);
  for (const auto& r : rows_) line(r);
}

std::string CsvTable::str() const {
  std::ostringstream os;
  write(os);
  return os.str();
}

}  // namespace mlnv::cli
