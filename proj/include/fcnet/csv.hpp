#pragma once

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "fcnet/errors.hpp"

namespace fcnet {

/// Formats a double with 12 significant digits, the stable wire format for
/// every emitted table.
inline std::string csv_number(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.12g", x);
  return buf;
}

/// Row-buffered CSV table with a schema tag. Written atomically: the file is
/// staged beside the target and renamed into place.
class CsvTable {
 public:
  CsvTable(std::string schema, std::vector<std::string> header)
      : schema_(std::move(schema)), header_(std::move(header)) {}

  class Row {
   public:
    explicit Row(CsvTable& t) : t_(t) {}
    Row& operator<<(double v) {
      cells_.push_back(csv_number(v));
      return *this;
    }
    Row& operator<<(std::size_t v) {
      cells_.push_back(std::to_string(v));
      return *this;
    }
    Row& operator<<(int v) {
      cells_.push_back(std::to_string(v));
      return *this;
    }
    Row& operator<<(const std::string& v) {
      cells_.push_back(v);
      return *this;
    }
    Row& operator<<(const char* v) {
      cells_.emplace_back(v);
      return *this;
    }
    ~Row() { t_.push(std::move(cells_)); }

   private:
    CsvTable& t_;
    std::vector<std::string> cells_;
  };

  Row row() { return Row(*this); }
  void push(std::vector<std::string> cells) {
    if (cells.size() != header_.size())
      throw validation_error("csv: row width does not match header");
    rows_.push_back(std::move(cells));
  }

  /// extra `# ...` line between the schema tag and the header
  void comment(std::string line) { comments_.push_back(std::move(line)); }

  std::string render() const {
    std::ostringstream os;
    os << "# schema: " << schema_ << " v1\n";
    for (const auto& c : comments_) os << "# " << c << '\n';
    join(os, header_);
    for (const auto& r : rows_) join(os, r);
    return os.str();
  }

  /// write-then-rename so a rerun never leaves a half-written table
  void write(const std::filesystem::path& target) const {
    const auto tmp = target.string() + ".tmp";
    {
      std::ofstream f(tmp, std::ios::binary | std::ios::trunc);
      if (!f) throw validation_error("csv: cannot open " + tmp);
      f << render();
    }
    std::filesystem::rename(tmp, target);
  }

  std::size_t size() const { return rows_.size(); }

 private:
  static void join(std::ostringstream& os, const std::vector<std::string>& cells) {
    for (std::size_t i = 0; i < cells.size(); ++i) {
      if (i) os << ',';
      os << cells[i];
    }
    os << '\n';
  }

  std::string schema_;
  std::vector<std::string> header_;
  std::vector<std::string> comments_;
  std::vector<std::vector<std::string>> rows_;
};

}  // namespace fcnet
