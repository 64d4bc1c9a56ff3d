#pragma once

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "cnsaudit/core.hpp"

namespace cnsaudit {

/// Shortest round-trippable decimal form of a double.
inline std::string format_number(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[40];
  for (int prec = 6; prec <= 17; ++prec) {
    std::snprintf(buf, sizeof buf, "%.*g", prec, v);
    if (std::strtod(buf, nullptr) == v) break;
  }
  return buf;
}

/// CSV report: `# key=value` lines, one header row, then data rows.
class CsvTable {
 public:
  class RowBuilder {
   public:
    explicit RowBuilder(std::vector<std::string>& cells) : cells_(cells) {}
    RowBuilder& add(double v) {
      cells_.push_back(format_number(v));
      return *this;
    }
    RowBuilder& add(int v) {
      cells_.push_back(std::to_string(v));
      return *this;
    }
    RowBuilder& add(std::size_t v) {
      cells_.push_back(std::to_string(v));
      return *this;
    }
    RowBuilder& add(bool v) {
      cells_.push_back(v ? "1" : "0");
      return *this;
    }
    RowBuilder& add(const std::string& v) {
      cells_.push_back(v);
      return *this;
    }
    RowBuilder& add(const char* v) { return add(std::string(v)); }

   private:
    std::vector<std::string>& cells_;
  };

  explicit CsvTable(std::vector<std::string> columns) : columns_(std::move(columns)) {}

  void comment(const std::string& key, const std::string& value) { comments_.emplace_back(key, value); }
  void comment(const std::string& key, double value) { comment(key, format_number(value)); }

  RowBuilder row() {
    rows_.emplace_back();
    return RowBuilder(rows_.back());
  }

  std::size_t size() const { return rows_.size(); }
  const std::vector<std::string>& columns() const { return columns_; }
  const std::vector<std::vector<std::string>>& rows() const { return rows_; }

  std::string str() const {
    std::ostringstream os;
    for (const auto& [k, v] : comments_) os << "# " << k << '=' << v << '\n';
    write_line(os, columns_);
    for (const auto& r : rows_) {
      if (r.size() != columns_.size()) throw Error(ErrorCode::InvalidArgument, "csv row width differs from header");
      write_line(os, r);
    }
    return os.str();
  }

  void write(const std::string& path) const {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorCode::IoError, "cannot write " + path);
    out << str();
    if (!out) throw Error(ErrorCode::IoError, "short write to " + path);
  }

 private:
  static void write_line(std::ostream& os, const std::vector<std::string>& cells) {
    for (std::size_t i = 0; i < cells.size(); ++i) os << (i ? "," : "") << cells[i];
    os << '\n';
  }

  std::vector<std::string> columns_;
  std::vector<std::pair<std::string, std::string>> comments_;
  std::vector<std::vector<std::string>> rows_;
};

}  // namespace cnsaudit
