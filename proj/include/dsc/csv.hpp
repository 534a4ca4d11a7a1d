#pragma once

#include <cstdio>
#include <fstream>
#include <string>
#include <unordered_map>
#include <vector>

#include "dsc/error.hpp"

namespace dsc::csv {

// Parsed delimited file: one header row, comma-separated, '#' comments
// skipped. Cells are kept as strings; typed getters convert on demand.
struct Table {
  std::string path;
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
  std::unordered_map<std::string, int> columns;

  bool has(const std::string& col) const { return columns.count(col) > 0; }

  int col(const std::string& name) const {
    auto it = columns.find(name);
    if (it == columns.end())
      throw InputError(path + ": missing required column '" + name + "'");
    return it->second;
  }

  const std::string& cell(std::size_t row, int c) const { return rows[row][static_cast<std::size_t>(c)]; }

  double num(std::size_t row, int c) const {
    const std::string& s = rows[row][static_cast<std::size_t>(c)];
    try {
      std::size_t pos = 0;
      const double v = std::stod(s, &pos);
      if (pos != s.size()) throw std::invalid_argument(s);
      return v;
    } catch (const std::exception&) {
      throw InputError(path + ": row " + std::to_string(row + 2) + ": '" + s + "' is not a number");
    }
  }

  long long integer(std::size_t row, int c) const {
    const double v = num(row, c);
    const long long i = static_cast<long long>(v);
    if (static_cast<double>(i) != v)
      throw InputError(path + ": row " + std::to_string(row + 2) + ": expected an integer, got '" +
                       rows[row][static_cast<std::size_t>(c)] + "'");
    return i;
  }
};

Table read(const std::string& path);

// Formats a double with 9 significant digits (the file-format contract).
std::string fmt(double v);

class Writer {
 public:
  explicit Writer(const std::string& path) : path_(path), out_(path) {
    if (!out_) throw InputError("cannot open '" + path + "' for writing");
  }

  void header(const std::string& line) { out_ << line << '\n'; }

  Writer& field(const std::string& s) {
    if (!first_) out_ << ',';
    out_ << s;
    first_ = false;
    return *this;
  }
  Writer& field(double v) { return field(fmt(v)); }
  Writer& field(long long v) { return field(std::to_string(v)); }
  Writer& field(int v) { return field(std::to_string(v)); }

  void endrow() {
    out_ << '\n';
    first_ = true;
  }

  void close() {
    out_.close();
    if (!out_) throw InputError("write to '" + path_ + "' failed");
  }

 private:
  std::string path_;
  std::ofstream out_;
  bool first_ = true;
};

}  // namespace dsc::csv
