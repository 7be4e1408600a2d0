#pragma once

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <json.hpp>
#include <string>
#include <vector>

#include "errors.hpp"

namespace peierls {

// 17 significant digits, '.' separator whatever the locale.
inline std::string csv_number(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.16e", x);
  std::string s(buf);
  for (auto& c : s)
    if (c == ',') c = '.';
  return s;
}

inline std::string csv_number(long x) { return std::to_string(x); }
inline std::string csv_number(int x) { return std::to_string(x); }

// Plain CSV, LF endings, header line first; nothing run-dependent goes in here.
class CsvWriter {
 public:
  CsvWriter(const std::filesystem::path& path, const std::vector<std::string>& header) : path_(path) {
    out_.open(path, std::ios::binary);
    if (!out_) throw ConfigError("cannot write '" + path.string() + "'");
    line(header);
  }

  template <class... T>
  void row(const T&... cells) {
    std::vector<std::string> v{csv_number(cells)...};
    line(v);
  }

  void line(const std::vector<std::string>& cells) {
    for (size_t i = 0; i < cells.size(); ++i) {
      if (i) out_ << ',';
      out_ << cells[i];
    }
    out_ << '\n';
    ++rows_;
  }

  long data_rows() const { return rows_ - 1; }
  const std::filesystem::path& path() const { return path_; }

 private:
  std::filesystem::path path_;
  std::ofstream out_;
  long rows_ = 0;
};

inline void write_json(const std::filesystem::path& path, const nlohmann::json& j) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ConfigError("cannot write '" + path.string() + "'");
  out << j.dump(2) << '\n';
}

// x.csv -> x.meta.json
inline std::filesystem::path sidecar_path(const std::filesystem::path& csv) {
  auto p = csv;
  p.replace_extension(".meta.json");
  return p;
}

}  // namespace peierls
