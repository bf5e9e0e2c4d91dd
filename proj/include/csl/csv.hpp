#pragma once

#include <cinttypes>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "csl/errors.hpp"

namespace csl {

inline constexpr const char* kArtifactVersion = "csl-1.0.0";

/// Deterministic CSV emission: 17 significant digits, '.' decimal, "\n"
/// line endings, a header row, a metadata comment line, and atomic
/// temp-file + rename placement.
class CsvWriter {
public:
  CsvWriter(std::vector<std::string> columns, std::uint64_t config_hash)
      : columns_(std::move(columns)), config_hash_(config_hash) {}

  void add_row(const std::vector<std::string>& cells) {
    if (cells.size() != columns_.size())
      throw Error("CsvWriter: cell count does not match header");
    rows_.push_back(cells);
  }

  static std::string num(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
  }
  static std::string num(int v) { return std::to_string(v); }

  void write(const std::filesystem::path& path) const {
    std::filesystem::path tmp = path;
    tmp += ".tmp";
    {
      std::ofstream out(tmp, std::ios::binary);
      if (!out) throw Error("CsvWriter: cannot open " + tmp.string());
      char meta[96];
      std::snprintf(meta, sizeof(meta), "# %s, config-hash=%016" PRIx64 "\n",
                    kArtifactVersion, config_hash_);
      out << meta;
      for (size_t i = 0; i < columns_.size(); ++i)
        out << columns_[i] << (i + 1 == columns_.size() ? "\n" : ",");
      for (const auto& row : rows_)
        for (size_t i = 0; i < row.size(); ++i)
          out << row[i] << (i + 1 == row.size() ? "\n" : ",");
      if (!out) throw Error("CsvWriter: write failed for " + tmp.string());
    }
    std::filesystem::rename(tmp, path);
  }

private:
  std::vector<std::string> columns_;
  std::uint64_t config_hash_;
  std::vector<std::vector<std::string>> rows_;
};

}  // namespace csl
