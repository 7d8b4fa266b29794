// CSV plumbing shared by the experiment runner, verify and plot.
#pragma once

#include <filesystem>
#include <fstream>
#include <span>
#include <string>
#include <vector>

#include <fmt/format.h>

namespace nstraj::detail {

class CsvWriter {
 public:
  CsvWriter(const std::filesystem::path& path, std::vector<std::string> header);

  /// Appends one row; numbers use the shortest round-trip decimal form.
  template <typename... Ts>
  void row(const Ts&... cells) {
    std::string line;
    ((line += fmt::format("{}", cells), line += ','), ...);
    line.back() = '\n';
    out_ << line;
  }

 private:
  std::ofstream out_;
};

struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  /// Throws std::runtime_error when the column is absent.
  std::size_t column(const std::string& name) const;
  std::vector<double> numbers(const std::string& name, const std::string& where_column = "",
                              const std::string& where_value = "") const;
};

/// Throws std::runtime_error when the file is missing or ragged.
CsvTable read_csv(const std::filesystem::path& path);

/// Reduces a column: max | min | last | spread (max/min - 1) | growth
/// (last/first - 1) | max_step_change (max |v_i - v_{i-1}| / |v_{i-1}|) |
/// max_step_ratio (max v_i / v_{i-1}).
double reduce(std::span<const double> values, const std::string& how);

}  // namespace nstraj::detail
