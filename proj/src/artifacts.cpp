#include "artifacts.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>

namespace nstraj::detail {

CsvWriter::CsvWriter(const std::filesystem::path& path, std::vector<std::string> header) : out_(path) {
  if (!out_) throw std::runtime_error("cannot write " + path.string());
  std::string line;
  for (const auto& h : header) line += h + ',';
  line.back() = '\n';
  out_ << line;
}

std::size_t CsvTable::column(const std::string& name) const {
  const auto it = std::find(header.begin(), header.end(), name);
  if (it == header.end()) throw std::runtime_error("no column '" + name + "'");
  return static_cast<std::size_t>(it - header.begin());
}

std::vector<double> CsvTable::numbers(const std::string& name, const std::string& where_column,
                                      const std::string& where_value) const {
  const std::size_t c = column(name);
  const std::size_t w = where_column.empty() ? 0 : column(where_column);
  std::vector<double> out;
  for (const auto& r : rows) {
    if (!where_column.empty() && r[w] != where_value) continue;
    out.push_back(std::strtod(r[c].c_str(), nullptr));
  }
  return out;
}

CsvTable read_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("missing " + path.string());
  CsvTable t;
  std::string line;
  auto cells = [](const std::string& l) {
    std::vector<std::string> out;
    std::string item;
    std::istringstream s(l);
    while (std::getline(s, item, ',')) out.push_back(item);
    if (!l.empty() && l.back() == ',') out.emplace_back();
    return out;
  };
  if (!std::getline(in, line)) throw std::runtime_error("empty " + path.string());
  t.header = cells(line);
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    t.rows.push_back(cells(line));
    if (t.rows.back().size() != t.header.size()) throw std::runtime_error("ragged row in " + path.string());
  }
  return t;
}

double reduce(std::span<const double> v, const std::string& how) {
  if (v.empty()) throw std::runtime_error("reduce over no rows");
  if (how == "max") return *std::max_element(v.begin(), v.end());
  if (how == "min") return *std::min_element(v.begin(), v.end());
  if (how == "last") return v.back();
  if (how == "spread") {
    return *std::max_element(v.begin(), v.end()) / *std::min_element(v.begin(), v.end()) - 1.0;
  }
  if (how == "growth") return v.back() / v.front() - 1.0;
  if (how == "max_step_change" || how == "max_step_ratio") {
    double worst = how == "max_step_change" ? 0.0 : -std::numeric_limits<double>::infinity();
    for (std::size_t i = 1; i < v.size(); ++i) {
      const double x = how == "max_step_change" ? std::abs(v[i] - v[i - 1]) / std::abs(v[i - 1]) : v[i] / v[i - 1];
      worst = std::max(worst, x);
    }
    return worst;
  }
  throw std::runtime_error("unknown reduction '" + how + "'");
}

}  // namespace nstraj::detail
