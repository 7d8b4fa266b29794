#include "nstraj/field_io.hpp"

#include <fmt/format.h>
#include <cstdio>

#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>

namespace nstraj {

void write_field(std::ostream& os, const SpectralVector& v) {
  const auto& g = v.grid();
  const int half = g.resolution() / 2;
  os << fmt::format("# nstraj-spectral-field version={} N={}\n", kFieldFormatVersion, g.resolution());
  os << "k1,k2,re_u1,im_u1,re_u2,im_u2\n";
  for (int k2 = 0; k2 < half; ++k2) {
    for (int k1 = (k2 == 0 ? 0 : -half + 1); k1 < half; ++k1) {
      const auto m = v.mode(k1, k2);
      os << fmt::format("{},{},{},{},{},{}\n", k1, k2, m[0].real(), m[0].imag(), m[1].real(), m[1].imag());
    }
  }
}

void write_field(const std::filesystem::path& path, const SpectralVector& v) {
  std::ofstream os(path);
  if (!os) throw std::runtime_error("cannot open " + path.string() + " for writing");
  write_field(os, v);
}

SpectralVector read_field(std::istream& is) {
  std::string line;
  if (!std::getline(is, line)) throw std::runtime_error("empty field file");
  int version = 0;
  int n = 0;
  if (std::sscanf(line.c_str(), "# nstraj-spectral-field version=%d N=%d", &version, &n) != 2) {
    throw std::runtime_error("malformed field header: " + line);
  }
  if (version != kFieldFormatVersion) {
    throw std::runtime_error("unsupported field format version " + std::to_string(version));
  }
  SpectralVector v{WavenumberGrid(n)};
  if (!std::getline(is, line) || line != "k1,k2,re_u1,im_u1,re_u2,im_u2") {
    throw std::runtime_error("missing field column header");
  }
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    std::istringstream row(line);
    int k1 = 0;
    int k2 = 0;
    double a[4] = {};
    char sep = 0;
    row >> k1 >> sep >> k2;
    for (double& x : a) row >> sep >> x;
    if (!row) throw std::runtime_error("malformed field row: " + line);
    try {
      v.set_mode(k1, k2, {a[0], a[1]}, {a[2], a[3]});
    } catch (const std::exception& e) {
      throw std::runtime_error("bad field row '" + line + "': " + e.what());
    }
  }
  return v;
}

SpectralVector read_field(const std::filesystem::path& path) {
  std::ifstream is(path);
  if (!is) throw std::runtime_error("cannot open " + path.string());
  return read_field(is);
}

}  // namespace nstraj
