// Text companion format for spectral fields.
//
//   # nstraj-spectral-field version=1 N=<resolution>
//   k1,k2,re_u1,im_u1,re_u2,im_u2
//   <one row per canonical half-plane wavevector: k2 > 0, or k2 = 0 and k1 >= 0>
//
// Values are written in shortest round-trip decimal, so reading back is exact.
#pragma once

#include <filesystem>
#include <iosfwd>

#include "nstraj/spectral_field.hpp"

namespace nstraj {

inline constexpr int kFieldFormatVersion = 1;

void write_field(std::ostream& os, const SpectralVector& v);
void write_field(const std::filesystem::path& path, const SpectralVector& v);

/// Throws std::runtime_error on a malformed header, unknown version, or a row
/// outside the retained wavevector set.
SpectralVector read_field(std::istream& is);
SpectralVector read_field(const std::filesystem::path& path);

}  // namespace nstraj
