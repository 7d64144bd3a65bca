#pragma once

// Dataset CSV: header `alpha2,y,sigma,kind`, `#` comment lines, one point
// per row.

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "qtele/fit.hpp"

namespace qtele {

/// Throws DataError carrying the 1-based line number of the first bad row.
std::vector<DataPoint> read_dataset(std::istream& in);
std::vector<DataPoint> read_dataset(const std::filesystem::path& path);

void write_dataset(std::ostream& out, const std::vector<DataPoint>& data,
                   const std::vector<std::string>& comments = {});

/// `count` points from lo to hi, evenly spaced in log (count >= 2).
std::vector<double> log_grid(double lo, double hi, std::size_t count);
std::vector<double> linear_grid(double lo, double hi, std::size_t count);

/// Model values at each alpha2 with multiplicative Gaussian noise of
/// relative size `relative_noise`; sigma is that same relative size (2% of
/// the model value when relative_noise is zero).
std::vector<DataPoint> synthesize(DataKind kind, const ModelParameters& p, const std::vector<double>& alpha2,
                                  double relative_noise, std::uint64_t seed);

}  // namespace qtele
