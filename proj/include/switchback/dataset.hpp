#pragma once

#include <string>
#include <vector>

#include "switchback/design.hpp"

namespace switchback {

// Column-oriented experiment log. z and y are required; p (binary designs)
// or mean/var (continuous ones) are optional per-period design moments.
struct Dataset {
  std::vector<double> z, y;
  std::vector<double> p;           // empty unless a p column was present
  std::vector<double> mean, var;   // empty unless mean/var columns were present
  int T() const { return static_cast<int>(z.size()); }
  bool has_p() const { return !p.empty(); }
  bool has_moments() const { return !mean.empty(); }
};

// CSV with a header row. Accepted columns (case-insensitive): time, z, y, p,
// mean, var. time must run 1..T in order; unknown columns are an error, as is
// a non-binary z when p is given.
Dataset parse_dataset(const std::string& path);

void write_dataset(const std::string& path, const Dataset& dataset);

// Builds the assignment design a dataset describes: the p column if present,
// mean/var columns otherwise, else constant fallback_p. fallback_p < 0 with
// no moment columns is an error.
AssignmentDesign design_from_dataset(const Dataset& dataset, double fallback_p, double eps);

// Shortest decimal form that round-trips a double.
std::string g17(double value);

}  // namespace switchback
