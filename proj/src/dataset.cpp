#include "switchback/dataset.hpp"

#include <algorithm>
#include <cctype>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include "switchback/errors.hpp"

namespace switchback {

std::string g17(double value) {
  // Shortest of %.15g/%.16g/%.17g that parses back to the same bits.
  char buf[40];
  for (int prec = 15; prec <= 17; ++prec) {
    std::snprintf(buf, sizeof buf, "%.*g", prec, value);
    if (std::strtod(buf, nullptr) == value) break;
  }
  return buf;
}

namespace {

std::string lower(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return s;
}

std::string trim(const std::string& s) {
  std::size_t a = s.find_first_not_of(" \t\r");
  if (a == std::string::npos) return "";
  std::size_t b = s.find_last_not_of(" \t\r");
  return s.substr(a, b - a + 1);
}

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> out;
  std::stringstream ss(line);
  std::string cell;
  while (std::getline(ss, cell, ',')) out.push_back(trim(cell));
  if (!line.empty() && line.back() == ',') out.push_back("");
  return out;
}

double parse_number(const std::string& cell, int row, const std::string& column) {
  if (cell.empty())
    throw DataError("row " + std::to_string(row) + ": missing " + column + " field");
  const char* begin = cell.c_str();
  char* end = nullptr;
  double v = std::strtod(begin, &end);
  if (end != begin + cell.size())
    throw DataError("row " + std::to_string(row) + ": cannot parse " + column + " value '" +
                    cell + "'");
  return v;
}

}  // namespace

Dataset parse_dataset(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw DataError("cannot open " + path);
  std::string line;
  if (!std::getline(f, line)) throw DataError(path + ": empty file, expected a header row");

  std::vector<std::string> header = split_csv(line);
  int col_time = -1, col_z = -1, col_y = -1, col_p = -1, col_mean = -1, col_var = -1;
  for (std::size_t j = 0; j < header.size(); ++j) {
    std::string name = lower(header[j]);
    int* slot = nullptr;
    if (name == "time")
      slot = &col_time;
    else if (name == "z")
      slot = &col_z;
    else if (name == "y")
      slot = &col_y;
    else if (name == "p")
      slot = &col_p;
    else if (name == "mean")
      slot = &col_mean;
    else if (name == "var")
      slot = &col_var;
    else
      throw DataError(path + ": unknown column '" + header[j] + "'");
    if (*slot != -1) throw DataError(path + ": duplicate column '" + header[j] + "'");
    *slot = static_cast<int>(j);
  }
  if (col_time < 0 || col_z < 0 || col_y < 0)
    throw DataError(path + ": header must name time, z and y columns");
  if ((col_mean < 0) != (col_var < 0))
    throw DataError(path + ": mean and var columns must appear together");
  if (col_p >= 0 && col_mean >= 0)
    throw DataError(path + ": p and mean/var columns are mutually exclusive");

  Dataset ds;
  int row = 0;
  while (std::getline(f, line)) {
    if (trim(line).empty()) continue;
    ++row;
    std::vector<std::string> cells = split_csv(line);
    if (cells.size() != header.size())
      throw DataError("row " + std::to_string(row) + ": expected " +
                      std::to_string(header.size()) + " fields, found " +
                      std::to_string(cells.size()));
    double t = parse_number(cells[col_time], row, "time");
    if (t != static_cast<double>(row)) {
      if (row > 1 && t == static_cast<double>(row - 1))
        throw DataError("row " + std::to_string(row) + ": duplicate time index " + g17(t));
      throw DataError("row " + std::to_string(row) + ": time index " + g17(t) +
                      " breaks the contiguous 1..T order");
    }
    double z = parse_number(cells[col_z], row, "z");
    double y = parse_number(cells[col_y], row, "y");
    if (col_p >= 0 && z != 0.0 && z != 1.0)
      throw DataError("row " + std::to_string(row) +
                      ": z must be 0 or 1 under a binary design, got " + g17(z));
    ds.z.push_back(z);
    ds.y.push_back(y);
    if (col_p >= 0) ds.p.push_back(parse_number(cells[col_p], row, "p"));
    if (col_mean >= 0) {
      ds.mean.push_back(parse_number(cells[col_mean], row, "mean"));
      ds.var.push_back(parse_number(cells[col_var], row, "var"));
    }
  }
  if (ds.z.empty()) throw DataError(path + ": no data rows");
  return ds;
}

void write_dataset(const std::string& path, const Dataset& dataset) {
  std::ofstream f(path);
  if (!f) throw DataError("cannot open " + path + " for writing");
  f << "time,z,y";
  if (dataset.has_p()) f << ",p";
  if (dataset.has_moments()) f << ",mean,var";
  f << '\n';
  for (int t = 0; t < dataset.T(); ++t) {
    f << (t + 1) << ',' << g17(dataset.z[t]) << ',' << g17(dataset.y[t]);
    if (dataset.has_p()) f << ',' << g17(dataset.p[t]);
    if (dataset.has_moments()) f << ',' << g17(dataset.mean[t]) << ',' << g17(dataset.var[t]);
    f << '\n';
  }
}

AssignmentDesign design_from_dataset(const Dataset& dataset, double fallback_p, double eps) {
  if (dataset.has_moments())
    return AssignmentDesign::continuous_moments(dataset.mean, dataset.var);
  if (dataset.has_p()) return AssignmentDesign::bernoulli(dataset.p, eps);
  if (fallback_p < 0.0)
    throw DataError(
        "dataset carries no design columns; supply a treatment probability explicitly");
  for (std::size_t t = 0; t < dataset.z.size(); ++t)
    if (dataset.z[t] != 0.0 && dataset.z[t] != 1.0)
      throw DataError("row " + std::to_string(t + 1) +
                      ": z must be 0 or 1 under a binary design, got " + g17(dataset.z[t]));
  return AssignmentDesign::bernoulli_constant(dataset.T(), fallback_p, eps);
}

}  // namespace switchback
