#pragma once

#include "pspin/common.hpp"

#include <fstream>
#include <iomanip>
#include <sstream>
#include <utility>
#include <vector>

namespace pspin {

// Symmetric n x n array of replica overlaps, diagonal exactly 1, entries in
// [-1,1]. Arrays built from N spins additionally live on the grid {-1+2j/N}.
struct OverlapArray {
  MatrixXd r;

  OverlapArray() = default;
  explicit OverlapArray(MatrixXd m) : r(std::move(m)) { validate(); }

  int n() const { return int(r.rows()); }
  double operator()(int i, int j) const { return r(i, j); }

  void validate() const {
    if (r.rows() != r.cols() || r.rows() < 2)
      throw std::invalid_argument("overlap: array must be square, n >= 2");
    for (int i = 0; i < r.rows(); ++i) {
      if (r(i, i) != 1.0) throw std::invalid_argument("overlap: diagonal must be 1");
      for (int j = 0; j < r.cols(); ++j) {
        if (!(r(i, j) >= -1.0 && r(i, j) <= 1.0))
          throw std::invalid_argument("overlap: entries must lie in [-1,1]");
        if (r(i, j) != r(j, i)) throw std::invalid_argument("overlap: array must be symmetric");
      }
    }
  }
};

// CSV: one array per line, row-major entries with 17 significant digits
// (round-trips doubles); all lines must share the same n.
inline void write_overlap_csv(std::ostream& os, const std::vector<OverlapArray>& arrays) {
  os << std::setprecision(17);
  for (const auto& a : arrays) {
    for (int i = 0; i < a.n(); ++i)
      for (int j = 0; j < a.n(); ++j)
        os << a.r(i, j) << (i == a.n() - 1 && j == a.n() - 1 ? '\n' : ',');
  }
}

inline void write_overlap_csv(const std::string& path, const std::vector<OverlapArray>& arrays) {
  std::ofstream f(path);
  if (!f) throw std::invalid_argument("cannot open for writing: " + path);
  write_overlap_csv(f, arrays);
}

inline std::vector<OverlapArray> read_overlap_csv(std::istream& is) {
  std::vector<OverlapArray> out;
  std::string line;
  while (std::getline(is, line)) {
    if (line.empty() || line[0] == '#') continue;
    std::vector<double> vals;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) vals.push_back(std::stod(cell));
    const int n = int(std::lround(std::sqrt(double(vals.size()))));
    if (std::size_t(n) * std::size_t(n) != vals.size())
      throw std::invalid_argument("overlap csv: row length is not a perfect square");
    MatrixXd m(n, n);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) m(i, j) = vals[std::size_t(i * n + j)];
    out.emplace_back(std::move(m));
  }
  return out;
}

inline std::vector<OverlapArray> read_overlap_csv(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw std::invalid_argument("cannot open: " + path);
  return read_overlap_csv(f);
}

}  // namespace pspin
