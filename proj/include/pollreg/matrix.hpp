#pragma once

#include <cstddef>
#include <vector>

// Minimal dense real matrix. Station counts stay small (a handful, at most
// ~100), so plain row-major storage and O(n^3) solves are all we need.

namespace pollreg {

struct Matrix {
  int rows = 0;
  int cols = 0;
  std::vector<double> data;

  Matrix() = default;
  Matrix(int r, int c, double fill = 0.0)
      : rows(r), cols(c), data(static_cast<std::size_t>(r) * c, fill) {}

  double& at(int i, int j) { return data[static_cast<std::size_t>(i) * cols + j]; }
  double at(int i, int j) const {
    return data[static_cast<std::size_t>(i) * cols + j];
  }

  static Matrix identity(int n) {
    Matrix m(n, n);
    for (int i = 0; i < n; ++i) m.at(i, i) = 1.0;
    return m;
  }
};

// y = A x
std::vector<double> matvec(const Matrix& a, const std::vector<double>& x);

// y = A^T x
std::vector<double> matvec_transposed(const Matrix& a,
                                      const std::vector<double>& x);

// Solves A x = b by Gaussian elimination with partial pivoting.
// Throws std::runtime_error if A is numerically singular.
std::vector<double> solve_dense(Matrix a, std::vector<double> b);

}  // namespace pollreg
