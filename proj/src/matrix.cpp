#include "pollreg/matrix.hpp"

#include <cmath>
#include <stdexcept>
#include <utility>

namespace pollreg {

std::vector<double> matvec(const Matrix& a, const std::vector<double>& x) {
  std::vector<double> y(static_cast<std::size_t>(a.rows), 0.0);
  for (int i = 0; i < a.rows; ++i) {
    double acc = 0.0;
    for (int j = 0; j < a.cols; ++j) acc += a.at(i, j) * x[j];
    y[i] = acc;
  }
  return y;
}

std::vector<double> matvec_transposed(const Matrix& a,
                                      const std::vector<double>& x) {
  std::vector<double> y(static_cast<std::size_t>(a.cols), 0.0);
  for (int i = 0; i < a.rows; ++i) {
    const double xi = x[i];
    for (int j = 0; j < a.cols; ++j) y[j] += a.at(i, j) * xi;
  }
  return y;
}

std::vector<double> solve_dense(Matrix a, std::vector<double> b) {
  if (a.rows != a.cols || a.rows != static_cast<int>(b.size())) {
    throw std::invalid_argument("solve_dense: dimension mismatch");
  }
  const int n = a.rows;
  for (int col = 0; col < n; ++col) {
    int pivot = col;
    double best = std::abs(a.at(col, col));
    for (int r = col + 1; r < n; ++r) {
      const double v = std::abs(a.at(r, col));
      if (v > best) {
        best = v;
        pivot = r;
      }
    }
    if (best < 1e-14) throw std::runtime_error("solve_dense: singular matrix");
    if (pivot != col) {
      for (int j = 0; j < n; ++j) std::swap(a.at(col, j), a.at(pivot, j));
      std::swap(b[col], b[pivot]);
    }
    const double inv = 1.0 / a.at(col, col);
    for (int r = col + 1; r < n; ++r) {
      const double f = a.at(r, col) * inv;
      if (f == 0.0) continue;
      for (int j = col; j < n; ++j) a.at(r, j) -= f * a.at(col, j);
      b[r] -= f * b[col];
    }
  }
  std::vector<double> x(static_cast<std::size_t>(n), 0.0);
  for (int i = n - 1; i >= 0; --i) {
    double acc = b[i];
    for (int j = i + 1; j < n; ++j) acc -= a.at(i, j) * x[j];
    x[i] = acc / a.at(i, i);
  }
  return x;
}

}  // namespace pollreg
