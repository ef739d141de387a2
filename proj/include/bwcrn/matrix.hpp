#ifndef BWCRN_MATRIX_HPP
#define BWCRN_MATRIX_HPP

#include <cstddef>
#include <vector>

namespace bwcrn {

// Dense row-major matrix of doubles. Small helper used throughout; no
// linear algebra beyond element access and row views.
struct Mat {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<double> data;

  Mat() = default;
  Mat(std::size_t r, std::size_t c, double fill = 0.0)
      : rows(r), cols(c), data(r * c, fill) {}

  double& operator()(std::size_t r, std::size_t c) { return data[r * cols + c]; }
  double operator()(std::size_t r, std::size_t c) const { return data[r * cols + c]; }

  double* row(std::size_t r) { return data.data() + r * cols; }
  const double* row(std::size_t r) const { return data.data() + r * cols; }

  double row_sum(std::size_t r) const {
    double s = 0.0;
    for (std::size_t c = 0; c < cols; ++c) s += (*this)(r, c);
    return s;
  }
};

}  // namespace bwcrn

#endif
