#pragma once

#include <cstddef>
#include <initializer_list>
#include <span>
#include <string>
#include <vector>

namespace favor {

// Row-major dense matrix of doubles. Construction from explicit data checks
// that the length matches the shape and that every entry is finite.
class DenseMatrix {
 public:
  DenseMatrix() = default;

  // Zero-filled rows x cols matrix.
  DenseMatrix(std::size_t rows, std::size_t cols);

  DenseMatrix(std::size_t rows, std::size_t cols, std::vector<double> data);

  static DenseMatrix identity(std::size_t n);
  static DenseMatrix from_rows(std::initializer_list<std::initializer_list<double>> rows);

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  std::size_t size() const { return data_.size(); }
  bool empty() const { return data_.empty(); }

  double operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }
  double& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }

  std::span<const double> row(std::size_t r) const { return {data_.data() + r * cols_, cols_}; }
  std::span<double> row(std::size_t r) { return {data_.data() + r * cols_, cols_}; }

  std::span<const double> values() const { return data_; }
  std::span<double> values() { return data_; }

  bool all_finite() const;

  // "rows x cols", used in error messages.
  std::string shape_string() const;

  std::size_t bytes() const { return data_.size() * sizeof(double); }

  friend bool operator==(const DenseMatrix&, const DenseMatrix&) = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

// Largest |a(i,j) - b(i,j)|. Shapes must match.
double max_abs_diff(const DenseMatrix& a, const DenseMatrix& b);

// Mean of (a(i,j) - b(i,j))^2. Shapes must match.
double mean_squared_diff(const DenseMatrix& a, const DenseMatrix& b);

// max |a - b| / max(|b|, floor) entry-wise.
double max_rel_diff(const DenseMatrix& a, const DenseMatrix& b, double floor = 1e-300);

DenseMatrix transpose(const DenseMatrix& a);

// Scalar multiple of every entry.
DenseMatrix scaled(const DenseMatrix& a, double factor);

// Rows selected (and reordered) by index.
DenseMatrix take_rows(const DenseMatrix& a, std::span<const std::size_t> order);

double dot(std::span<const double> a, std::span<const double> b);
double squared_norm(std::span<const double> a);

}  // namespace favor
