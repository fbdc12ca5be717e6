#include "favor/matrix.hpp"

#include <algorithm>
#include <cmath>

#include "favor/errors.hpp"

namespace favor {

namespace {

void require_same_shape(const DenseMatrix& a, const DenseMatrix& b, const char* op) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) {
    throw ShapeError(std::string(op) + ": shape mismatch " + a.shape_string() + " vs " +
                     b.shape_string());
  }
}

}  // namespace

DenseMatrix::DenseMatrix(std::size_t rows, std::size_t cols)
    : rows_(rows), cols_(cols), data_(rows * cols, 0.0) {}

DenseMatrix::DenseMatrix(std::size_t rows, std::size_t cols, std::vector<double> data)
    : rows_(rows), cols_(cols), data_(std::move(data)) {
  if (data_.size() != rows_ * cols_) {
    throw ShapeError("DenseMatrix: data length " + std::to_string(data_.size()) +
                     " does not match shape " + shape_string());
  }
  if (!all_finite()) {
    throw InvalidArgument("DenseMatrix: non-finite entry in " + shape_string() + " data");
  }
}

DenseMatrix DenseMatrix::identity(std::size_t n) {
  DenseMatrix m(n, n);
  for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
  return m;
}

DenseMatrix DenseMatrix::from_rows(std::initializer_list<std::initializer_list<double>> rows) {
  const std::size_t r = rows.size();
  const std::size_t c = r == 0 ? 0 : rows.begin()->size();
  std::vector<double> data;
  data.reserve(r * c);
  for (const auto& row : rows) {
    if (row.size() != c) throw ShapeError("DenseMatrix::from_rows: ragged rows");
    data.insert(data.end(), row.begin(), row.end());
  }
  return DenseMatrix(r, c, std::move(data));
}

bool DenseMatrix::all_finite() const {
  return std::all_of(data_.begin(), data_.end(), [](double v) { return std::isfinite(v); });
}

std::string DenseMatrix::shape_string() const {
  return std::to_string(rows_) + "x" + std::to_string(cols_);
}

double max_abs_diff(const DenseMatrix& a, const DenseMatrix& b) {
  require_same_shape(a, b, "max_abs_diff");
  double worst = 0.0;
  auto av = a.values();
  auto bv = b.values();
  for (std::size_t i = 0; i < av.size(); ++i) worst = std::max(worst, std::abs(av[i] - bv[i]));
  return worst;
}

double mean_squared_diff(const DenseMatrix& a, const DenseMatrix& b) {
  require_same_shape(a, b, "mean_squared_diff");
  if (a.size() == 0) return 0.0;
  double acc = 0.0;
  auto av = a.values();
  auto bv = b.values();
  for (std::size_t i = 0; i < av.size(); ++i) {
    const double e = av[i] - bv[i];
    acc += e * e;
  }
  return acc / static_cast<double>(av.size());
}

double max_rel_diff(const DenseMatrix& a, const DenseMatrix& b, double floor) {
  require_same_shape(a, b, "max_rel_diff");
  double worst = 0.0;
  auto av = a.values();
  auto bv = b.values();
  for (std::size_t i = 0; i < av.size(); ++i) {
    worst = std::max(worst, std::abs(av[i] - bv[i]) / std::max(std::abs(bv[i]), floor));
  }
  return worst;
}

DenseMatrix transpose(const DenseMatrix& a) {
  DenseMatrix t(a.cols(), a.rows());
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t j = 0; j < a.cols(); ++j) t(j, i) = a(i, j);
  return t;
}

DenseMatrix scaled(const DenseMatrix& a, double factor) {
  DenseMatrix out = a;
  for (double& v : out.values()) v *= factor;
  return out;
}

DenseMatrix take_rows(const DenseMatrix& a, std::span<const std::size_t> order) {
  DenseMatrix out(order.size(), a.cols());
  for (std::size_t i = 0; i < order.size(); ++i) {
    if (order[i] >= a.rows()) throw InvalidArgument("take_rows: index out of range");
    std::copy_n(a.row(order[i]).begin(), a.cols(), out.row(i).begin());
  }
  return out;
}

double dot(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) {
    throw ShapeError("dot: length mismatch " + std::to_string(a.size()) + " vs " +
                     std::to_string(b.size()));
  }
  double acc = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) acc += a[i] * b[i];
  return acc;
}

double squared_norm(std::span<const double> a) {
  double acc = 0.0;
  for (double v : a) acc += v * v;
  return acc;
}

}  // namespace favor
