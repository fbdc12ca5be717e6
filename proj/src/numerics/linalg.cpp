#include "favor/linalg.hpp"

#include <cmath>

#include "favor/errors.hpp"

namespace favor {

namespace {

void require_finite(const DenseMatrix& m, const char* op) {
  if (!m.all_finite()) {
    throw OverflowError(std::string(op) + ": result has non-finite entries (" + m.shape_string() +
                        ")");
  }
}

}  // namespace

DenseMatrix matmul(const DenseMatrix& a, const DenseMatrix& b) {
  if (a.cols() != b.rows()) {
    throw ShapeError("matmul: inner dimensions differ, " + a.shape_string() + " * " +
                     b.shape_string());
  }
  DenseMatrix out(a.rows(), b.cols());
  const std::size_t n = b.cols();
  for (std::size_t i = 0; i < a.rows(); ++i) {
    double* dst = out.row(i).data();
    const auto arow = a.row(i);
    for (std::size_t k = 0; k < a.cols(); ++k) {
      const double s = arow[k];
      const double* src = b.row(k).data();
      for (std::size_t j = 0; j < n; ++j) dst[j] += s * src[j];
    }
  }
  require_finite(out, "matmul");
  return out;
}

DenseMatrix matmul_transposed(const DenseMatrix& a, const DenseMatrix& b) {
  if (a.cols() != b.cols()) {
    throw ShapeError("matmul_transposed: column counts differ, " + a.shape_string() + " * (" +
                     b.shape_string() + ")^T");
  }
  DenseMatrix out(a.rows(), b.rows());
  const std::size_t inner = a.cols();
  for (std::size_t i = 0; i < a.rows(); ++i) {
    const double* arow = a.row(i).data();
    double* dst = out.row(i).data();
    for (std::size_t j = 0; j < b.rows(); ++j) {
      const double* brow = b.row(j).data();
      double acc = 0.0;
      for (std::size_t k = 0; k < inner; ++k) acc += arow[k] * brow[k];
      dst[j] = acc;
    }
  }
  require_finite(out, "matmul_transposed");
  return out;
}

DenseMatrix matmul_lhs_transposed(const DenseMatrix& a, const DenseMatrix& b) {
  if (a.rows() != b.rows()) {
    throw ShapeError("matmul_lhs_transposed: row counts differ, (" + a.shape_string() + ")^T * " +
                     b.shape_string());
  }
  DenseMatrix out(a.cols(), b.cols());
  const std::size_t n = b.cols();
  for (std::size_t k = 0; k < a.rows(); ++k) {
    const auto arow = a.row(k);
    const double* src = b.row(k).data();
    for (std::size_t i = 0; i < a.cols(); ++i) {
      const double s = arow[i];
      double* dst = out.row(i).data();
      for (std::size_t j = 0; j < n; ++j) dst[j] += s * src[j];
    }
  }
  require_finite(out, "matmul_lhs_transposed");
  return out;
}

DenseMatrix gram_schmidt_directions(const DenseMatrix& g) {
  if (g.rows() == 0 || g.cols() == 0) {
    throw InvalidArgument("gram_schmidt_directions: empty input " + g.shape_string());
  }
  if (g.rows() > g.cols()) {
    throw InvalidArgument("gram_schmidt_directions: " + std::to_string(g.rows()) +
                          " rows cannot be orthogonal in dimension " + std::to_string(g.cols()));
  }
  DenseMatrix q = g;
  for (std::size_t i = 0; i < q.rows(); ++i) {
    auto row = q.row(i);
    const double original = std::sqrt(squared_norm(row));
    // Two projection sweeps keep the Gram matrix at unit roundoff.
    for (int pass = 0; pass < 2; ++pass) {
      for (std::size_t j = 0; j < i; ++j) {
        const auto prev = q.row(j);
        const double c = dot(row, prev);
        for (std::size_t k = 0; k < row.size(); ++k) row[k] -= c * prev[k];
      }
    }
    const double residual = std::sqrt(squared_norm(row));
    if (!(residual > kGramSchmidtPivotThreshold * original) || original == 0.0) {
      throw RankDeficiencyError(i, residual);
    }
    for (double& v : row) v /= residual;
  }
  return q;
}

}  // namespace favor
