#pragma once

// Straightforward reference implementations the library is checked against.
// They favour the obvious formula over speed and share no code with src/.

#include <cmath>
#include <cstddef>
#include <functional>
#include <numbers>
#include <vector>

#include "favor/matrix.hpp"

namespace oracle {

using favor::DenseMatrix;

inline DenseMatrix matmul(const DenseMatrix& a, const DenseMatrix& b) {
  DenseMatrix c(a.rows(), b.cols());
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t j = 0; j < b.cols(); ++j) {
      long double s = 0;
      for (std::size_t k = 0; k < a.cols(); ++k) s += static_cast<long double>(a(i, k)) * b(k, j);
      c(i, j) = static_cast<double>(s);
    }
  return c;
}

inline DenseMatrix transpose(const DenseMatrix& a) {
  DenseMatrix t(a.cols(), a.rows());
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t j = 0; j < a.cols(); ++j) t(j, i) = a(i, j);
  return t;
}

// D^{-1} A V for an explicit nonnegative score matrix A, optionally keeping
// only the lower triangle.
inline DenseMatrix normalize_and_apply(const DenseMatrix& a, const DenseMatrix& v, bool causal,
                                       double stabilizer = 0.0) {
  const std::size_t L = a.rows();
  DenseMatrix out(L, v.cols());
  for (std::size_t i = 0; i < L; ++i) {
    long double denom = 0;
    std::vector<long double> acc(v.cols(), 0);
    for (std::size_t j = 0; j < L; ++j) {
      if (causal && j > i) break;
      denom += a(i, j);
      for (std::size_t c = 0; c < v.cols(); ++c) acc[c] += static_cast<long double>(a(i, j)) * v(j, c);
    }
    for (std::size_t c = 0; c < v.cols(); ++c)
      out(i, c) = static_cast<double>(acc[c] / (denom + stabilizer));
  }
  return out;
}

// Softmax attention written out entry by entry: exp(q_i.k_j / sqrt(d)).
inline DenseMatrix softmax_attention(const DenseMatrix& q, const DenseMatrix& k,
                                     const DenseMatrix& v, bool causal) {
  DenseMatrix a(q.rows(), k.rows());
  const double s = 1.0 / std::sqrt(static_cast<double>(q.cols()));
  for (std::size_t i = 0; i < q.rows(); ++i)
    for (std::size_t j = 0; j < k.rows(); ++j) {
      double dotp = 0;
      for (std::size_t c = 0; c < q.cols(); ++c) dotp += q(i, c) * k(j, c);
      a(i, j) = std::exp(dotp * s);
    }
  return normalize_and_apply(a, v, causal);
}

// Composite Simpson rule on [a, b] with n (even) intervals.
inline double simpson(const std::function<double(double)>& f, double a, double b, int n) {
  const double h = (b - a) / n;
  double s = f(a) + f(b);
  for (int i = 1; i < n; ++i) s += f(a + i * h) * (i % 2 ? 4.0 : 2.0);
  return s * h / 3.0;
}

// E[g(sigma * N(0, 1))] by Simpson quadrature against the normal density.
inline double gaussian_expectation(const std::function<double(double)>& g, double sigma) {
  const double c = 1.0 / std::sqrt(2.0 * std::numbers::pi);
  return simpson([&](double t) { return g(sigma * t) * c * std::exp(-0.5 * t * t); }, -14.0, 14.0,
                 40000);
}

// Regularized softmax kernel by direct integration over the angle between a
// uniform sqrt(d)-sphere projection and z = x + y:
//   exp(-(|x|^2+|y|^2)/2) * E[exp(sqrt(d) |z| cos(theta))],
// where theta has density proportional to sin^{d-2}.
inline double smreg_quadrature(std::size_t d, double x_sq, double y_sq, double z_norm) {
  const double sd = std::sqrt(static_cast<double>(d));
  const double p = static_cast<double>(d) - 2.0;
  auto weight = [&](double t) { return p == 0 ? 1.0 : std::pow(std::sin(t), p); };
  const double num = simpson([&](double t) { return std::exp(sd * z_norm * std::cos(t)) * weight(t); },
                             0.0, std::numbers::pi, 20000);
  const double den = simpson(weight, 0.0, std::numbers::pi, 20000);
  return std::exp(-0.5 * (x_sq + y_sq)) * num / den;
}

}  // namespace oracle
