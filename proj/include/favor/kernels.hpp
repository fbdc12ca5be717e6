#pragma once

#include <cstddef>
#include <vector>

namespace favor {

// A (query, key) pair together with the derived quantities the closed forms
// need: z = x + y, delta = x - y, w = |z|^2 / 2.
class KernelPoint {
 public:
  KernelPoint(std::vector<double> x, std::vector<double> y);

  // x = norm_x * e1, y = norm_y * (cos(angle) e1 + sin(angle) e2) in R^d.
  static KernelPoint from_polar(std::size_t d, double norm_x, double norm_y, double angle);

  std::size_t dim() const { return x_.size(); }
  const std::vector<double>& x() const { return x_; }
  const std::vector<double>& y() const { return y_; }
  const std::vector<double>& z() const { return z_; }
  const std::vector<double>& delta() const { return delta_; }

  double inner() const { return inner_; }          // x^T y
  double x_sq() const { return x_sq_; }            // |x|^2
  double y_sq() const { return y_sq_; }            // |y|^2
  double z_sq() const { return z_sq_; }            // |x + y|^2
  double delta_sq() const { return delta_sq_; }    // |x - y|^2
  double w() const { return 0.5 * z_sq_; }

 private:
  std::vector<double> x_, y_, z_, delta_;
  double inner_ = 0, x_sq_ = 0, y_sq_ = 0, z_sq_ = 0, delta_sq_ = 0;
};

// SM(x, y) = exp(x^T y). Throws OverflowError past the double range.
double sm_exact(const KernelPoint& p);

inline constexpr double kSmregDefaultTolerance = 1e-12;
inline constexpr std::size_t kSmregMaxTerms = 10000;

// Regularized softmax kernel (projections uniform on the sqrt(d)-sphere):
//   exp(-(|x|^2 + |y|^2)/2) * sum_k w^k/k! * f(k, d),
//   f(k, d) = d^k / (d (d+2) ... (d+2k-2)).
// Terms are built as a running product. Summation stops once the next term
// drops below tol * partial sum.
double smreg_series(const KernelPoint& p, double tol = kSmregDefaultTolerance);

// Mean squared errors of the m-sample estimators with independent projections.
double mse_trig_closed(const KernelPoint& p, std::size_t m);
double mse_pos_closed(const KernelPoint& p, std::size_t m);
double mse_hyp_closed(const KernelPoint& p, std::size_t m);

// Guaranteed MSE reduction from orthogonal projections,
// (1 - 1/m) * 2/(d+2) * SM^2. Requires 1 <= m <= d.
double ortho_gap_bound(const KernelPoint& p, std::size_t m, std::size_t d);

}  // namespace favor
