#include "favor/kernels.hpp"

#include <cmath>
#include <limits>

#include "favor/errors.hpp"

namespace favor {

namespace {

const double kLogMax = std::log(std::numeric_limits<double>::max());

double checked_exp(double arg, const char* what) {
  if (arg > kLogMax) {
    throw OverflowError(std::string(what) + ": exp argument " + std::to_string(arg) +
                        " exceeds the double range");
  }
  return std::exp(arg);
}

void require_m(std::size_t m, const char* op) {
  if (m == 0) throw InvalidArgument(std::string(op) + ": m must be at least 1");
}

}  // namespace

KernelPoint::KernelPoint(std::vector<double> x, std::vector<double> y)
    : x_(std::move(x)), y_(std::move(y)) {
  if (x_.empty()) throw InvalidArgument("KernelPoint: dimension must be at least 1");
  if (x_.size() != y_.size()) {
    throw ShapeError("KernelPoint: x has dimension " + std::to_string(x_.size()) +
                     " but y has " + std::to_string(y_.size()));
  }
  z_.resize(x_.size());
  delta_.resize(x_.size());
  for (std::size_t i = 0; i < x_.size(); ++i) {
    if (!std::isfinite(x_[i]) || !std::isfinite(y_[i])) {
      throw InvalidArgument("KernelPoint: non-finite coordinate");
    }
    z_[i] = x_[i] + y_[i];
    delta_[i] = x_[i] - y_[i];
    inner_ += x_[i] * y_[i];
    x_sq_ += x_[i] * x_[i];
    y_sq_ += y_[i] * y_[i];
    z_sq_ += z_[i] * z_[i];
    delta_sq_ += delta_[i] * delta_[i];
  }
}

KernelPoint KernelPoint::from_polar(std::size_t d, double norm_x, double norm_y, double angle) {
  if (d < 2) throw InvalidArgument("KernelPoint::from_polar: needs d >= 2");
  std::vector<double> x(d, 0.0), y(d, 0.0);
  x[0] = norm_x;
  y[0] = norm_y * std::cos(angle);
  y[1] = norm_y * std::sin(angle);
  return KernelPoint(std::move(x), std::move(y));
}

double sm_exact(const KernelPoint& p) { return checked_exp(p.inner(), "sm_exact"); }

double smreg_series(const KernelPoint& p, double tol) {
  if (!(tol > 0.0)) throw InvalidArgument("smreg_series: tolerance must be positive");
  const double d = static_cast<double>(p.dim());
  const double w = p.w();

  double term = 1.0;  // w^k/k! * f(k, d) at k = 0
  double sum = 1.0;
  for (std::size_t k = 1;; ++k) {
    if (k > kSmregMaxTerms) {
      throw ConvergenceError("smreg_series: no convergence within " +
                             std::to_string(kSmregMaxTerms) + " terms (w = " + std::to_string(w) +
                             ")");
    }
    const double kk = static_cast<double>(k);
    term *= w / kk * d / (d + 2.0 * kk - 2.0);
    if (term < tol * sum) break;
    sum += term;
    if (!std::isfinite(sum)) throw OverflowError("smreg_series: partial sum overflowed");
  }
  const double result = std::exp(-0.5 * (p.x_sq() + p.y_sq())) * sum;
  if (!std::isfinite(result)) throw OverflowError("smreg_series: result out of range");
  return result;
}

double mse_trig_closed(const KernelPoint& p, std::size_t m) {
  require_m(m, "mse_trig_closed");
  // exp(|z|^2) SM^-2 = exp(|x|^2 + |y|^2): evaluate in that form.
  const double pre = checked_exp(p.x_sq() + p.y_sq(), "mse_trig_closed");
  const double f = -std::expm1(-p.delta_sq());
  return pre * f * f / (2.0 * static_cast<double>(m));
}

double mse_pos_closed(const KernelPoint& p, std::size_t m) {
  require_m(m, "mse_pos_closed");
  // exp(|z|^2) SM^2 = exp(|x|^2 + |y|^2 + 4 x^T y).
  const double pre = checked_exp(p.z_sq() + 2.0 * p.inner(), "mse_pos_closed");
  return pre * -std::expm1(-p.z_sq()) / static_cast<double>(m);
}

double mse_hyp_closed(const KernelPoint& p, std::size_t m) {
  return 0.5 * -std::expm1(-p.z_sq()) * mse_pos_closed(p, m);
}

double ortho_gap_bound(const KernelPoint& p, std::size_t m, std::size_t d) {
  require_m(m, "ortho_gap_bound");
  if (m > d) {
    throw InvalidArgument("ortho_gap_bound: m = " + std::to_string(m) +
                          " exceeds d = " + std::to_string(d) + "; orthogonal blocks need m <= d");
  }
  const double sm = sm_exact(p);
  const double md = static_cast<double>(m);
  return (1.0 - 1.0 / md) * (2.0 / (static_cast<double>(d) + 2.0)) * sm * sm;
}

}  // namespace favor
