#include "favor/estimators.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "favor/errors.hpp"
#include "favor/linalg.hpp"
#include "favor/sampling.hpp"
#include "favor/summary.hpp"

namespace favor {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

// Seed offsets that keep the two arms of a paired experiment on disjoint streams.
constexpr std::uint64_t kOrthogonalArmTag = 0x6f7274686f676f6eull;

DenseMatrix as_row(const std::vector<double>& v) { return DenseMatrix(1, v.size(), v); }

// The point the estimator actually sees once the optional d^{-1/4} scaling is applied.
KernelPoint effective_point(const TrialPlan& plan) {
  if (!plan.spec.scale_by_d_quarter) return plan.point;
  const double s = std::pow(static_cast<double>(plan.point.dim()), -0.25);
  std::vector<double> x = plan.point.x(), y = plan.point.y();
  for (double& v : x) v *= s;
  for (double& v : y) v *= s;
  return KernelPoint(std::move(x), std::move(y));
}

void check_plan(const TrialPlan& plan) {
  plan.spec.validate();
  if (plan.trials < kMinTrials) {
    throw InvalidArgument("TrialPlan: trials = " + std::to_string(plan.trials) +
                          " is below the minimum of " + std::to_string(kMinTrials));
  }
}

void check_orthogonal_dims(const KernelPoint& point, std::size_t m, std::size_t d, const char* op) {
  if (point.dim() != d) {
    throw ShapeError(std::string(op) + ": point has dimension " + std::to_string(point.dim()) +
                     " but d = " + std::to_string(d));
  }
  if (m == 0 || m > d) {
    throw InvalidArgument(std::string(op) + ": requires 1 <= m <= d, got m = " +
                          std::to_string(m) + ", d = " + std::to_string(d));
  }
}

double binomial_se(double p, std::size_t n) {
  return std::sqrt(p * (1.0 - p) / static_cast<double>(n));
}

}  // namespace

std::string_view to_string(ReferenceKind k) {
  switch (k) {
    case ReferenceKind::SmExact: return "SM_EXACT";
    case ReferenceKind::SmregSeries: return "SMREG_SERIES";
    case ReferenceKind::MseClosed: return "MSE_CLOSED";
    case ReferenceKind::None: return "NONE";
  }
  return "?";
}

double z_score(double estimate, double reference, double std_error) {
  const double diff = estimate - reference;
  if (std_error > 0.0) return diff / std_error;
  if (std::abs(diff) <= 1e-12 * std::max(1.0, std::abs(reference))) return 0.0;
  return std::copysign(std::numeric_limits<double>::infinity(), diff);
}

std::vector<double> kernel_trial_values(const TrialPlan& plan, std::size_t threads) {
  check_plan(plan);
  const DenseMatrix x = as_row(plan.point.x());
  const DenseMatrix y = as_row(plan.point.y());
  const std::size_t d = plan.point.dim();
  std::vector<double> values(plan.trials);
  parallel_for(plan.trials, threads, [&](std::size_t t) {
    const ProjectionEnsemble ens = build_ensemble(plan.spec, d, RngStream(plan.master_seed, t));
    const DenseMatrix fx = apply_feature_map(plan.spec, ens, x);
    const DenseMatrix fy = apply_feature_map(plan.spec, ens, y);
    values[t] = dot(fx.row(0), fy.row(0));
  });
  return values;
}

StatsReport run_kernel_trials(const TrialPlan& plan, std::size_t threads) {
  const std::vector<double> values = kernel_trial_values(plan, threads);
  const double n = static_cast<double>(values.size());

  StatsReport report;
  report.trials = values.size();
  report.mean = pairwise_mean(values);
  report.std_error_of_mean = std::sqrt(sample_variance(values) / n);

  const KernelPoint point = effective_point(plan);
  if (plan.spec.variant == FeatureVariant::SmregPos) {
    report.kernel_value = smreg_series(point);
    report.reference_kind = ReferenceKind::SmregSeries;
  } else if (approximates_softmax(plan.spec.variant)) {
    report.kernel_value = sm_exact(point);
    report.reference_kind = ReferenceKind::SmExact;
  } else {
    report.kernel_value = kNaN;
    report.reference_kind = ReferenceKind::None;
  }

  // Without a known kernel the spread is taken about the sample mean.
  const double center =
      report.reference_kind == ReferenceKind::None ? report.mean : report.kernel_value;
  std::vector<double> sq(values.size());
  for (std::size_t i = 0; i < values.size(); ++i) {
    const double e = values[i] - center;
    sq[i] = e * e;
  }
  report.empirical_mse = pairwise_mean(sq);
  report.std_error_of_mse = std::sqrt(sample_variance(sq) / n);

  if (report.reference_kind == ReferenceKind::None) {
    report.reference_value = kNaN;
    report.z_score = 0.0;
  } else {
    report.reference_value = report.kernel_value;
    report.z_score = z_score(report.mean, report.reference_value, report.std_error_of_mean);
  }
  return report;
}

StatsReport against_mse(StatsReport report, double closed_form_mse) {
  report.reference_kind = ReferenceKind::MseClosed;
  report.reference_value = closed_form_mse;
  // At points where the estimator is constant (x = y for TRIG, x = -y for the
  // positive maps) both sides are zero up to double rounding of squared
  // errors, which is far below any sampling standard error.
  const double floor = kMseRoundingFloor * std::max(1.0, report.kernel_value * report.kernel_value);
  if (std::abs(report.empirical_mse - closed_form_mse) <= floor) {
    report.z_score = 0.0;
  } else {
    report.z_score = z_score(report.empirical_mse, closed_form_mse, report.std_error_of_mse);
  }
  return report;
}

OrthoGapResult ortho_gap_experiment(const KernelPoint& point, std::size_t m, std::size_t d,
                                    std::size_t trials, std::uint64_t seed, std::size_t threads) {
  check_orthogonal_dims(point, m, d, "ortho_gap_experiment");
  OrthoGapResult out;
  out.mse_closed = mse_pos_closed(point, m);
  out.gap_bound = ortho_gap_bound(point, m, d);

  TrialPlan iid{point, FeatureMapSpec::make(FeatureVariant::PosSoftmax, m, OrthoMode::Iid), trials,
                seed};
  TrialPlan ort{point, FeatureMapSpec::make(FeatureVariant::PosSoftmax, m, OrthoMode::GramSchmidt),
                trials, mix64(seed ^ kOrthogonalArmTag)};
  out.iid = against_mse(run_kernel_trials(iid, threads), out.mse_closed);
  out.ort = run_kernel_trials(ort, threads);
  out.mse_iid = out.iid.empirical_mse;
  out.mse_ort = out.ort.empirical_mse;
  out.combined_se = std::hypot(out.iid.std_error_of_mse, out.ort.std_error_of_mse);
  out.pass = out.mse_ort <= out.mse_iid - out.gap_bound + 3.0 * out.combined_se;
  return out;
}

TailFrequencies tail_frequency_experiment(const KernelPoint& point, std::size_t m, std::size_t d,
                                          double threshold_a, std::size_t trials,
                                          std::uint64_t seed, std::size_t threads) {
  check_orthogonal_dims(point, m, d, "tail_frequency_experiment");
  const double smreg = smreg_series(point);
  if (!(threshold_a > smreg)) {
    throw InvalidArgument("tail_frequency_experiment: threshold " + std::to_string(threshold_a) +
                          " must exceed SMREG(x, y) = " + std::to_string(smreg));
  }
  TrialPlan iid{point, FeatureMapSpec::make(FeatureVariant::SmregPos, m, OrthoMode::Iid), trials,
                seed};
  TrialPlan ort{point, FeatureMapSpec::make(FeatureVariant::SmregPos, m, OrthoMode::GramSchmidt),
                trials, mix64(seed ^ kOrthogonalArmTag)};
  auto exceed = [&](const TrialPlan& plan) {
    const std::vector<double> v = kernel_trial_values(plan, threads);
    const auto hits = std::count_if(v.begin(), v.end(), [&](double e) { return e > threshold_a; });
    return static_cast<double>(hits) / static_cast<double>(v.size());
  };
  TailFrequencies out;
  out.threshold = threshold_a;
  out.trials = trials;
  out.freq_iid = exceed(iid);
  out.freq_ort = exceed(ort);
  out.se_iid = binomial_se(out.freq_iid, trials);
  out.se_ort = binomial_se(out.freq_ort, trials);
  return out;
}

KernelMatrixError kernel_matrix_error(const DenseMatrix& q, const DenseMatrix& k,
                                      const FeatureMapSpec& spec, const RngStream& rng) {
  if (q.cols() != k.cols()) {
    throw ShapeError("kernel_matrix_error: Q " + q.shape_string() + " vs K " + k.shape_string());
  }
  const ProjectionEnsemble ens = build_ensemble(spec, q.cols(), rng);
  const DenseMatrix estimate =
      matmul_transposed(apply_feature_map(spec, ens, q), apply_feature_map(spec, ens, k));
  DenseMatrix exact = matmul_transposed(q, k);
  const double scale =
      spec.scale_by_d_quarter ? 1.0 / std::sqrt(static_cast<double>(q.cols())) : 1.0;
  for (double& v : exact.values()) {
    v = std::exp(v * scale);
    if (!std::isfinite(v)) throw OverflowError("kernel_matrix_error: exact kernel overflowed");
  }
  return {max_abs_diff(estimate, exact), mean_squared_diff(estimate, exact)};
}

DenseMatrix sample_ball(const RngStream& stream, std::size_t rows, std::size_t d, double radius) {
  if (!(radius >= 0.0)) throw InvalidArgument("sample_ball: radius must be nonnegative");
  DenseMatrix out = sample_gaussian(stream.substream(0), rows, d);
  PhiloxEngine radii = stream.substream(1).engine();
  for (std::size_t i = 0; i < rows; ++i) {
    auto row = out.row(i);
    const double n = std::sqrt(squared_norm(row));
    const double target = radius * std::pow(radii.uniform(), 1.0 / static_cast<double>(d));
    for (double& v : row) v *= target / n;
  }
  return out;
}

std::vector<SweepRow> uniform_error_sweep(const SweepPlan& plan, std::size_t threads) {
  if (plan.L == 0 || plan.L > 4096) {
    throw ResourceGuardError("uniform_error_sweep: L = " + std::to_string(plan.L) +
                             " outside [1, 4096]");
  }
  if (plan.m_list.empty() || plan.seeds == 0) {
    throw InvalidArgument("uniform_error_sweep: need at least one m and one seed");
  }
  const std::size_t nm = plan.m_list.size();
  std::vector<KernelMatrixError> errors(plan.seeds * nm);
  parallel_for(plan.seeds, threads, [&](std::size_t s) {
    const RngStream base(plan.master_seed, s);
    const DenseMatrix q = sample_ball(base.substream(0), plan.L, plan.d, plan.radius);
    const DenseMatrix k = sample_ball(base.substream(1), plan.L, plan.d, plan.radius);
    for (std::size_t i = 0; i < nm; ++i) {
      const auto spec = FeatureMapSpec::make(plan.variant, plan.m_list[i], plan.ortho);
      errors[s * nm + i] = kernel_matrix_error(q, k, spec, base.substream(2 + i));
    }
  });
  std::vector<SweepRow> rows;
  for (std::size_t i = 0; i < nm; ++i) {
    std::vector<double> max_abs, mse;
    for (std::size_t s = 0; s < plan.seeds; ++s) {
      max_abs.push_back(errors[s * nm + i].max_abs);
      mse.push_back(errors[s * nm + i].mse);
    }
    rows.push_back({plan.m_list[i], median(max_abs), median(mse)});
  }
  return rows;
}

}  // namespace favor
