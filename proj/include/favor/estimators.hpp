#pragma once

#include <cstddef>
#include <cstdint>
#include <string_view>
#include <vector>

#include "favor/features.hpp"
#include "favor/kernels.hpp"
#include "favor/matrix.hpp"
#include "favor/rng.hpp"

namespace favor {

inline constexpr std::size_t kMinTrials = 100;

// Differences between an empirical and a closed-form MSE at or below
// kMseRoundingFloor * max(1, K^2) are rounding noise and score z = 0.
inline constexpr double kMseRoundingFloor = 1e-24;

struct TrialPlan {
  KernelPoint point;
  FeatureMapSpec spec;
  std::size_t trials = 100000;
  std::uint64_t master_seed = 42;
};

enum class ReferenceKind { SmExact, SmregSeries, MseClosed, None };

std::string_view to_string(ReferenceKind k);

struct StatsReport {
  std::size_t trials = 0;
  double mean = 0.0;
  double empirical_mse = 0.0;  // mean of (estimate - true kernel)^2
  double std_error_of_mean = 0.0;
  double std_error_of_mse = 0.0;
  double kernel_value = 0.0;  // true kernel the MSE is centered on (NaN when unknown)
  double reference_value = 0.0;
  ReferenceKind reference_kind = ReferenceKind::None;
  double z_score = 0.0;
};

// (estimate - reference) / std_error. A zero standard error (a degenerate,
// constant estimator) yields 0 when the estimate matches the reference to
// 1e-12 relative and +-inf otherwise.
double z_score(double estimate, double reference, double std_error);

// One kernel estimate phi(x)^T phi(y) per trial; trial t draws its ensemble
// from stream (master_seed, t). Output is independent of `threads`.
std::vector<double> kernel_trial_values(const TrialPlan& plan, std::size_t threads = 1);

// Trial statistics against the true kernel: exp(x^T y) for softmax variants,
// the SMREG series for SMREG_POS, none for ReLU/sgn. z_score compares the
// trial mean with that kernel value.
StatsReport run_kernel_trials(const TrialPlan& plan, std::size_t threads = 1);

// Re-targets a report at a closed-form MSE: z_score compares empirical_mse with
// it, subject to the rounding floor above.
StatsReport against_mse(StatsReport report, double closed_form_mse);

struct OrthoGapResult {
  double mse_iid = 0.0;
  double mse_ort = 0.0;
  double gap_bound = 0.0;
  double combined_se = 0.0;  // sqrt(se_iid^2 + se_ort^2) of the two MSE estimates
  double mse_closed = 0.0;   // closed-form MSE of the iid estimator
  StatsReport iid;
  StatsReport ort;
  bool pass = false;  // mse_ort <= mse_iid - gap_bound + 3 * combined_se
};

// POS_SOFTMAX with iid versus Gram-Schmidt projections at the same point.
// Requires m <= d == point.dim().
OrthoGapResult ortho_gap_experiment(const KernelPoint& point, std::size_t m, std::size_t d,
                                    std::size_t trials, std::uint64_t seed,
                                    std::size_t threads = 1);

struct TailFrequencies {
  double threshold = 0.0;
  double freq_iid = 0.0;
  double freq_ort = 0.0;
  double se_iid = 0.0;  // binomial standard errors
  double se_ort = 0.0;
  std::size_t trials = 0;
};

// Fraction of SMREG_POS estimates exceeding threshold_a, iid vs orthogonal.
// Requires threshold_a > smreg_series(point) and m <= d == point.dim().
TailFrequencies tail_frequency_experiment(const KernelPoint& point, std::size_t m, std::size_t d,
                                          double threshold_a, std::size_t trials,
                                          std::uint64_t seed, std::size_t threads = 1);

struct KernelMatrixError {
  double max_abs = 0.0;
  double mse = 0.0;  // mean over entries of (estimate - exact)^2
};

// Compares the materialized kernel estimate Q'K'^T with exp(Q K^T) (after the
// feature spec's optional d^{-1/4} scaling of both sides).
KernelMatrixError kernel_matrix_error(const DenseMatrix& q, const DenseMatrix& k,
                                      const FeatureMapSpec& spec, const RngStream& rng);

// L x d rows with norms uniform in the radius-R ball, from `stream`.
DenseMatrix sample_ball(const RngStream& stream, std::size_t rows, std::size_t d, double radius);

struct SweepPlan {
  std::size_t L = 1024;
  std::size_t d = 16;
  double radius = 1.0;
  std::vector<std::size_t> m_list;
  std::size_t seeds = 15;
  FeatureVariant variant = FeatureVariant::PosSoftmax;
  OrthoMode ortho = OrthoMode::GramSchmidt;
  std::uint64_t master_seed = 42;
};

struct SweepRow {
  std::size_t m = 0;
  double median_max_abs_error = 0.0;
  double median_entry_mse = 0.0;
};

// For each m: queries and keys drawn in the radius-R ball, kernel matrix
// estimated and compared with exp(Q K^T); medians over seeds. Seed s uses the
// same inputs for every m. L <= 4096.
std::vector<SweepRow> uniform_error_sweep(const SweepPlan& plan, std::size_t threads = 1);

}  // namespace favor
