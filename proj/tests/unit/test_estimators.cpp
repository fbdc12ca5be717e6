#include <doctest.h>

#include <cmath>
#include <limits>

#include "favor/errors.hpp"
#include "favor/estimators.hpp"
#include "favor/inputs.hpp"
#include "favor/summary.hpp"

using namespace favor;

namespace {

KernelPoint small_point(std::size_t d = 8) {
  return KernelPoint::from_polar(d, 0.5, 0.4, 1.1);
}

TrialPlan plan(FeatureVariant v, std::size_t m, OrthoMode mode, std::size_t trials, std::uint64_t seed,
               std::size_t d = 8) {
  return {small_point(d), FeatureMapSpec::make(v, m, mode), trials, seed};
}

}  // namespace

TEST_CASE("z_score conventions") {
  CHECK(z_score(3.0, 1.0, 0.5) == 4.0);
  CHECK(z_score(1.0, 1.0, 0.0) == 0.0);
  CHECK(z_score(1.0 + 1e-14, 1.0, 0.0) == 0.0);
  CHECK(z_score(2.0, 1.0, 0.0) == std::numeric_limits<double>::infinity());
  CHECK(z_score(0.0, 1.0, 0.0) == -std::numeric_limits<double>::infinity());
}

TEST_CASE("trial values do not depend on the thread count") {
  const auto p = plan(FeatureVariant::PosSoftmax, 4, OrthoMode::GramSchmidt, 1000, 5);
  const auto one = kernel_trial_values(p, 1);
  CHECK(kernel_trial_values(p, 3) == one);
  CHECK(kernel_trial_values(p, 16) == one);
  const auto r1 = run_kernel_trials(p, 1), r4 = run_kernel_trials(p, 4);
  CHECK(r1.mean == r4.mean);
  CHECK(r1.empirical_mse == r4.empirical_mse);
}

TEST_CASE("trial plans are validated") {
  CHECK_THROWS_AS(run_kernel_trials(plan(FeatureVariant::PosSoftmax, 4, OrthoMode::Iid, 99, 1)),
                  InvalidArgument);
  CHECK_NOTHROW(run_kernel_trials(plan(FeatureVariant::PosSoftmax, 4, OrthoMode::Iid, kMinTrials, 1)));
}

TEST_CASE("reference kernels per variant") {
  const auto pos = run_kernel_trials(plan(FeatureVariant::PosSoftmax, 2, OrthoMode::Iid, 200, 1));
  CHECK(pos.reference_kind == ReferenceKind::SmExact);
  CHECK(pos.kernel_value == doctest::Approx(sm_exact(small_point())));
  const auto reg = run_kernel_trials(plan(FeatureVariant::SmregPos, 2, OrthoMode::Iid, 200, 1));
  CHECK(reg.reference_kind == ReferenceKind::SmregSeries);
  CHECK(reg.kernel_value == doctest::Approx(smreg_series(small_point())));
  const auto relu = run_kernel_trials(plan(FeatureVariant::ReluGeneralized, 2, OrthoMode::Iid, 200, 1));
  CHECK(relu.reference_kind == ReferenceKind::None);
  CHECK(std::isnan(relu.kernel_value));
  CHECK(relu.z_score == 0.0);
  CHECK(relu.empirical_mse == doctest::Approx(
                                  sample_variance(kernel_trial_values(
                                      plan(FeatureVariant::ReluGeneralized, 2, OrthoMode::Iid, 200, 1))) *
                                  199.0 / 200.0));
  CHECK(to_string(ReferenceKind::MseClosed) == "MSE_CLOSED");
}

TEST_CASE("scaled inputs are compared with the scaled kernel") {
  auto p = plan(FeatureVariant::PosSoftmax, 4, OrthoMode::Iid, 200, 1, 16);
  p.spec.scale_by_d_quarter = true;
  const auto r = run_kernel_trials(p);
  CHECK(r.kernel_value == doctest::Approx(std::exp(small_point(16).inner() / 4.0)));
}

TEST_CASE("softmax estimators are unbiased at a fixed point") {
  for (FeatureVariant v : {FeatureVariant::TrigSoftmax, FeatureVariant::PosSoftmax,
                           FeatureVariant::HypSoftmax, FeatureVariant::SmregPos}) {
    for (OrthoMode mode : {OrthoMode::Iid, OrthoMode::GramSchmidt}) {
      CAPTURE(to_string(v));
      const auto r = run_kernel_trials(plan(v, 4, mode, 20000, 31));
      CHECK(std::abs(r.z_score) < 4.0);
    }
  }
}

TEST_CASE("empirical MSE matches the closed forms") {
  const KernelPoint p = small_point();
  struct Case {
    FeatureVariant v;
    double closed;
  };
  for (const Case& c : {Case{FeatureVariant::TrigSoftmax, mse_trig_closed(p, 3)},
                        Case{FeatureVariant::PosSoftmax, mse_pos_closed(p, 3)},
                        Case{FeatureVariant::HypSoftmax, mse_hyp_closed(p, 3)}}) {
    const auto r = against_mse(run_kernel_trials(plan(c.v, 3, OrthoMode::Iid, 20000, 8)), c.closed);
    CHECK(r.reference_kind == ReferenceKind::MseClosed);
    CHECK(r.reference_value == c.closed);
    CHECK(std::abs(r.z_score) < 4.0);
  }
}

TEST_CASE("constant estimators score z = 0 against a zero closed form") {
  const KernelPoint same = KernelPoint::from_polar(16, 0.5, 0.5, 0.0);
  const auto r = against_mse(
      run_kernel_trials({same, FeatureMapSpec::make(FeatureVariant::TrigSoftmax, 1, OrthoMode::Iid), 1000, 3}),
      mse_trig_closed(same, 1));
  CHECK(r.empirical_mse <= kMseRoundingFloor);
  CHECK(r.z_score == 0.0);
}

TEST_CASE("z-scores behave like standard normals across independent runs") {
  // Self-check of the test statistic: 400 runs of 500 trials each.
  std::vector<double> zs;
  for (std::uint64_t s = 0; s < 400; ++s)
    zs.push_back(run_kernel_trials(plan(FeatureVariant::PosSoftmax, 2, OrthoMode::Iid, 500, 1000 + s)).z_score);
  CHECK(std::abs(pairwise_mean(zs)) < 0.25);
  CHECK(sample_variance(zs) > 0.75);
  CHECK(sample_variance(zs) < 1.3);
}

TEST_CASE("orthogonal features at a single projection") {
  // m = 1: no pairs to decorrelate, so the bound is 0 and both arms estimate
  // the same MSE.
  const KernelPoint p = small_point(16);
  const auto r = ortho_gap_experiment(p, 1, 16, 20000, 4);
  CHECK(r.gap_bound == 0.0);
  CHECK(r.mse_closed == doctest::Approx(mse_pos_closed(p, 1)));
  CHECK(r.pass == (r.mse_ort <= r.mse_iid + 3 * r.combined_se));
  CHECK(std::abs(r.mse_ort - r.mse_iid) < 4 * r.combined_se);
  CHECK_THROWS_AS(ortho_gap_experiment(p, 17, 16, 1000, 1), InvalidArgument);
  CHECK_THROWS_AS(ortho_gap_experiment(p, 4, 8, 1000, 1), ShapeError);
}

TEST_CASE("orthogonal features at x = y = e1, m = 8, d = 16") {
  std::vector<double> e1(16, 0.0);
  e1[0] = 1.0;
  const auto r = ortho_gap_experiment(KernelPoint(e1, e1), 8, 16, 200000, 42);
  // |z| = 2: squared errors are heavy-tailed, so only the slack-adjusted
  // inequality is asserted.
  CHECK(r.pass);
  CHECK(std::abs(r.iid.z_score) < 4.0);
}

TEST_CASE("tail frequencies") {
  const KernelPoint p = KernelPoint::from_polar(8, 0.8, 0.8, 0.3);
  const double reg = smreg_series(p);
  CHECK_THROWS_AS(tail_frequency_experiment(p, 4, 8, reg * 0.9, 1000, 1), InvalidArgument);
  const auto t = tail_frequency_experiment(p, 8, 8, 1.5 * reg, 20000, 1);
  CHECK(t.freq_iid > 0.0);
  CHECK(t.freq_ort <= t.freq_iid + 3 * std::hypot(t.se_iid, t.se_ort));
  CHECK(t.se_iid == doctest::Approx(std::sqrt(t.freq_iid * (1 - t.freq_iid) / 20000)));
}

TEST_CASE("ball sampling") {
  const DenseMatrix x = sample_ball(RngStream(3, 3), 2000, 4, 1.5);
  std::vector<double> r4;
  for (std::size_t i = 0; i < x.rows(); ++i) {
    const double r = std::sqrt(squared_norm(x.row(i)));
    CHECK(r <= 1.5 + 1e-12);
    r4.push_back(std::pow(r / 1.5, 4.0));  // uniform on [0, 1] for a uniform 4-ball
  }
  CHECK(std::abs(pairwise_mean(r4) - 0.5) < 5 * std::sqrt(1.0 / 12 / 2000));
  CHECK_THROWS_AS(sample_ball(RngStream(1, 1), 3, 2, -1.0), InvalidArgument);
}

TEST_CASE("kernel matrix error shrinks with m") {
  SweepPlan sp;
  sp.L = 128;
  sp.d = 8;
  sp.m_list = {4, 64, 1024};
  sp.seeds = 5;
  const auto rows = uniform_error_sweep(sp, 2);
  REQUIRE(rows.size() == 3);
  CHECK(rows[1].median_max_abs_error < rows[0].median_max_abs_error);
  CHECK(rows[2].median_max_abs_error < rows[1].median_max_abs_error);
  CHECK(rows[2].median_entry_mse < rows[0].median_entry_mse / 50);
  CHECK(uniform_error_sweep(sp, 1)[2].median_entry_mse == rows[2].median_entry_mse);
  sp.L = 5000;
  CHECK_THROWS_AS(uniform_error_sweep(sp), ResourceGuardError);
}

TEST_CASE("antipodal inputs have small kernel values") {
  const auto g = sample_qkv(RngStream(1, 0), 64, 16, InputFamily::Gaussian);
  const auto a = sample_qkv(RngStream(1, 0), 64, 16, InputFamily::Antipodal);
  CHECK(a.v == g.v);
  double mean_g = 0, mean_a = 0;
  for (std::size_t i = 0; i < 64; ++i)
    for (std::size_t j = 0; j < 64; ++j) {
      mean_g += dot(g.q.row(i), g.k.row(j)) / 4.0;
      mean_a += dot(a.q.row(i), a.k.row(j)) / 4.0;
    }
  mean_g /= 64 * 64;
  mean_a /= 64 * 64;
  CHECK(mean_a < mean_g - 3.0);
  CHECK(mean_a < 0.0);
  CHECK(parse_input_family("antipodal") == InputFamily::Antipodal);
  CHECK_THROWS_AS(parse_input_family("uniform"), InvalidArgument);
}
