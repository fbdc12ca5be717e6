#include "favor/attention.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include "favor/errors.hpp"
#include "favor/linalg.hpp"

namespace favor {

namespace {

using Clock = std::chrono::steady_clock;

// Cap on the non-streaming prefix tensor (L x r x (dv+1) doubles).
constexpr std::size_t kMaxPrefixTensorBytes = std::size_t{1} << 31;

void check_qkv(const DenseMatrix& q, const DenseMatrix& k, const DenseMatrix& v, const char* op) {
  if (q.rows() == 0 || q.cols() == 0) {
    throw ShapeError(std::string(op) + ": empty query matrix " + q.shape_string());
  }
  if (k.rows() != q.rows() || v.rows() != q.rows()) {
    throw ShapeError(std::string(op) + ": sequence lengths differ, Q " + q.shape_string() +
                     ", K " + k.shape_string() + ", V " + v.shape_string());
  }
  if (k.cols() != q.cols()) {
    throw ShapeError(std::string(op) + ": Q " + q.shape_string() + " and K " + k.shape_string() +
                     " differ in feature dimension");
  }
  if (v.cols() == 0) throw ShapeError(std::string(op) + ": V has no columns");
}

void check_length_guard(std::size_t rows, const char* op) {
  if (rows > kMaxMaterializedLength) {
    throw ResourceGuardError(std::string(op) + ": L = " + std::to_string(rows) +
                             " exceeds the materialization cap " +
                             std::to_string(kMaxMaterializedLength));
  }
}

void check_favor_config(const AttentionConfig& cfg, const ProjectionEnsemble& ens, std::size_t d,
                        const char* op) {
  cfg.validate();
  if (cfg.mechanism != Mechanism::Favor) {
    throw InvalidArgument(std::string(op) + ": configuration selects exact attention");
  }
  if (ens.d() != d) {
    throw ShapeError(std::string(op) + ": ensemble dimension " + std::to_string(ens.d()) +
                     " does not match query dimension " + std::to_string(d));
  }
}

// Divides buf2[:, :dv] row-wise by buf2[:, dv] + stabilizer.
AttentionResult renormalize(const DenseMatrix& buf2, const AttentionConfig& cfg) {
  const std::size_t dv = buf2.cols() - 1;
  AttentionResult result;
  result.output = DenseMatrix(buf2.rows(), dv);
  result.renormalizer_min = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < buf2.rows(); ++i) {
    const double buf4 = buf2(i, dv);
    result.renormalizer_min = std::min(result.renormalizer_min, buf4);
    const double denom = buf4 + cfg.stabilizer;
    if (!(denom > 0.0)) {
      throw NonPositiveRenormalizerError(std::string(to_string(cfg.feature_spec.variant)), i,
                                         denom);
    }
    const double inv = 1.0 / denom;
    auto dst = result.output.row(i);
    for (std::size_t c = 0; c < dv; ++c) dst[c] = buf2(i, c) * inv;
  }
  if (!result.output.all_finite()) throw OverflowError("FAVOR attention: non-finite output");
  return result;
}

// Row i of the result is q'_i^T S for the (r x (dv+1)) prefix state S.
void contract_row(std::span<const double> qp, const double* state, std::size_t width,
                  std::span<double> dst) {
  std::fill(dst.begin(), dst.end(), 0.0);
  for (std::size_t a = 0; a < qp.size(); ++a) {
    const double s = qp[a];
    const double* src = state + a * width;
    for (std::size_t c = 0; c < width; ++c) dst[c] += s * src[c];
  }
}

// S += k'_j [v_j | 1]^T
void accumulate_outer(std::span<const double> kp, std::span<const double> v, double* state) {
  const std::size_t width = v.size() + 1;
  for (std::size_t a = 0; a < kp.size(); ++a) {
    const double s = kp[a];
    double* dst = state + a * width;
    for (std::size_t c = 0; c < v.size(); ++c) dst[c] += s * v[c];
    dst[v.size()] += s;
  }
}

}  // namespace

std::string_view to_string(Mechanism m) { return m == Mechanism::Exact ? "exact" : "favor"; }

std::string_view to_string(Direction d) {
  return d == Direction::Bidirectional ? "bidirectional" : "unidirectional";
}

AttentionConfig AttentionConfig::favor(FeatureVariant variant, std::size_t m, OrthoMode ortho,
                                       Direction direction) {
  AttentionConfig cfg;
  cfg.mechanism = Mechanism::Favor;
  cfg.direction = direction;
  cfg.feature_spec = FeatureMapSpec::make(variant, m, ortho, /*scale_by_d_quarter=*/true);
  cfg.stabilizer =
      variant == FeatureVariant::ReluGeneralized ? kReluStabilizer : kSoftmaxStabilizer;
  return cfg;
}

void AttentionConfig::validate() const {
  if (!(stabilizer >= 0.0) || !std::isfinite(stabilizer)) {
    throw InvalidArgument("AttentionConfig: stabilizer must be finite and nonnegative");
  }
  if (mechanism == Mechanism::Favor) feature_spec.validate();
}

AttentionResult exact_attention(const DenseMatrix& q, const DenseMatrix& k, const DenseMatrix& v,
                                Direction direction) {
  check_qkv(q, k, v, "exact_attention");
  check_length_guard(q.rows(), "exact_attention");
  const auto start = Clock::now();
  const std::size_t L = q.rows();
  const std::size_t dv = v.cols();
  const bool causal = direction == Direction::Unidirectional;
  const double scale = 1.0 / std::sqrt(static_cast<double>(q.cols()));

  DenseMatrix a(L, L);
  for (std::size_t i = 0; i < L; ++i) {
    const std::size_t limit = causal ? i + 1 : L;
    const auto qi = q.row(i);
    for (std::size_t j = 0; j < limit; ++j) {
      const double e = std::exp(dot(qi, k.row(j)) * scale);
      if (!std::isfinite(e)) {
        throw OverflowError("exact_attention: exp(q^T k / sqrt(d)) overflowed at (" +
                            std::to_string(i) + ", " + std::to_string(j) + ")");
      }
      a(i, j) = e;
    }
  }

  AttentionResult result;
  result.output = DenseMatrix(L, dv);
  result.renormalizer_min = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < L; ++i) {
    const std::size_t limit = causal ? i + 1 : L;
    const auto ai = a.row(i);
    auto dst = result.output.row(i);
    double rowsum = 0.0;
    for (std::size_t j = 0; j < limit; ++j) {
      rowsum += ai[j];
      const auto vj = v.row(j);
      for (std::size_t c = 0; c < dv; ++c) dst[c] += ai[j] * vj[c];
    }
    result.renormalizer_min = std::min(result.renormalizer_min, rowsum);
    if (!(rowsum > 0.0)) {
      throw NonPositiveRenormalizerError("EXACT", i, rowsum);
    }
    for (double& x : dst) x /= rowsum;
  }
  if (!result.output.all_finite()) throw OverflowError("exact_attention: non-finite output");
  result.wall_time = Clock::now() - start;
  result.peak_bytes_estimate = a.bytes() + L * sizeof(double) + result.output.bytes();
  return result;
}

AttentionResult favor_bidirectional(const DenseMatrix& q, const DenseMatrix& k, const DenseMatrix& v,
                                    const AttentionConfig& cfg, const ProjectionEnsemble& ensemble) {
  check_qkv(q, k, v, "favor_bidirectional");
  check_favor_config(cfg, ensemble, q.cols(), "favor_bidirectional");
  const auto start = Clock::now();

  const DenseMatrix qp = apply_feature_map(cfg.feature_spec, ensemble, q);
  const DenseMatrix kp = apply_feature_map(cfg.feature_spec, ensemble, k);
  const std::size_t r = qp.cols();
  const std::size_t dv = v.cols();

  // buf1 = (K')^T [V | 1], r x (dv+1)
  DenseMatrix buf1(r, dv + 1);
  for (std::size_t j = 0; j < kp.rows(); ++j) accumulate_outer(kp.row(j), v.row(j), buf1.row(0).data());
  // buf2 = Q' buf1, L x (dv+1)
  const DenseMatrix buf2 = matmul(qp, buf1);

  AttentionResult result = renormalize(buf2, cfg);
  result.wall_time = Clock::now() - start;
  result.peak_bytes_estimate = ensemble.omega.bytes() + qp.bytes() + kp.bytes() + buf1.bytes() +
                               buf2.bytes() + result.output.bytes();
  return result;
}

AttentionResult favor_bidirectional(const DenseMatrix& q, const DenseMatrix& k, const DenseMatrix& v,
                                    const AttentionConfig& cfg, const RngStream& rng) {
  cfg.validate();
  return favor_bidirectional(q, k, v, cfg, build_ensemble(cfg.feature_spec, q.cols(), rng));
}

AttentionResult favor_unidirectional(const DenseMatrix& q, const DenseMatrix& k,
                                     const DenseMatrix& v, const AttentionConfig& cfg,
                                     const ProjectionEnsemble& ensemble) {
  check_qkv(q, k, v, "favor_unidirectional");
  check_favor_config(cfg, ensemble, q.cols(), "favor_unidirectional");
  const auto start = Clock::now();

  const DenseMatrix qp = apply_feature_map(cfg.feature_spec, ensemble, q);
  const DenseMatrix kp = apply_feature_map(cfg.feature_spec, ensemble, k);
  const std::size_t L = q.rows();
  const std::size_t r = qp.cols();
  const std::size_t width = v.cols() + 1;
  const std::size_t slice = r * width;

  DenseMatrix buf2(L, width);
  std::size_t prefix_bytes = 0;
  if (cfg.streaming_prefix) {
    std::vector<double> state(slice, 0.0);
    for (std::size_t i = 0; i < L; ++i) {
      accumulate_outer(kp.row(i), v.row(i), state.data());
      contract_row(qp.row(i), state.data(), width, buf2.row(i));
    }
    prefix_bytes = slice * sizeof(double);
  } else {
    if (L * slice > kMaxPrefixTensorBytes / sizeof(double)) {
      throw ResourceGuardError("favor_unidirectional: prefix tensor of " +
                               std::to_string(L * slice * sizeof(double)) +
                               " bytes exceeds the cap; use streaming_prefix");
    }
    // G^PS, L slices of r x (dv+1); slice i = slice i-1 + k'_i [v_i | 1]^T.
    std::vector<double> prefix(L * slice, 0.0);
    for (std::size_t i = 0; i < L; ++i) {
      double* cur = prefix.data() + i * slice;
      if (i > 0) std::copy_n(cur - slice, slice, cur);
      accumulate_outer(kp.row(i), v.row(i), cur);
    }
    for (std::size_t i = 0; i < L; ++i) {
      contract_row(qp.row(i), prefix.data() + i * slice, width, buf2.row(i));
    }
    prefix_bytes = prefix.size() * sizeof(double);
  }

  AttentionResult result = renormalize(buf2, cfg);
  result.wall_time = Clock::now() - start;
  result.peak_bytes_estimate = ensemble.omega.bytes() + qp.bytes() + kp.bytes() + prefix_bytes +
                               buf2.bytes() + result.output.bytes();
  return result;
}

AttentionResult favor_unidirectional(const DenseMatrix& q, const DenseMatrix& k,
                                     const DenseMatrix& v, const AttentionConfig& cfg,
                                     const RngStream& rng) {
  cfg.validate();
  return favor_unidirectional(q, k, v, cfg, build_ensemble(cfg.feature_spec, q.cols(), rng));
}

AttentionResult attention(const DenseMatrix& q, const DenseMatrix& k, const DenseMatrix& v,
                          const AttentionConfig& cfg, const RngStream& rng) {
  if (cfg.mechanism == Mechanism::Exact) return exact_attention(q, k, v, cfg.direction);
  return cfg.direction == Direction::Bidirectional ? favor_bidirectional(q, k, v, cfg, rng)
                                                   : favor_unidirectional(q, k, v, cfg, rng);
}

DenseMatrix approx_attention_matrix(const DenseMatrix& q, const DenseMatrix& k,
                                    const AttentionConfig& cfg, const ProjectionEnsemble& ensemble) {
  check_length_guard(std::max(q.rows(), k.rows()), "approx_attention_matrix");
  if (q.cols() != k.cols()) {
    throw ShapeError("approx_attention_matrix: Q " + q.shape_string() + " vs K " +
                     k.shape_string());
  }
  check_favor_config(cfg, ensemble, q.cols(), "approx_attention_matrix");
  const DenseMatrix qp = apply_feature_map(cfg.feature_spec, ensemble, q);
  const DenseMatrix kp = apply_feature_map(cfg.feature_spec, ensemble, k);
  return matmul_transposed(qp, kp);
}

DenseMatrix approx_attention_matrix(const DenseMatrix& q, const DenseMatrix& k,
                                    const AttentionConfig& cfg, const RngStream& rng) {
  cfg.validate();
  return approx_attention_matrix(q, k, cfg, build_ensemble(cfg.feature_spec, q.cols(), rng));
}

DenseMatrix exact_attention_matrix(const DenseMatrix& q, const DenseMatrix& k) {
  check_length_guard(std::max(q.rows(), k.rows()), "exact_attention_matrix");
  DenseMatrix a = matmul_transposed(q, k);
  const double scale = 1.0 / std::sqrt(static_cast<double>(q.cols()));
  for (double& x : a.values()) {
    x = std::exp(x * scale);
    if (!std::isfinite(x)) throw OverflowError("exact_attention_matrix: exp overflowed");
  }
  return a;
}

FavorAttention::FavorAttention(AttentionConfig cfg, std::size_t d, std::uint64_t master_seed)
    : cfg_(std::move(cfg)), d_(d), master_seed_(master_seed) {
  cfg_.validate();
  if (cfg_.mechanism != Mechanism::Favor) {
    throw InvalidArgument("FavorAttention: configuration selects exact attention");
  }
  ensemble_ = build_ensemble(cfg_.feature_spec, d_, RngStream(master_seed_, 0));
}

void FavorAttention::before_call() {
  if (cfg_.redraw_every > 0 && calls_ > 0 && calls_ % cfg_.redraw_every == 0) {
    ++redraws_;
    ensemble_ = redraw(ensemble_, RngStream(master_seed_, redraws_));
  }
  ++calls_;
}

AttentionResult FavorAttention::forward(const DenseMatrix& q, const DenseMatrix& k,
                                        const DenseMatrix& v) {
  before_call();
  return cfg_.direction == Direction::Bidirectional
             ? favor_bidirectional(q, k, v, cfg_, ensemble_)
             : favor_unidirectional(q, k, v, cfg_, ensemble_);
}

DenseMatrix FavorAttention::kernel_matrix(const DenseMatrix& q, const DenseMatrix& k) {
  before_call();
  return approx_attention_matrix(q, k, cfg_, ensemble_);
}

}  // namespace favor
