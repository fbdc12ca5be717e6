#pragma once

#include <chrono>
#include <cstddef>
#include <optional>
#include <string_view>

#include "favor/features.hpp"
#include "favor/matrix.hpp"
#include "favor/rng.hpp"

namespace favor {

enum class Mechanism { Exact, Favor };
enum class Direction { Bidirectional, Unidirectional };

std::string_view to_string(Mechanism m);
std::string_view to_string(Direction d);

inline constexpr double kSoftmaxStabilizer = 1e-6;
inline constexpr double kReluStabilizer = 0.0;

// Largest L for which an L x L matrix may be materialized.
inline constexpr std::size_t kMaxMaterializedLength = std::size_t{1} << 14;

struct AttentionConfig {
  Mechanism mechanism = Mechanism::Favor;
  Direction direction = Direction::Bidirectional;
  FeatureMapSpec feature_spec;
  double stabilizer = kSoftmaxStabilizer;  // added to the renormalizer before inversion
  std::size_t redraw_every = 0;            // 0: never redraw
  bool streaming_prefix = true;            // O(m (d+1)) running prefix instead of the L x m x (d+1) tensor

  // FAVOR configuration with the default stabilizer for the variant and the
  // d^{-1/4} query/key scaling that matches exact_attention.
  static AttentionConfig favor(FeatureVariant variant, std::size_t m, OrthoMode ortho,
                               Direction direction = Direction::Bidirectional);

  void validate() const;
};

struct AttentionResult {
  DenseMatrix output;                  // L x dv
  double renormalizer_min = 0.0;       // min over rows of buf4, before the stabilizer
  std::chrono::nanoseconds wall_time{0};
  std::size_t peak_bytes_estimate = 0;  // analytic footprint of the working buffers
};

// Softmax attention with the L x L matrix A = exp(Q K^T / sqrt(d)),
// D^{-1} A V, or its lower-triangular (causal) form.
AttentionResult exact_attention(const DenseMatrix& q, const DenseMatrix& k, const DenseMatrix& v,
                                Direction direction);

// Q'((K')^T [V | 1]) without materializing L x L, then row-wise division by
// buf4 + stabilizer. Throws NonPositiveRenormalizerError if any divisor <= 0.
AttentionResult favor_bidirectional(const DenseMatrix& q, const DenseMatrix& k, const DenseMatrix& v,
                                    const AttentionConfig& cfg, const ProjectionEnsemble& ensemble);
AttentionResult favor_bidirectional(const DenseMatrix& q, const DenseMatrix& k, const DenseMatrix& v,
                                    const AttentionConfig& cfg, const RngStream& rng);

// Causal FAVOR by prefix sums of K'_j [V_j | 1]^T.
AttentionResult favor_unidirectional(const DenseMatrix& q, const DenseMatrix& k,
                                     const DenseMatrix& v, const AttentionConfig& cfg,
                                     const ProjectionEnsemble& ensemble);
AttentionResult favor_unidirectional(const DenseMatrix& q, const DenseMatrix& k,
                                     const DenseMatrix& v, const AttentionConfig& cfg,
                                     const RngStream& rng);

// Dispatches on cfg.mechanism and cfg.direction.
AttentionResult attention(const DenseMatrix& q, const DenseMatrix& k, const DenseMatrix& v,
                          const AttentionConfig& cfg, const RngStream& rng);

// Materialized Q' K'^T, the kernel estimates before renormalization.
// Diagnostic only; guarded by kMaxMaterializedLength.
DenseMatrix approx_attention_matrix(const DenseMatrix& q, const DenseMatrix& k,
                                    const AttentionConfig& cfg, const ProjectionEnsemble& ensemble);
DenseMatrix approx_attention_matrix(const DenseMatrix& q, const DenseMatrix& k,
                                    const AttentionConfig& cfg, const RngStream& rng);

// exp(Q K^T / sqrt(d)), unnormalized. Same guard.
DenseMatrix exact_attention_matrix(const DenseMatrix& q, const DenseMatrix& k);

// Attention layer state: holds the projection ensemble and redraws it every
// cfg.redraw_every calls. Redraw number n uses stream (master_seed, n).
class FavorAttention {
 public:
  FavorAttention(AttentionConfig cfg, std::size_t d, std::uint64_t master_seed);

  AttentionResult forward(const DenseMatrix& q, const DenseMatrix& k, const DenseMatrix& v);
  DenseMatrix kernel_matrix(const DenseMatrix& q, const DenseMatrix& k);

  const ProjectionEnsemble& ensemble() const { return ensemble_; }
  std::size_t calls() const { return calls_; }
  std::size_t redraws() const { return redraws_; }

 private:
  void before_call();

  AttentionConfig cfg_;
  std::size_t d_;
  std::uint64_t master_seed_;
  ProjectionEnsemble ensemble_;
  std::size_t calls_ = 0;
  std::size_t redraws_ = 0;
};

}  // namespace favor
