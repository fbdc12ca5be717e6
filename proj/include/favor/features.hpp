#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

#include "favor/matrix.hpp"
#include "favor/rng.hpp"

namespace favor {

// Kernel variants expressible as phi(x) = h(x)/sqrt(m) (f_1(w^T x), ..., f_l(w^T x)).
enum class FeatureVariant {
  TrigSoftmax,      // h = exp(|x|^2/2), f = (sin, cos)
  PosSoftmax,       // h = exp(-|x|^2/2), f = exp
  HypSoftmax,       // h = exp(-|x|^2/2)/sqrt(2), f = (exp(u), exp(-u))
  SmregPos,         // PosSoftmax over projections on the sqrt(d)-sphere
  ReluGeneralized,  // h = 1, f = max(u, 0) + epsilon
  SgnAngular,       // h = 1, f = sgn
};

enum class OrthoMode { Iid, GramSchmidt };

enum class NormMode {
  GaussianMarginal,  // row norms ~ chi(d): each row marginally N(0, I_d)
  SphereSqrtD,       // every row norm is exactly sqrt(d)
};

std::string_view to_string(FeatureVariant v);
std::string_view to_string(OrthoMode m);
std::string_view to_string(NormMode m);

// Short CLI names: trig, pos, hyp, smreg, relu, sgn / iid, gs.
FeatureVariant parse_variant(std::string_view name);
OrthoMode parse_ortho(std::string_view name);
std::string_view short_name(FeatureVariant v);
std::string_view short_name(OrthoMode m);

// Number of f_i per projection (1 or 2).
std::size_t functions_per_projection(FeatureVariant v);

// Variants whose features are strictly positive for every finite input.
bool has_positive_features(FeatureVariant v);

// Variants that estimate the (regular or regularized) softmax kernel.
bool approximates_softmax(FeatureVariant v);

struct FeatureMapSpec {
  FeatureVariant variant = FeatureVariant::PosSoftmax;
  std::size_t m = 256;
  OrthoMode ortho = OrthoMode::GramSchmidt;
  double kernel_epsilon = 0.0;
  // Multiply inputs by d^{-1/4} before projecting, so that phi(q)^T phi(k)
  // estimates exp(q^T k / sqrt(d)).
  bool scale_by_d_quarter = false;

  // Defaults: kernel_epsilon = 1e-3 for ReLU, 0 otherwise.
  static FeatureMapSpec make(FeatureVariant variant, std::size_t m, OrthoMode ortho,
                             bool scale_by_d_quarter = false);

  // Output feature dimension r (m or 2m).
  std::size_t feature_dim() const { return m * functions_per_projection(variant); }

  void validate() const;
};

struct ProjectionEnsemble {
  DenseMatrix omega;  // m x d, one projection per row
  OrthoMode ortho_mode = OrthoMode::Iid;
  std::vector<std::size_t> block_boundaries;  // first row of each orthogonal block
  RngStream seed_record;
  NormMode norm_mode = NormMode::GaussianMarginal;
  FeatureMapSpec spec;

  std::size_t m() const { return omega.rows(); }
  std::size_t d() const { return omega.cols(); }
};

// Samples the m x d projection matrix. Gram-Schmidt mode orthogonalizes
// directions inside consecutive blocks of d rows (the last block may be
// shorter), each block from its own substream, then gives every row an
// independent chi(d) norm, or norm sqrt(d) for SmregPos.
ProjectionEnsemble build_ensemble(const FeatureMapSpec& spec, std::size_t d, const RngStream& rng);

// Maps every row of x to phi(x). Result is x.rows() x spec.feature_dim().
// Throws OverflowError when exp(|x|^2/2) or a feature leaves the double range.
DenseMatrix apply_feature_map(const FeatureMapSpec& spec, const ProjectionEnsemble& ensemble,
                              const DenseMatrix& x);

// Fresh ensemble for the same spec and dimension, drawn from `rng`.
ProjectionEnsemble redraw(const ProjectionEnsemble& ensemble, const RngStream& rng);

}  // namespace favor
