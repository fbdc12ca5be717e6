#include "favor/features.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "favor/errors.hpp"
#include "favor/linalg.hpp"
#include "favor/sampling.hpp"

namespace favor {

namespace {

// Substream tags used by build_ensemble.
constexpr std::uint64_t kDirectionStream = 0;
constexpr std::uint64_t kNormStream = 1;

const double kMaxExpArgument = std::log(std::numeric_limits<double>::max());

void scale_row_to(std::span<double> row, double target_norm) {
  const double n = std::sqrt(squared_norm(row));
  if (n == 0.0) throw InvalidArgument("build_ensemble: zero-norm projection row");
  const double f = target_norm / n;
  for (double& v : row) v *= f;
}

}  // namespace

std::string_view to_string(FeatureVariant v) {
  switch (v) {
    case FeatureVariant::TrigSoftmax: return "TRIG_SOFTMAX";
    case FeatureVariant::PosSoftmax: return "POS_SOFTMAX";
    case FeatureVariant::HypSoftmax: return "HYP_SOFTMAX";
    case FeatureVariant::SmregPos: return "SMREG_POS";
    case FeatureVariant::ReluGeneralized: return "RELU_GENERALIZED";
    case FeatureVariant::SgnAngular: return "SGN_ANGULAR";
  }
  return "?";
}

std::string_view to_string(OrthoMode m) {
  return m == OrthoMode::Iid ? "IID" : "GRAM_SCHMIDT";
}

std::string_view to_string(NormMode m) {
  return m == NormMode::GaussianMarginal ? "GAUSSIAN_MARGINAL" : "SPHERE_SQRT_D";
}

std::string_view short_name(FeatureVariant v) {
  switch (v) {
    case FeatureVariant::TrigSoftmax: return "trig";
    case FeatureVariant::PosSoftmax: return "pos";
    case FeatureVariant::HypSoftmax: return "hyp";
    case FeatureVariant::SmregPos: return "smreg";
    case FeatureVariant::ReluGeneralized: return "relu";
    case FeatureVariant::SgnAngular: return "sgn";
  }
  return "?";
}

std::string_view short_name(OrthoMode m) { return m == OrthoMode::Iid ? "iid" : "gs"; }

FeatureVariant parse_variant(std::string_view name) {
  for (auto v : {FeatureVariant::TrigSoftmax, FeatureVariant::PosSoftmax,
                 FeatureVariant::HypSoftmax, FeatureVariant::SmregPos,
                 FeatureVariant::ReluGeneralized, FeatureVariant::SgnAngular}) {
    if (name == short_name(v) || name == to_string(v)) return v;
  }
  throw InvalidArgument("unknown feature variant '" + std::string(name) + "'");
}

OrthoMode parse_ortho(std::string_view name) {
  if (name == "iid" || name == "IID") return OrthoMode::Iid;
  if (name == "gs" || name == "GRAM_SCHMIDT") return OrthoMode::GramSchmidt;
  throw InvalidArgument("unknown ortho mode '" + std::string(name) + "'");
}

std::size_t functions_per_projection(FeatureVariant v) {
  return (v == FeatureVariant::TrigSoftmax || v == FeatureVariant::HypSoftmax) ? 2 : 1;
}

bool has_positive_features(FeatureVariant v) {
  return v == FeatureVariant::PosSoftmax || v == FeatureVariant::HypSoftmax ||
         v == FeatureVariant::SmregPos || v == FeatureVariant::ReluGeneralized;
}

bool approximates_softmax(FeatureVariant v) {
  return v == FeatureVariant::TrigSoftmax || v == FeatureVariant::PosSoftmax ||
         v == FeatureVariant::HypSoftmax || v == FeatureVariant::SmregPos;
}

FeatureMapSpec FeatureMapSpec::make(FeatureVariant variant, std::size_t m, OrthoMode ortho,
                                    bool scale_by_d_quarter) {
  FeatureMapSpec spec;
  spec.variant = variant;
  spec.m = m;
  spec.ortho = ortho;
  spec.kernel_epsilon = variant == FeatureVariant::ReluGeneralized ? 1e-3 : 0.0;
  spec.scale_by_d_quarter = scale_by_d_quarter;
  return spec;
}

void FeatureMapSpec::validate() const {
  if (m == 0) throw InvalidArgument("FeatureMapSpec: m must be at least 1");
  if (!(kernel_epsilon >= 0.0) || !std::isfinite(kernel_epsilon)) {
    throw InvalidArgument("FeatureMapSpec: kernel_epsilon must be finite and nonnegative");
  }
}

ProjectionEnsemble build_ensemble(const FeatureMapSpec& spec, std::size_t d, const RngStream& rng) {
  spec.validate();
  if (d == 0) throw InvalidArgument("build_ensemble: d must be at least 1");

  ProjectionEnsemble ens;
  ens.spec = spec;
  ens.ortho_mode = spec.ortho;
  ens.seed_record = rng;
  ens.norm_mode =
      spec.variant == FeatureVariant::SmregPos ? NormMode::SphereSqrtD : NormMode::GaussianMarginal;
  const double sphere_radius = std::sqrt(static_cast<double>(d));

  if (spec.ortho == OrthoMode::Iid) {
    ens.omega = sample_gaussian(rng.substream(kDirectionStream), spec.m, d);
    ens.block_boundaries = {0};
    if (ens.norm_mode == NormMode::SphereSqrtD) {
      for (std::size_t i = 0; i < spec.m; ++i) scale_row_to(ens.omega.row(i), sphere_radius);
    }
    return ens;
  }

  ens.omega = DenseMatrix(spec.m, d);
  const RngStream directions = rng.substream(kDirectionStream);
  for (std::size_t start = 0, block = 0; start < spec.m; start += d, ++block) {
    const std::size_t rows = std::min(d, spec.m - start);
    const DenseMatrix q =
        gram_schmidt_directions(sample_gaussian(directions.substream(block), rows, d));
    for (std::size_t i = 0; i < rows; ++i) {
      std::copy_n(q.row(i).begin(), d, ens.omega.row(start + i).begin());
    }
    ens.block_boundaries.push_back(start);
  }

  if (ens.norm_mode == NormMode::SphereSqrtD) {
    for (std::size_t i = 0; i < spec.m; ++i) scale_row_to(ens.omega.row(i), sphere_radius);
  } else {
    const std::vector<double> norms = chi_norms(rng.substream(kNormStream), spec.m, d);
    for (std::size_t i = 0; i < spec.m; ++i) {
      for (double& v : ens.omega.row(i)) v *= norms[i];
    }
  }
  return ens;
}

DenseMatrix apply_feature_map(const FeatureMapSpec& spec, const ProjectionEnsemble& ensemble,
                              const DenseMatrix& x) {
  spec.validate();
  const std::size_t d = ensemble.d();
  if (x.cols() != d) {
    throw ShapeError("apply_feature_map: input has " + std::to_string(x.cols()) +
                     " columns but projections have dimension " + std::to_string(d));
  }
  if (ensemble.m() != spec.m) {
    throw ShapeError("apply_feature_map: spec expects m=" + std::to_string(spec.m) +
                     " but ensemble has " + std::to_string(ensemble.m()) + " rows");
  }
  if ((spec.variant == FeatureVariant::SmregPos) !=
      (ensemble.norm_mode == NormMode::SphereSqrtD)) {
    throw InvalidArgument("apply_feature_map: SMREG_POS requires a sphere-normalized ensemble");
  }

  const DenseMatrix xs =
      spec.scale_by_d_quarter ? scaled(x, std::pow(static_cast<double>(d), -0.25)) : x;
  const DenseMatrix proj = matmul_transposed(xs, ensemble.omega);  // rows x m

  const std::size_t m = spec.m;
  const double inv_sqrt_m = 1.0 / std::sqrt(static_cast<double>(m));
  const bool uses_h = approximates_softmax(spec.variant);
  DenseMatrix out(x.rows(), spec.feature_dim());

  for (std::size_t i = 0; i < x.rows(); ++i) {
    const auto p = proj.row(i);
    auto dst = out.row(i);
    const double half_sq = 0.5 * squared_norm(xs.row(i));
    if (uses_h && half_sq > kMaxExpArgument) {
      throw OverflowError("apply_feature_map: exp(+-|x|^2/2) out of double range for row " +
                          std::to_string(i) + " (|x|^2/2 = " + std::to_string(half_sq) + ")");
    }
    switch (spec.variant) {
      case FeatureVariant::TrigSoftmax: {
        const double h = std::exp(half_sq) * inv_sqrt_m;
        for (std::size_t j = 0; j < m; ++j) {
          dst[j] = h * std::sin(p[j]);
          dst[m + j] = h * std::cos(p[j]);
        }
        break;
      }
      case FeatureVariant::PosSoftmax:
      case FeatureVariant::SmregPos:
        for (std::size_t j = 0; j < m; ++j) dst[j] = std::exp(p[j] - half_sq) * inv_sqrt_m;
        break;
      case FeatureVariant::HypSoftmax: {
        const double c = inv_sqrt_m * std::numbers::sqrt2 / 2.0;
        for (std::size_t j = 0; j < m; ++j) {
          dst[j] = std::exp(p[j] - half_sq) * c;
          dst[m + j] = std::exp(-p[j] - half_sq) * c;
        }
        break;
      }
      case FeatureVariant::ReluGeneralized:
        for (std::size_t j = 0; j < m; ++j) {
          dst[j] = (std::max(p[j], 0.0) + spec.kernel_epsilon) * inv_sqrt_m;
        }
        break;
      case FeatureVariant::SgnAngular:
        for (std::size_t j = 0; j < m; ++j) {
          dst[j] = static_cast<double>((p[j] > 0.0) - (p[j] < 0.0)) * inv_sqrt_m;
        }
        break;
    }
    for (double v : dst) {
      if (!std::isfinite(v)) {
        throw OverflowError("apply_feature_map: " + std::string(to_string(spec.variant)) +
                            " feature overflowed for row " + std::to_string(i));
      }
    }
  }
  return out;
}

ProjectionEnsemble redraw(const ProjectionEnsemble& ensemble, const RngStream& rng) {
  return build_ensemble(ensemble.spec, ensemble.d(), rng);
}

}  // namespace favor
