#include "commands.hpp"

#include <algorithm>
#include <charconv>
#include <chrono>
#include <cmath>
#include <fstream>
#include <numbers>
#include <set>
#include <sstream>

#include "favor/attention.hpp"
#include "favor/cli.hpp"
#include "favor/errors.hpp"
#include "favor/estimators.hpp"
#include "favor/features.hpp"
#include "favor/inputs.hpp"
#include "favor/kernels.hpp"
#include "favor/sampling.hpp"
#include "favor/summary.hpp"

namespace favor::cli {

namespace {

using C = CsvWriter;

Direction parse_direction(const std::string& name) {
  if (name == "bi" || name == "bidirectional") return Direction::Bidirectional;
  if (name == "uni" || name == "unidirectional") return Direction::Unidirectional;
  throw InvalidArgument("unknown direction '" + name + "' (expected bi or uni)");
}

std::string_view short_name(Direction d) { return d == Direction::Bidirectional ? "bi" : "uni"; }

void require_positive(std::size_t v, const char* flag) {
  if (v == 0) throw InvalidArgument(std::string(flag) + " must be at least 1");
}

// Seed for one cell of an experiment grid.
std::uint64_t cell_seed(std::uint64_t seed, std::uint64_t a, std::uint64_t b) {
  return mix64(seed ^ mix64((a << 20) ^ b));
}

}  // namespace

// ---------------------------------------------------------------------------
// attention-compare

int attention_compare(const CommonOptions& common, const CompareOptions& opt, CsvWriter& csv,
                      std::ostream& err) {
  require_positive(opt.L, "--L");
  require_positive(opt.d, "--d");
  require_positive(opt.m, "--m");
  require_positive(opt.seeds, "--seeds");
  const FeatureVariant variant = parse_variant(opt.variant);
  const OrthoMode ortho = parse_ortho(opt.ortho);
  const Direction direction = parse_direction(opt.direction);
  const InputFamily family = parse_input_family(opt.inputs);
  AttentionConfig cfg = AttentionConfig::favor(variant, opt.m, ortho, direction);
  if (opt.stabilizer) cfg.stabilizer = *opt.stabilizer;
  cfg.validate();

  struct Outcome {
    double max_abs = 0, mse = 0, renorm_min = 0;
    int code = kExitOk;
    std::string message;
  };
  std::vector<Outcome> outcomes(opt.seeds);
  parallel_for(opt.seeds, common.threads, [&](std::size_t i) {
    const RngStream stream(common.seed + i, 0);
    const QkvSample in = sample_qkv(stream, opt.L, opt.d, family);
    Outcome& o = outcomes[i];
    try {
      const AttentionResult exact = exact_attention(in.q, in.k, in.v, direction);
      const AttentionResult approx = attention(in.q, in.k, in.v, cfg, stream.substream(4));
      o.max_abs = max_abs_diff(approx.output, exact.output);
      o.mse = mean_squared_diff(approx.output, exact.output);
      o.renorm_min = approx.renormalizer_min;
    } catch (const NonPositiveRenormalizerError& e) {
      o.code = kExitNumerical;
      o.message = e.what();
    } catch (const OverflowError& e) {
      o.code = kExitNumerical;
      o.message = e.what();
    }
  });

  csv.header({"variant", "ortho", "direction", "inputs", "L", "d", "m", "seed", "stabilizer",
              "max_abs_err", "mse", "renormalizer_min"});
  for (std::size_t i = 0; i < opt.seeds; ++i) {
    const Outcome& o = outcomes[i];
    if (o.code != kExitOk) {
      err << "attention-compare: variant " << short_name(variant) << " failed at seed "
          << common.seed + i << ": " << o.message << '\n';
      return o.code;
    }
    csv.row({C::cell(short_name(variant)), C::cell(short_name(ortho)),
             C::cell(short_name(direction)), C::cell(to_string(family)), C::cell(opt.L),
             C::cell(opt.d), C::cell(opt.m), C::cell(std::size_t{common.seed + i}),
             C::cell(cfg.stabilizer), C::cell(o.max_abs), C::cell(o.mse), C::cell(o.renorm_min)});
  }
  return kExitOk;
}

// ---------------------------------------------------------------------------
// mse-validate

std::vector<GridPoint> mse_validation_grid() {
  // |x| + |y| <= 1 keeps the fourth moment of the positive estimators within
  // reach of 1e5 samples, so the standard error of the MSE is trustworthy.
  const std::vector<std::pair<double, double>> norms = {
      {0.25, 0.25}, {0.25, 0.5}, {0.5, 0.5}, {0.25, 0.75}};
  const double pi = std::numbers::pi;
  const std::vector<double> angles = {0.0, pi / 4, pi / 2, 3 * pi / 4, pi};
  std::vector<GridPoint> grid;
  for (const auto& [nx, ny] : norms)
    for (double a : angles) grid.push_back({nx, ny, a});
  return grid;
}

int mse_validate(const CommonOptions& common, const MseValidateOptions& opt, CsvWriter& csv,
                 std::ostream&) {
  require_positive(opt.m, "--m");
  if (opt.d < 2) throw InvalidArgument("--d must be at least 2 for the angle grid");
  std::vector<FeatureVariant> variants;
  if (opt.variant == "all") {
    variants = {FeatureVariant::TrigSoftmax, FeatureVariant::PosSoftmax, FeatureVariant::HypSoftmax};
  } else {
    const FeatureVariant v = parse_variant(opt.variant);
    if (v != FeatureVariant::TrigSoftmax && v != FeatureVariant::PosSoftmax &&
        v != FeatureVariant::HypSoftmax) {
      throw InvalidArgument("mse-validate supports trig, pos, hyp or all");
    }
    variants = {v};
  }

  csv.header({"point", "variant", "norm_x", "norm_y", "angle", "m", "trials", "closed_form",
              "empirical", "std_error", "z_score", "hyp_pos_ratio", "half_one_minus_exp_neg_zsq"});
  const auto grid = mse_validation_grid();
  for (std::size_t p = 0; p < grid.size(); ++p) {
    const KernelPoint point = KernelPoint::from_polar(opt.d, grid[p].norm_x, grid[p].norm_y,
                                                      grid[p].angle);
    const double pos_closed = mse_pos_closed(point, opt.m);
    const double hyp_closed = mse_hyp_closed(point, opt.m);
    const std::string ratio = pos_closed > 0 ? C::cell(hyp_closed / pos_closed) : std::string();
    const double identity = 0.5 * -std::expm1(-point.z_sq());
    for (FeatureVariant v : variants) {
      double closed = 0.0;
      switch (v) {
        case FeatureVariant::TrigSoftmax: closed = mse_trig_closed(point, opt.m); break;
        case FeatureVariant::PosSoftmax: closed = pos_closed; break;
        default: closed = hyp_closed; break;
      }
      const TrialPlan plan{point, FeatureMapSpec::make(v, opt.m, OrthoMode::Iid), opt.trials,
                           cell_seed(common.seed, p, static_cast<std::uint64_t>(v))};
      const StatsReport report = against_mse(run_kernel_trials(plan, common.threads), closed);
      csv.row({C::cell(p), C::cell(short_name(v)), C::cell(grid[p].norm_x),
               C::cell(grid[p].norm_y), C::cell(grid[p].angle), C::cell(opt.m),
               C::cell(opt.trials), C::cell(closed), C::cell(report.empirical_mse),
               C::cell(report.std_error_of_mse), C::cell(report.z_score), ratio,
               C::cell(identity)});
    }
  }
  return kExitOk;
}

// ---------------------------------------------------------------------------
// ortho-gap

int ortho_gap(const CommonOptions& common, const OrthoGapOptions& opt, CsvWriter& csv,
              std::ostream&) {
  require_positive(opt.d, "--d");
  require_positive(opt.points, "--points");
  if (opt.m_list.empty()) throw InvalidArgument("--m: at least one value required");
  for (std::size_t m : opt.m_list) {
    if (m == 0 || m > opt.d) {
      throw InvalidArgument("--m " + std::to_string(m) + ": orthogonal features need 1 <= m <= d (d = " +
                            std::to_string(opt.d) + ")");
    }
  }
  const RngStream base(common.seed, 0);
  const DenseMatrix xs = sample_ball(base.substream(0), opt.points, opt.d, opt.radius);
  const DenseMatrix ys = sample_ball(base.substream(1), opt.points, opt.d, opt.radius);

  csv.header({"point", "m", "d", "norm_x", "norm_y", "sm", "mse_closed", "mse_iid", "mse_ort",
              "gap_bound", "combined_se", "pass"});
  bool all_pass = true;
  for (std::size_t p = 0; p < opt.points; ++p) {
    const KernelPoint point({xs.row(p).begin(), xs.row(p).end()},
                            {ys.row(p).begin(), ys.row(p).end()});
    for (std::size_t m : opt.m_list) {
      const OrthoGapResult r = ortho_gap_experiment(point, m, opt.d, opt.trials,
                                                    cell_seed(common.seed, p, m), common.threads);
      all_pass = all_pass && r.pass;
      csv.row({C::cell(p), C::cell(m), C::cell(opt.d), C::cell(std::sqrt(point.x_sq())),
               C::cell(std::sqrt(point.y_sq())), C::cell(sm_exact(point)), C::cell(r.mse_closed),
               C::cell(r.mse_iid), C::cell(r.mse_ort), C::cell(r.gap_bound),
               C::cell(r.combined_se), C::cell(r.pass)});
    }
  }
  csv.comment(std::string("all_pass,") + (all_pass ? "true" : "false"));
  return kExitOk;
}

// ---------------------------------------------------------------------------
// smreg-check

int smreg_check(const CommonOptions& common, const SmregCheckOptions& opt, CsvWriter& csv,
                std::ostream& err) {
  if (opt.dims.empty()) throw InvalidArgument("--dims: at least one dimension required");
  if (!(opt.radius >= 0.0)) throw InvalidArgument("--radius must be nonnegative");
  csv.header({"d", "kind", "norm_x", "norm_y", "angle", "sm", "smreg", "ratio", "ok"});
  std::size_t violations = 0;

  auto emit = [&](std::size_t d, std::string_view kind, const KernelPoint& p) {
    const double sm = sm_exact(p);
    const double reg = smreg_series(p);
    const double ratio = reg / sm;
    const bool ok = ratio <= 1.0 + 1e-12;
    if (!ok) ++violations;
    const double nx = std::sqrt(p.x_sq());
    const double ny = std::sqrt(p.y_sq());
    const double angle =
        nx > 0 && ny > 0 ? std::acos(std::clamp(p.inner() / (nx * ny), -1.0, 1.0)) : 0.0;
    csv.row({C::cell(d), C::cell(kind), C::cell(nx), C::cell(ny), C::cell(angle), C::cell(sm),
             C::cell(reg), C::cell(ratio), C::cell(ok)});
  };

  for (std::size_t di = 0; di < opt.dims.size(); ++di) {
    const std::size_t d = opt.dims[di];
    require_positive(d, "--dims");
    std::vector<double> zero(d, 0.0), e1(d, 0.0);
    e1[0] = 1.0;
    emit(d, "zero", KernelPoint(zero, zero));
    emit(d, "unit", KernelPoint(e1, e1));

    const RngStream stream(common.seed, d);
    const DenseMatrix gx = sample_gaussian(stream.substream(0), opt.points, d);
    const DenseMatrix gy = sample_gaussian(stream.substream(1), opt.points, d);
    PhiloxEngine radii = stream.substream(2).engine();
    for (std::size_t i = 0; i < opt.points; ++i) {
      std::vector<double> x(gx.row(i).begin(), gx.row(i).end());
      std::vector<double> y(gy.row(i).begin(), gy.row(i).end());
      const double rx = opt.radius * radii.uniform() / std::sqrt(squared_norm(x));
      const double ry = opt.radius * radii.uniform() / std::sqrt(squared_norm(y));
      for (double& v : x) v *= rx;
      for (double& v : y) v *= ry;
      emit(d, "random", KernelPoint(std::move(x), std::move(y)));
    }
  }
  csv.comment("violations," + std::to_string(violations));
  if (violations > 0) {
    err << "smreg-check: " << violations << " points with SMREG > SM\n";
    return kExitNumerical;
  }
  return kExitOk;
}

// ---------------------------------------------------------------------------
// bench

int bench(const CommonOptions& common, const BenchOptions& opt, CsvWriter& csv, std::ostream& err) {
  require_positive(opt.d, "--d");
  require_positive(opt.m, "--m");
  require_positive(opt.repeats, "--repeats");
  const FeatureVariant variant = parse_variant(opt.variant);
  const OrthoMode ortho = parse_ortho(opt.ortho);
  const Direction direction = parse_direction(opt.direction);
  for (std::size_t L : opt.exact_lengths) {
    if (L > opt.exact_cap) {
      err << "bench: refusing exact attention at L = " << L << " (cap " << opt.exact_cap << ")\n";
      return kExitResource;
    }
  }
  const AttentionConfig cfg = AttentionConfig::favor(variant, opt.m, ortho, direction);

  std::set<std::size_t> all(opt.lengths.begin(), opt.lengths.end());
  all.insert(opt.exact_lengths.begin(), opt.exact_lengths.end());
  const std::set<std::size_t> favor_set(opt.lengths.begin(), opt.lengths.end());
  const std::set<std::size_t> exact_set(opt.exact_lengths.begin(), opt.exact_lengths.end());

  // One warmup, then the median of `repeats` timed calls.
  auto time_median = [&](auto&& fn) {
    fn();
    std::vector<double> ns;
    for (std::size_t r = 0; r < opt.repeats; ++r) {
      const auto t0 = std::chrono::steady_clock::now();
      fn();
      ns.push_back(static_cast<double>(
          std::chrono::duration_cast<std::chrono::nanoseconds>(std::chrono::steady_clock::now() - t0)
              .count()));
    }
    return median(ns);
  };

  csv.header({"L", "d", "m", "mechanism", "direction", "wall_time_ns_median",
              "peak_bytes_estimate", "max_abs_err", "mse", "seed"});
  std::vector<double> favor_L, favor_t, exact_L, exact_t, opt_L, opt_t;
  for (std::size_t L : all) {
    require_positive(L, "--lengths");
    const RngStream stream(common.seed, L);
    const QkvSample in = sample_qkv(stream, L, opt.d, InputFamily::Gaussian);
    auto row = [&](std::string_view mech, std::size_t m, double ns, std::size_t bytes,
                   std::string max_abs, std::string mse) {
      csv.row({C::cell(L), C::cell(opt.d), m ? C::cell(m) : std::string(), C::cell(mech),
               C::cell(short_name(direction)), C::cell(ns), C::cell(bytes), std::move(max_abs),
               std::move(mse), C::cell(std::size_t{common.seed})});
    };

    std::optional<AttentionResult> exact;
    if (exact_set.count(L)) {
      const double ns = time_median([&] { exact = exact_attention(in.q, in.k, in.v, direction); });
      row("exact", 0, ns, exact->peak_bytes_estimate, "", "");
      exact_L.push_back(static_cast<double>(L));
      exact_t.push_back(ns);
    }
    if (favor_set.count(L)) {
      std::optional<AttentionResult> approx;
      const double ns = time_median([&] { approx = attention(in.q, in.k, in.v, cfg, stream.substream(4)); });
      std::string max_abs, mse;
      if (exact) {
        max_abs = C::cell(max_abs_diff(approx->output, exact->output));
        mse = C::cell(mean_squared_diff(approx->output, exact->output));
      }
      row("favor", opt.m, ns, approx->peak_bytes_estimate, max_abs, mse);
      favor_L.push_back(static_cast<double>(L));
      favor_t.push_back(ns);
    }
    // Identity attention that returns V: the ceiling on any speedup.
    DenseMatrix copy;
    const double ns = time_median([&] { copy = in.v; });
    row("opt", 0, ns, copy.bytes(), "", "");
    opt_L.push_back(static_cast<double>(L));
    opt_t.push_back(ns);
  }
  auto slope_row = [&](std::string_view mech, const std::vector<double>& x,
                       const std::vector<double>& y) {
    if (x.size() >= 2) csv.comment("loglog_slope," + std::string(mech) + "," + format_double(loglog_slope(x, y)));
  };
  slope_row("favor", favor_L, favor_t);
  slope_row("exact", exact_L, exact_t);
  slope_row("opt", opt_L, opt_t);
  return kExitOk;
}

// ---------------------------------------------------------------------------
// features-dump

namespace {

DenseMatrix read_input_rows(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InvalidArgument("--input: cannot open '" + path + "'");
  std::vector<double> data;
  std::size_t cols = 0, rows = 0;
  std::string line;
  bool first = true;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line[0] == '#') continue;
    std::vector<double> values;
    std::stringstream ss(line);
    std::string cell;
    bool numeric = true;
    while (std::getline(ss, cell, ',')) {
      const auto b = cell.find_first_not_of(" \t");
      const auto e = cell.find_last_not_of(" \t");
      const std::string trimmed = b == std::string::npos ? "" : cell.substr(b, e - b + 1);
      double v = 0;
      const auto res = std::from_chars(trimmed.data(), trimmed.data() + trimmed.size(), v);
      if (res.ec != std::errc() || res.ptr != trimmed.data() + trimmed.size()) {
        numeric = false;
        break;
      }
      values.push_back(v);
    }
    if (!numeric) {
      if (first) {  // header row
        first = false;
        continue;
      }
      throw InvalidArgument("--input: non-numeric row '" + line + "'");
    }
    first = false;
    if (cols == 0) cols = values.size();
    if (values.size() != cols) throw InvalidArgument("--input: ragged row '" + line + "'");
    data.insert(data.end(), values.begin(), values.end());
    ++rows;
  }
  if (rows == 0) throw InvalidArgument("--input: no data rows in '" + path + "'");
  return DenseMatrix(rows, cols, std::move(data));
}

}  // namespace

int features_dump(const CommonOptions& common, const FeaturesDumpOptions& opt, CsvWriter& csv,
                  std::ostream&) {
  require_positive(opt.m, "--m");
  FeatureMapSpec spec =
      FeatureMapSpec::make(parse_variant(opt.variant), opt.m, parse_ortho(opt.ortho), opt.scale_inputs);
  DenseMatrix x;
  if (!opt.input.empty()) {
    x = read_input_rows(opt.input);
  } else {
    require_positive(opt.d, "--d");
    require_positive(opt.rows, "--rows");
    x = sample_gaussian(RngStream(common.seed, 1), opt.rows, opt.d);
  }
  const ProjectionEnsemble ens = build_ensemble(spec, x.cols(), RngStream(common.seed, 0));
  const DenseMatrix features = apply_feature_map(spec, ens, x);

  std::string blocks;
  for (std::size_t b : ens.block_boundaries) blocks += (blocks.empty() ? "" : ";") + std::to_string(b);
  csv.comment("variant=" + std::string(to_string(spec.variant)) + " ortho=" +
              std::string(to_string(ens.ortho_mode)) + " norm_mode=" +
              std::string(to_string(ens.norm_mode)) + " m=" + std::to_string(ens.m()) +
              " d=" + std::to_string(ens.d()) + " r=" + std::to_string(spec.feature_dim()) +
              " kernel_epsilon=" + format_double(spec.kernel_epsilon) +
              " scale_by_d_quarter=" + (spec.scale_by_d_quarter ? "true" : "false"));
  csv.comment("master_seed=" + std::to_string(ens.seed_record.master_seed()) +
              " stream_id=" + std::to_string(ens.seed_record.stream_id()) + " blocks=" + blocks);
  csv.header({"kind", "row", "col", "value"});
  auto dump = [&](std::string_view kind, const DenseMatrix& mat) {
    for (std::size_t i = 0; i < mat.rows(); ++i)
      for (std::size_t j = 0; j < mat.cols(); ++j)
        csv.row({C::cell(kind), C::cell(i), C::cell(j), C::cell(mat(i, j))});
  };
  dump("omega", ens.omega);
  dump("input", x);
  dump("feature", features);
  return kExitOk;
}

}  // namespace favor::cli
