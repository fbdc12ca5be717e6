#include "favor/cli.hpp"

#include <algorithm>
#include <fstream>
#include <functional>
#include <memory>

#include <CLI11.hpp>
#include "commands.hpp"
#include "favor/errors.hpp"

namespace favor::cli {

namespace {

void add_common(CLI::App& sub, CommonOptions& common) {
  sub.add_option("--seed", common.seed, "Master seed")->capture_default_str();
  sub.add_option("--threads", common.threads, "Worker threads (output does not depend on it)")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  sub.add_option("--out", common.out, "Output path (default: standard output)");
  sub.add_option("--csv-header", common.csv_header, "Emit the CSV header row")
      ->check(CLI::IsMember({"on", "off"}))
      ->capture_default_str();
}

const std::vector<std::string> kVariants = {"trig", "pos", "hyp", "smreg", "relu", "sgn"};
const std::vector<std::string> kOrthos = {"iid", "gs"};
const std::vector<std::string> kDirections = {"bi", "uni", "bidirectional", "unidirectional"};

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Random-feature softmax kernel estimators and linear attention", "favorlab"};
  app.require_subcommand(1);
  app.fallthrough(false);

  CommonOptions common;
  std::function<int(CsvWriter&)> action;

  CompareOptions compare;
  auto* cmp = app.add_subcommand("attention-compare", "FAVOR output vs exact attention, one row per seed");
  add_common(*cmp, common);
  cmp->add_option("--L", compare.L, "Sequence length")->capture_default_str();
  cmp->add_option("--d", compare.d, "Query/key dimension")->capture_default_str();
  cmp->add_option("--m", compare.m, "Number of random projections")->capture_default_str();
  cmp->add_option("--variant", compare.variant)->check(CLI::IsMember(kVariants))->capture_default_str();
  cmp->add_option("--ortho", compare.ortho)->check(CLI::IsMember(kOrthos))->capture_default_str();
  cmp->add_option("--direction", compare.direction)->check(CLI::IsMember(kDirections))->capture_default_str();
  cmp->add_option("--inputs", compare.inputs, "Input family")
      ->check(CLI::IsMember({"gaussian", "antipodal"}))
      ->capture_default_str();
  cmp->add_option("--stabilizer", compare.stabilizer, "Added to the renormalizer (default per variant)");
  cmp->add_option("--seeds", compare.seeds, "Runs; run i uses seed + i")->capture_default_str();
  cmp->callback([&] { action = [&](CsvWriter& csv) { return attention_compare(common, compare, csv, err); }; });

  MseValidateOptions mse;
  auto* mv = app.add_subcommand("mse-validate", "Empirical MSE vs closed forms on a 20-point grid");
  add_common(*mv, common);
  mv->add_option("--d", mse.d)->capture_default_str();
  mv->add_option("--m", mse.m)->capture_default_str();
  mv->add_option("--trials", mse.trials)->capture_default_str();
  mv->add_option("--variant", mse.variant)
      ->check(CLI::IsMember({"all", "trig", "pos", "hyp"}))
      ->capture_default_str();
  mv->callback([&] { action = [&](CsvWriter& csv) { return mse_validate(common, mse, csv, err); }; });

  OrthoGapOptions gap;
  auto* og = app.add_subcommand("ortho-gap", "Orthogonal vs iid positive features at random points");
  add_common(*og, common);
  og->add_option("--d", gap.d)->capture_default_str();
  og->add_option("--m", gap.m_list, "Comma-separated projection counts")->delimiter(',')->capture_default_str();
  og->add_option("--points", gap.points)->capture_default_str();
  og->add_option("--trials", gap.trials)->capture_default_str();
  og->add_option("--radius", gap.radius, "Points are drawn uniformly in this ball")->capture_default_str();
  og->callback([&] { action = [&](CsvWriter& csv) { return ortho_gap(common, gap, csv, err); }; });

  SmregCheckOptions smreg;
  auto* sc = app.add_subcommand("smreg-check", "Regularized softmax kernel never exceeds the softmax kernel");
  add_common(*sc, common);
  sc->add_option("--d,--dims", smreg.dims, "Comma-separated dimensions")->delimiter(',')->capture_default_str();
  sc->add_option("--points", smreg.points, "Random points per dimension")->capture_default_str();
  sc->add_option("--radius", smreg.radius, "Norms are uniform in [0, radius]")->capture_default_str();
  sc->callback([&] { action = [&](CsvWriter& csv) { return smreg_check(common, smreg, csv, err); }; });

  BenchOptions bopt;
  auto* bn = app.add_subcommand("bench", "Wall time and memory estimates vs sequence length");
  add_common(*bn, common);
  bn->add_option("--L,--lengths", bopt.lengths, "FAVOR lengths")->delimiter(',')->capture_default_str();
  bn->add_option("--exact-lengths", bopt.exact_lengths, "Exact attention lengths")
      ->delimiter(',')
      ->capture_default_str();
  bn->add_option("--d", bopt.d)->capture_default_str();
  bn->add_option("--m", bopt.m)->capture_default_str();
  bn->add_option("--variant", bopt.variant)->check(CLI::IsMember(kVariants))->capture_default_str();
  bn->add_option("--ortho", bopt.ortho)->check(CLI::IsMember(kOrthos))->capture_default_str();
  bn->add_option("--direction", bopt.direction)->check(CLI::IsMember(kDirections))->capture_default_str();
  bn->add_option("--repeats", bopt.repeats, "Timed repeats after one warmup")
      ->check(CLI::Range(std::size_t{5}, std::size_t{1000}))
      ->capture_default_str();
  bn->add_option("--exact-cap", bopt.exact_cap, "Refuse exact attention above this length")
      ->capture_default_str();
  bn->callback([&] { action = [&](CsvWriter& csv) { return bench(common, bopt, csv, err); }; });

  FeaturesDumpOptions dump;
  auto* fd = app.add_subcommand("features-dump", "Write a projection ensemble and mapped features");
  add_common(*fd, common);
  fd->add_option("--variant", dump.variant)->check(CLI::IsMember(kVariants))->capture_default_str();
  fd->add_option("--ortho", dump.ortho)->check(CLI::IsMember(kOrthos))->capture_default_str();
  fd->add_option("--m", dump.m)->capture_default_str();
  fd->add_option("--d", dump.d, "Input dimension for random inputs")->capture_default_str();
  fd->add_option("--rows", dump.rows, "Number of random input rows")->capture_default_str();
  fd->add_option("--input", dump.input, "CSV of input rows (overrides --d and --rows)");
  fd->add_flag("--scale-inputs", dump.scale_inputs, "Multiply inputs by d^(-1/4) first");
  fd->callback([&] { action = [&](CsvWriter& csv) { return features_dump(common, dump, csv, err); }; });

  // CLI11 consumes arguments from the back.
  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "favorlab: " << e.what() << '\n';
    return kExitUsage;
  }

  std::unique_ptr<std::ofstream> file;
  std::ostream* sink = &out;
  if (!common.out.empty()) {
    file = std::make_unique<std::ofstream>(common.out, std::ios::binary);
    if (!*file) {
      err << "favorlab: cannot open --out '" << common.out << "'\n";
      return kExitUsage;
    }
    sink = file.get();
  }
  CsvWriter csv(*sink, common.csv_header == "on");

  try {
    const int code = action(csv);
    sink->flush();
    return code;
  } catch (const NonPositiveRenormalizerError& e) {
    err << "favorlab: " << e.what() << '\n';
    return kExitNumerical;
  } catch (const OverflowError& e) {
    err << "favorlab: " << e.what() << '\n';
    return kExitNumerical;
  } catch (const ConvergenceError& e) {
    err << "favorlab: " << e.what() << '\n';
    return kExitNumerical;
  } catch (const ResourceGuardError& e) {
    err << "favorlab: " << e.what() << '\n';
    return kExitResource;
  } catch (const InvalidArgument& e) {
    err << "favorlab: " << e.what() << '\n';
    return kExitUsage;
  } catch (const std::exception& e) {
    err << "favorlab: " << e.what() << '\n';
    return kExitFailure;
  }
}

}  // namespace favor::cli
