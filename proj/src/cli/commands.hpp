#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "favor/csv.hpp"

namespace favor::cli {

struct CommonOptions {
  std::uint64_t seed = 42;
  std::size_t threads = 1;
  std::string out;
  std::string csv_header = "on";
};

struct CompareOptions {
  std::size_t L = 256;
  std::size_t d = 16;
  std::size_t m = 256;
  std::string variant = "pos";
  std::string ortho = "gs";
  std::string direction = "bi";
  std::string inputs = "gaussian";
  std::optional<double> stabilizer;
  std::size_t seeds = 15;
};

struct MseValidateOptions {
  std::size_t d = 16;
  std::size_t m = 1;
  std::size_t trials = 100000;
  std::string variant = "all";
};

struct OrthoGapOptions {
  std::size_t d = 16;
  std::vector<std::size_t> m_list = {2, 4, 8};
  std::size_t points = 10;
  std::size_t trials = 200000;
  double radius = 1.0;
};

struct SmregCheckOptions {
  std::vector<std::size_t> dims = {2, 4, 16, 64};
  std::size_t points = 1000;
  double radius = 3.0;
};

struct BenchOptions {
  std::vector<std::size_t> lengths = {1024, 2048, 4096, 8192};
  std::vector<std::size_t> exact_lengths = {256, 512, 1024, 2048};
  std::size_t d = 64;
  std::size_t m = 256;
  std::string variant = "pos";
  std::string ortho = "gs";
  std::string direction = "bi";
  std::size_t repeats = 5;
  std::size_t exact_cap = std::size_t{1} << 14;
};

struct FeaturesDumpOptions {
  std::string variant = "pos";
  std::string ortho = "gs";
  std::size_t m = 8;
  std::size_t d = 4;
  std::size_t rows = 4;
  std::string input;
  bool scale_inputs = false;
};

// Each command writes CSV through `csv` and returns a process exit code.
int attention_compare(const CommonOptions&, const CompareOptions&, CsvWriter& csv, std::ostream& err);
int mse_validate(const CommonOptions&, const MseValidateOptions&, CsvWriter& csv, std::ostream& err);
int ortho_gap(const CommonOptions&, const OrthoGapOptions&, CsvWriter& csv, std::ostream& err);
int smreg_check(const CommonOptions&, const SmregCheckOptions&, CsvWriter& csv, std::ostream& err);
int bench(const CommonOptions&, const BenchOptions&, CsvWriter& csv, std::ostream& err);
int features_dump(const CommonOptions&, const FeaturesDumpOptions&, CsvWriter& csv, std::ostream& err);

// The fixed (|x|, |y|, angle) grid used by mse-validate: 4 norm pairs x 5 angles.
struct GridPoint {
  double norm_x;
  double norm_y;
  double angle;
};
std::vector<GridPoint> mse_validation_grid();

}  // namespace favor::cli
