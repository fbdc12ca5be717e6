#include "favor/sampling.hpp"

#include <cmath>

#include "favor/errors.hpp"

namespace favor {

DenseMatrix sample_gaussian(const RngStream& stream, std::size_t rows, std::size_t cols) {
  if (rows == 0 || cols == 0) {
    throw InvalidArgument("sample_gaussian: zero dimension " + std::to_string(rows) + "x" +
                          std::to_string(cols));
  }
  DenseMatrix out(rows, cols);
  NormalSampler normal(stream.engine());
  for (double& v : out.values()) v = normal();
  return out;
}

std::vector<double> chi_norms(const RngStream& stream, std::size_t m, std::size_t d) {
  if (m == 0 || d == 0) {
    throw InvalidArgument("chi_norms: zero dimension m=" + std::to_string(m) +
                          " d=" + std::to_string(d));
  }
  NormalSampler normal(stream.engine());
  std::vector<double> norms(m);
  for (double& r : norms) {
    double acc = 0.0;
    for (std::size_t k = 0; k < d; ++k) {
      const double g = normal();
      acc += g * g;
    }
    r = std::sqrt(acc);
  }
  return norms;
}

}  // namespace favor
