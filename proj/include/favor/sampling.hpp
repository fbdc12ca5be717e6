#pragma once

#include <cstddef>
#include <vector>

#include "favor/matrix.hpp"
#include "favor/rng.hpp"

namespace favor {

// rows x cols matrix of iid N(0, 1) entries, filled row-major from the start
// of `stream`.
DenseMatrix sample_gaussian(const RngStream& stream, std::size_t rows, std::size_t cols);

// m independent draws of ||g|| for g ~ N(0, I_d), i.e. chi with d degrees of
// freedom. Each draw is the norm of d fresh Gaussian coordinates.
std::vector<double> chi_norms(const RngStream& stream, std::size_t m, std::size_t d);

}  // namespace favor
