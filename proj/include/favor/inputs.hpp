#pragma once

#include <cstddef>
#include <string_view>

#include "favor/matrix.hpp"
#include "favor/rng.hpp"

namespace favor {

enum class InputFamily {
  // Q, K, V with iid N(0, 1) entries.
  Gaussian,
  // Q = G + c u, K = G' - c u for a random unit u and c = 2 d^{1/4}: after the
  // 1/sqrt(d) attention scaling every query-key inner product is shifted by
  // -4, so kernel values are small. V stays standard normal.
  Antipodal,
};

std::string_view to_string(InputFamily f);
InputFamily parse_input_family(std::string_view name);

struct QkvSample {
  DenseMatrix q;
  DenseMatrix k;
  DenseMatrix v;
};

QkvSample sample_qkv(const RngStream& stream, std::size_t L, std::size_t d, InputFamily family);

}  // namespace favor
