#include "favor/inputs.hpp"

#include <cmath>
#include <string>

#include "favor/errors.hpp"
#include "favor/sampling.hpp"

namespace favor {

std::string_view to_string(InputFamily f) {
  return f == InputFamily::Gaussian ? "gaussian" : "antipodal";
}

InputFamily parse_input_family(std::string_view name) {
  if (name == "gaussian") return InputFamily::Gaussian;
  if (name == "antipodal") return InputFamily::Antipodal;
  throw InvalidArgument("unknown input family '" + std::string(name) + "'");
}

QkvSample sample_qkv(const RngStream& stream, std::size_t L, std::size_t d, InputFamily family) {
  QkvSample s{sample_gaussian(stream.substream(0), L, d), sample_gaussian(stream.substream(1), L, d),
              sample_gaussian(stream.substream(2), L, d)};
  if (family == InputFamily::Antipodal) {
    DenseMatrix u = sample_gaussian(stream.substream(3), 1, d);
    const double shift = 2.0 * std::pow(static_cast<double>(d), 0.25);
    const double scale = shift / std::sqrt(squared_norm(u.row(0)));
    for (std::size_t i = 0; i < L; ++i) {
      for (std::size_t c = 0; c < d; ++c) {
        s.q(i, c) += scale * u(0, c);
        s.k(i, c) -= scale * u(0, c);
      }
    }
  }
  return s;
}

}  // namespace favor
