#include "tlb/numerics/encoding.hpp"

#include <cmath>

#include "tlb/error.hpp"

namespace tlb {

Tensor sinusoidal_pe(std::size_t length, std::size_t dim) {
  if (dim % 2 != 0) throw ConfigError("sinusoidal_pe: dimension must be even, got " + std::to_string(dim));
  Tensor pe({length, dim});
  for (std::size_t pos = 0; pos < length; ++pos) {
    for (std::size_t i = 0; i < dim / 2; ++i) {
      const double angle =
          static_cast<double>(pos) / std::pow(10000.0, static_cast<double>(2 * i) / static_cast<double>(dim));
      pe.at(pos, 2 * i) = std::sin(angle);
      pe.at(pos, 2 * i + 1) = std::cos(angle);
    }
  }
  return pe;
}

}  // namespace tlb
