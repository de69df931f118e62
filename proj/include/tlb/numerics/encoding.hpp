#pragma once

#include <cstddef>

#include "tlb/numerics/tensor.hpp"

namespace tlb {

// PE[pos, 2i] = sin(pos / 10000^(2i/dim)), PE[pos, 2i+1] = cos(same).
// Throws ConfigError for odd `dim`.
Tensor sinusoidal_pe(std::size_t length, std::size_t dim);

}  // namespace tlb
