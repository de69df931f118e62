#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <string_view>

#include "tlb/numerics/tensor.hpp"

namespace tlb {

// Binary container for named tensors:
//
//   "TLBCKPT\0"               8-byte magic
//   u32 version               currently 1
//   u64 header length, bytes  free-form UTF-8 (JSON config in practice)
//   u32 tensor count
//   per tensor, sorted by name:
//     u32 name length, bytes
//     u32 rank, u64 dims[rank]
//     f64 values[prod(dims)]
//
// All integers and reals are little-endian; reals are IEEE-754 binary64, so a
// save/load round trip is bit-exact.
struct Checkpoint {
  std::string header;
  std::map<std::string, Tensor> tensors;

  friend bool operator==(const Checkpoint&, const Checkpoint&) = default;
};

inline constexpr std::uint32_t kCheckpointVersion = 1;

std::string encode_checkpoint(const Checkpoint& ckpt);
Checkpoint decode_checkpoint(std::string_view bytes);

void save_checkpoint(const std::filesystem::path& path, const Checkpoint& ckpt);
Checkpoint load_checkpoint(const std::filesystem::path& path);

}  // namespace tlb
