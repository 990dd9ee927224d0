#pragma once

#include <filesystem>
#include <string>
#include <string_view>

#include "tnet/mps.hpp"

namespace tnet {

// Binary MPS container, all integers and floats little-endian:
//   "TNMPS1"
//   u64 N, then N x (u64 D_l, u64 d, u64 D_r)
//   every site's (l, p, r) row-major values as (re, im) f64 pairs
//   u64 center (2^64 - 1 when unset)
//   u32 CRC-32 of everything between the magic and the checksum
std::string checkpoint_bytes(const MatrixProductState& psi);
MatrixProductState checkpoint_parse(std::string_view bytes);  // throws CheckpointError

void checkpoint_write(const MatrixProductState& psi, const std::filesystem::path& path);
MatrixProductState checkpoint_read(const std::filesystem::path& path);

}  // namespace tnet
