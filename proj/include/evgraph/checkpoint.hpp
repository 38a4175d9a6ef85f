#pragma once

#include <cstdint>
#include <string>

#include "evgraph/reasoner.hpp"

namespace evgraph {

// Little-endian binary: magic "EVGCKPT1", u32 version, u32 mode (0 stl,
// 1 mtl), u32 input_dim, hidden, mlp_hidden, evidence_hidden, f64
// leaky_slope, f64 lambda, u64 step, u32 tensor count, then per tensor u32
// name length, name bytes, u32 rows, u32 cols and rows*cols f64 in row-major
// order.
inline constexpr char kCheckpointMagic[8] = {'E', 'V', 'G', 'C', 'K', 'P', 'T', '1'};
inline constexpr std::uint32_t kCheckpointVersion = 1;

struct Checkpoint {
  GraphReasoner model;
  std::uint64_t step = 0;
};

void save_checkpoint(const std::string& path, const GraphReasoner& model, std::uint64_t step);
// Throws DataError on a malformed file or a tensor that does not match the
// shapes implied by the header.
Checkpoint load_checkpoint(const std::string& path);

}  // namespace evgraph
