#pragma once

#include <string>

#include "dglstm/data.hpp"
#include "dglstm/network.hpp"

namespace dglstm {

struct Checkpoint {
  NetworkSpec spec;
  Level level = Level::Char;
  ModelParams params;
};

// Text format, byte-deterministic for a given model:
//   line 1: "DGLSTM-CKPT v1"
//   line 2: architecture + tokenization level as sorted key=value pairs
//   then per tensor (canonical order): "name rows cols" and the row-major
//   values at 17 significant digits, one row per line.
std::string serialize_checkpoint(const NetworkSpec& spec, Level level,
                                 const ModelParams& params);

// Inverse of serialize_checkpoint. Anything malformed raises ParseError
// naming the offending line; truncation reports expected vs found tensor
// counts.
Checkpoint parse_checkpoint(const std::string& content);

void save_checkpoint(const std::string& path, const NetworkSpec& spec, Level level,
                     const ModelParams& params);
Checkpoint load_checkpoint(const std::string& path);

}  // namespace dglstm
