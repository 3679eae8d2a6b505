#pragma once

#include <string>
#include <vector>

#include "cmarl/nn/network.hpp"

namespace cmarl::nn {

struct NamedSpec {
  std::string name;
  NetSpec spec;
  bool operator==(const NamedSpec&) const = default;
};

/// Versioned binary blob, all integers little-endian:
///   "CMARLNN\0" | u32 version | u32 spec count |
///   per spec: u32 name length, name bytes, u32 input, u32 hidden, u32 output, u8 cell |
///   u32 metadata length, metadata bytes |
///   u64 parameter count | parameter count x IEEE-754 binary64.
struct Checkpoint {
  static constexpr unsigned kVersion = 1;
  std::vector<NamedSpec> specs;
  std::string metadata;  // free-form text, the harness stores its run config here
  std::vector<double> parameters;

  bool operator==(const Checkpoint&) const = default;
};

std::string encode_checkpoint(const Checkpoint& checkpoint);
Checkpoint decode_checkpoint(const std::string& bytes);
void save_checkpoint(const std::string& path, const Checkpoint& checkpoint);
Checkpoint load_checkpoint(const std::string& path);

}  // namespace cmarl::nn
