#pragma once

#include <string>

#include "gasrl/nn/network.hpp"

namespace gasrl::nn {

// Little-endian binary network checkpoint:
//   magic "GASRLNET" | u32 version | spec fields | u64 param count | raw doubles.
// save/load round-trips bitwise.
void save_network(const Network& net, const std::string& path);
Network load_network(const std::string& path);

}  // namespace gasrl::nn
