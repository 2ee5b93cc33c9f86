#pragma once

// Binary parameter file:
//   "SSEL" | version u32 | count u64 |
//   per parameter: name_len u32 | name bytes | rank u64 | dims u64[rank] | values f64[numel]
// All integers and floats little-endian.

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "sdc/model.hpp"

namespace sdc {

inline constexpr std::uint32_t kCheckpointVersion = 1;

std::string encode_checkpoint(const std::vector<NamedTensor>& params);
std::vector<NamedTensor> decode_checkpoint(const std::string& bytes);

void save_checkpoint(const std::filesystem::path& path, const std::vector<NamedTensor>& params);
std::vector<NamedTensor> load_checkpoint(const std::filesystem::path& path);

}  // namespace sdc
