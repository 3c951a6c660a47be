#ifndef NCOMP_SERIALIZE_HPP
#define NCOMP_SERIALIZE_HPP

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "ncomp/model.hpp"

namespace ncomp {

// Model file layout ("NCMP" format, version 1), all integers little-endian:
//   magic "NCMP" (4 bytes), version (1 byte),
//   window, char_alphabet, tag_alphabet, char_gru_units, pos_gru_units,
//   merged_gru_units, dense1_units (u32 each),
//   dropout_rho (IEEE-754 bits, u64), seed (u64),
//   every tensor in for_each_tensor order, row-major f64,
//   CRC-32 of all preceding bytes (u32).
std::vector<std::uint8_t> serialize_model(const NetworkParams& params);

// The file's trailing CRC; compressed containers store it to pin the exact
// model they were coded with.
std::uint32_t model_checksum(const NetworkParams& params);

void save_model(const NetworkParams& params, const std::string& path);

struct LoadedModel {
  NetworkParams params;
  std::uint32_t checksum = 0;
};

// Throws FormatError on structural problems and ChecksumError when the
// trailer does not match the content.
LoadedModel parse_model(std::span<const std::uint8_t> bytes);
LoadedModel load_model(const std::string& path);

}  // namespace ncomp

#endif  // NCOMP_SERIALIZE_HPP
