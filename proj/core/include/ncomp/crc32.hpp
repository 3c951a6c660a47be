#ifndef NCOMP_CRC32_HPP
#define NCOMP_CRC32_HPP

#include <cstddef>
#include <cstdint>
#include <span>

namespace ncomp {

// Incremental CRC-32 (IEEE 802.3 polynomial, reflected).
class Crc32 {
 public:
  void update(std::span<const std::uint8_t> data);
  void update(const void* data, std::size_t size);
  std::uint32_t value() const { return state_ ^ 0xFFFFFFFFu; }

 private:
  std::uint32_t state_ = 0xFFFFFFFFu;
};

std::uint32_t crc32(std::span<const std::uint8_t> data);

}  // namespace ncomp

#endif  // NCOMP_CRC32_HPP
