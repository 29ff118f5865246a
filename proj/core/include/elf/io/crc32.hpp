#pragma once

#include <cstddef>
#include <cstdint>

namespace elf::io {

// CRC-32 (IEEE 802.3 polynomial, reflected). crc32("123456789") == 0xCBF43926.
uint32_t crc32(const void* data, size_t len, uint32_t seed = 0);

}  // namespace elf::io
