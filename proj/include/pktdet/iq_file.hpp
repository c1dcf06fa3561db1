#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <stdexcept>
#include <vector>

#include "pktdet/signal.hpp"

namespace pktdet {

// Binary IQ file layout, all little-endian:
//
//   offset 0   char[4]  magic "IQPD"
//   offset 4   u8       total_bits
//   offset 5   u8       fractional_bits
//   offset 6   u8       flags (bit 0: signed)
//   offset 7   u8       reserved, 0
//   offset 8   u64      sample count
//   offset 16  i16[2*N] interleaved I, Q raw values
//
// Only formats of at most 16 bits can be stored.

class IqFileError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

inline constexpr std::size_t kIqHeaderSize = 16;

std::vector<std::uint8_t> encode_iq(const SampleStream& stream);
SampleStream decode_iq(std::span<const std::uint8_t> bytes);

void write_iq_file(const std::filesystem::path& path, const SampleStream& stream);
SampleStream read_iq_file(const std::filesystem::path& path);

} // namespace pktdet
