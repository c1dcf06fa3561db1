#include "pktdet/iq_file.hpp"

#include <array>
#include <cstring>
#include <fstream>
#include <iterator>

namespace pktdet {

namespace {

constexpr std::array<char, 4> kMagic{'I', 'Q', 'P', 'D'};

void put_u16(std::vector<std::uint8_t>& out, std::uint16_t v) {
    out.push_back(static_cast<std::uint8_t>(v & 0xFF));
    out.push_back(static_cast<std::uint8_t>(v >> 8));
}

void put_u64(std::vector<std::uint8_t>& out, std::uint64_t v) {
    for (int b = 0; b < 8; ++b) {
        out.push_back(static_cast<std::uint8_t>((v >> (8 * b)) & 0xFF));
    }
}

std::uint64_t get_u64(std::span<const std::uint8_t> bytes, std::size_t offset) {
    std::uint64_t v = 0;
    for (int b = 7; b >= 0; --b) {
        v = (v << 8) | bytes[offset + static_cast<std::size_t>(b)];
    }
    return v;
}

std::int16_t get_i16(std::span<const std::uint8_t> bytes, std::size_t offset) {
    const auto u = static_cast<std::uint16_t>(bytes[offset] | (bytes[offset + 1] << 8));
    return static_cast<std::int16_t>(u);
}

} // namespace

std::vector<std::uint8_t> encode_iq(const SampleStream& stream) {
    const auto& fmt = stream.format();
    if (fmt.total_bits > 16) {
        throw IqFileError("IQ files hold at most 16-bit components, got " + fmt.name());
    }
    std::vector<std::uint8_t> out;
    out.reserve(kIqHeaderSize + 4 * stream.size());
    out.insert(out.end(), kMagic.begin(), kMagic.end());
    out.push_back(static_cast<std::uint8_t>(fmt.total_bits));
    out.push_back(static_cast<std::uint8_t>(fmt.fractional_bits));
    out.push_back(fmt.is_signed ? 1 : 0);
    out.push_back(0);
    put_u64(out, stream.size());
    for (const auto& s : stream.samples()) {
        // Unsigned 16-bit values are stored by bit pattern.
        put_u16(out, static_cast<std::uint16_t>(s.i));
        put_u16(out, static_cast<std::uint16_t>(s.q));
    }
    return out;
}

SampleStream decode_iq(std::span<const std::uint8_t> bytes) {
    if (bytes.size() < kIqHeaderSize) {
        throw IqFileError("IQ file shorter than its header");
    }
    if (std::memcmp(bytes.data(), kMagic.data(), kMagic.size()) != 0) {
        throw IqFileError("bad IQ file magic");
    }
    FixedPointFormat fmt;
    fmt.total_bits = bytes[4];
    fmt.fractional_bits = bytes[5];
    fmt.is_signed = (bytes[6] & 1U) != 0;
    try {
        fmt.validate();
    } catch (const std::invalid_argument& e) {
        throw IqFileError(std::string("bad IQ file format descriptor: ") + e.what());
    }
    if (fmt.total_bits > 16) {
        throw IqFileError("IQ file declares components wider than 16 bits");
    }
    const std::uint64_t count = get_u64(bytes, 8);
    const std::size_t payload = bytes.size() - kIqHeaderSize;
    if (count > payload / 4 || payload != count * 4) {
        throw IqFileError("IQ file sample count does not match its length");
    }
    std::vector<IqSample> samples;
    samples.reserve(count);
    for (std::size_t k = 0; k < count; ++k) {
        const std::size_t off = kIqHeaderSize + 4 * k;
        IqSample s;
        if (fmt.is_signed) {
            s.i = get_i16(bytes, off);
            s.q = get_i16(bytes, off + 2);
        } else {
            s.i = static_cast<std::uint16_t>(get_i16(bytes, off));
            s.q = static_cast<std::uint16_t>(get_i16(bytes, off + 2));
        }
        samples.push_back(s);
    }
    try {
        return SampleStream(fmt, std::move(samples));
    } catch (const std::invalid_argument& e) {
        throw IqFileError(std::string("IQ file sample out of range: ") + e.what());
    }
}

void write_iq_file(const std::filesystem::path& path, const SampleStream& stream) {
    const auto bytes = encode_iq(stream);
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw IqFileError("cannot open " + path.string() + " for writing");
    }
    out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    if (!out) {
        throw IqFileError("write failed for " + path.string());
    }
}

SampleStream read_iq_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw IqFileError("cannot open " + path.string());
    }
    std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    return decode_iq(bytes);
}

} // namespace pktdet
