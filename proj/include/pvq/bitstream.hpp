#pragma once

// MSB-first bit packing into a byte buffer. The final partial byte is
// zero-padded.

#include "pvq/error.hpp"
#include "pvq/pyramid.hpp"

#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace pvq {

class BitWriter {
public:
    /// Appends the low `bits` bits of value, most significant first.
    void write(std::uint64_t value, int bits) {
        if (bits < 0 || bits > 64) throw InvalidArgument("BitWriter: bit count out of range");
        for (int b = bits - 1; b >= 0; --b) put_bit((value >> b) & 1U);
    }

    /// Same as write() for fields up to 128 bits wide.
    void write_wide(IndexValue value, int bits) {
        if (bits < 0 || bits > 128) throw InvalidArgument("BitWriter: bit count out of range");
        for (int b = bits - 1; b >= 0; --b) put_bit(static_cast<std::uint64_t>((value >> b) & 1U));
    }

    void write_u8(std::uint8_t v) { write(v, 8); }
    void write_u16(std::uint16_t v) { write(v, 16); }
    void write_u32(std::uint32_t v) { write(v, 32); }
    void write_u64(std::uint64_t v) { write(v, 64); }

    std::uint64_t bit_count() const noexcept { return bit_count_; }
    const std::vector<std::uint8_t>& bytes() const noexcept { return bytes_; }
    std::vector<std::uint8_t> take() && { return std::move(bytes_); }

private:
    void put_bit(std::uint64_t bit) {
        if (bit_count_ % 8 == 0) bytes_.push_back(0);
        if (bit) bytes_.back() |= static_cast<std::uint8_t>(0x80U >> (bit_count_ % 8));
        ++bit_count_;
    }

    std::vector<std::uint8_t> bytes_;
    std::uint64_t bit_count_ = 0;
};

class BitReader {
public:
    explicit BitReader(std::span<const std::uint8_t> bytes) : bytes_(bytes) {}

    /// Throws FormatError(truncated) when fewer than `bits` bits remain.
    std::uint64_t read(int bits) {
        if (bits < 0 || bits > 64) throw InvalidArgument("BitReader: bit count out of range");
        if (remaining() < static_cast<std::uint64_t>(bits)) {
            throw FormatError(FormatError::Kind::truncated,
                              "bitstream truncated: need " + std::to_string(bits) + " bits, " +
                                  std::to_string(remaining()) + " left");
        }
        std::uint64_t v = 0;
        for (int i = 0; i < bits; ++i) {
            const std::uint8_t byte = bytes_[cursor_ / 8];
            v = (v << 1) | ((byte >> (7 - cursor_ % 8)) & 1U);
            ++cursor_;
        }
        return v;
    }

    IndexValue read_wide(int bits) {
        if (bits < 0 || bits > 128) throw InvalidArgument("BitReader: bit count out of range");
        if (bits <= 64) return read(bits);
        const IndexValue high = read(bits - 64);
        return (high << 64) | read(64);
    }

    std::uint8_t read_u8() { return static_cast<std::uint8_t>(read(8)); }
    std::uint16_t read_u16() { return static_cast<std::uint16_t>(read(16)); }
    std::uint32_t read_u32() { return static_cast<std::uint32_t>(read(32)); }
    std::uint64_t read_u64() { return read(64); }

    std::uint64_t position() const noexcept { return cursor_; }
    std::uint64_t remaining() const noexcept { return bytes_.size() * 8 - cursor_; }

private:
    std::span<const std::uint8_t> bytes_;
    std::uint64_t cursor_ = 0;
};

}  // namespace pvq
