#pragma once

#include <array>
#include <bit>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "rtlpsc/error.hpp"

namespace rtlpsc {

using Byte = std::uint8_t;

// 128-bit unsigned value used for modeled signals. Bit i of the signal is bit
// (i % 64) of word i / 64.
struct Bits128 {
    std::uint64_t lo = 0;
    std::uint64_t hi = 0;

    friend bool operator==(const Bits128&, const Bits128&) = default;

    Bits128 operator^(const Bits128& o) const { return {lo ^ o.lo, hi ^ o.hi}; }

    unsigned popcount() const { return static_cast<unsigned>(std::popcount(lo) + std::popcount(hi)); }

    static Bits128 from_u64(std::uint64_t v) { return {v, 0}; }

    // Bytes are taken most significant first, so bytes[0] lands in the top byte.
    template <std::size_t N>
    static Bits128 from_bytes(const std::array<Byte, N>& bytes) {
        static_assert(N <= 16);
        Bits128 out;
        for (std::size_t i = 0; i < N; ++i) {
            const std::size_t bit = 8 * (N - 1 - i);
            const std::uint64_t b = bytes[i];
            if (bit < 64)
                out.lo |= b << bit;
            else
                out.hi |= b << (bit - 64);
        }
        return out;
    }
};

// Arbitrary-width bit vector. Used by the public transition-count API; the
// simulators use Bits128 internally.
class BitVector {
public:
    BitVector() = default;
    explicit BitVector(std::size_t width) : width_(width), words_((width + 63) / 64, 0) {}

    static BitVector from_u64(std::size_t width, std::uint64_t value) {
        BitVector v(width);
        if (!v.words_.empty()) v.words_[0] = value;
        v.mask_top();
        return v;
    }

    std::size_t width() const noexcept { return width_; }
    std::span<const std::uint64_t> words() const noexcept { return words_; }

    bool bit(std::size_t i) const { return (words_.at(i / 64) >> (i % 64)) & 1u; }
    void set_bit(std::size_t i, bool v) {
        auto& w = words_.at(i / 64);
        const std::uint64_t m = std::uint64_t{1} << (i % 64);
        w = v ? (w | m) : (w & ~m);
    }

    friend bool operator==(const BitVector&, const BitVector&) = default;

private:
    void mask_top() {
        if (width_ % 64 != 0 && !words_.empty()) words_.back() &= (std::uint64_t{1} << (width_ % 64)) - 1;
    }

    std::size_t width_ = 0;
    std::vector<std::uint64_t> words_;
};

// Number of bit positions that differ between consecutive values of a signal.
inline std::size_t transition_count(const BitVector& prev, const BitVector& next) {
    if (prev.width() != next.width()) throw WidthMismatch(prev.width(), next.width());
    std::size_t n = 0;
    const auto a = prev.words();
    const auto b = next.words();
    for (std::size_t i = 0; i < a.size(); ++i) n += static_cast<std::size_t>(std::popcount(a[i] ^ b[i]));
    return n;
}

inline unsigned transition_count(const Bits128& prev, const Bits128& next) { return (prev ^ next).popcount(); }

inline std::string to_hex(std::span<const Byte> bytes) {
    static constexpr char digits[] = "0123456789abcdef";
    std::string s;
    s.reserve(bytes.size() * 2);
    for (Byte b : bytes) {
        s.push_back(digits[b >> 4]);
        s.push_back(digits[b & 0xf]);
    }
    return s;
}

// Parses exactly 2*N hex digits. An optional 0x prefix and '_' separators are accepted.
template <std::size_t N>
std::array<Byte, N> from_hex(std::string_view text) {
    if (text.starts_with("0x") || text.starts_with("0X")) text.remove_prefix(2);
    std::string digits;
    for (char c : text)
        if (c != '_') digits.push_back(c);
    if (digits.size() != 2 * N) throw Error("expected " + std::to_string(2 * N) + " hex digits: '" + std::string(text) + "'");
    auto nibble = [&](char c) -> Byte {
        if (c >= '0' && c <= '9') return static_cast<Byte>(c - '0');
        if (c >= 'a' && c <= 'f') return static_cast<Byte>(c - 'a' + 10);
        if (c >= 'A' && c <= 'F') return static_cast<Byte>(c - 'A' + 10);
        throw Error("invalid hex digit '" + std::string(1, c) + "'");
    };
    std::array<Byte, N> out{};
    for (std::size_t i = 0; i < N; ++i) out[i] = static_cast<Byte>((nibble(digits[2 * i]) << 4) | nibble(digits[2 * i + 1]));
    return out;
}

}  // namespace rtlpsc
