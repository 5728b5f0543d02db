#pragma once

// Table-free, constexpr AES-128 (FIPS-197). This is the functional reference the
// cycle models are checked against and the generator of chained plaintexts.

#include <array>
#include <cstdint>
#include <string>
#include <string_view>

#include "rtlpsc/bits.hpp"

namespace rtlpsc {

template <class Tag>
struct Octets128 {
    std::array<Byte, 16> bytes{};

    constexpr Byte& operator[](std::size_t i) { return bytes[i]; }
    constexpr const Byte& operator[](std::size_t i) const { return bytes[i]; }

    friend constexpr bool operator==(const Octets128&, const Octets128&) = default;
    friend constexpr auto operator<=>(const Octets128&, const Octets128&) = default;

    std::string hex() const { return to_hex(bytes); }
    static Octets128 from_hex(std::string_view s) { return Octets128{rtlpsc::from_hex<16>(s)}; }
    Bits128 bits() const { return Bits128::from_bytes(bytes); }
};

struct KeyTag {};
struct BlockTag {};

// Byte i is FIPS-197 input byte in_i, i.e. state[i % 4][i / 4].
using AesKey = Octets128<KeyTag>;
using AesBlock = Octets128<BlockTag>;

namespace aes {

constexpr Byte xtime(Byte a) { return static_cast<Byte>((a << 1) ^ ((a & 0x80) ? 0x1b : 0x00)); }

constexpr Byte gmul(Byte a, Byte b) {
    Byte p = 0;
    while (b) {
        if (b & 1) p ^= a;
        a = xtime(a);
        b >>= 1;
    }
    return p;
}

// Multiplicative inverse in GF(2^8) as a^254; 0 maps to 0.
constexpr Byte ginv(Byte a) {
    Byte result = 1;
    Byte base = a;
    unsigned e = 254;
    while (e) {
        if (e & 1) result = gmul(result, base);
        base = gmul(base, base);
        e >>= 1;
    }
    return a == 0 ? Byte{0} : result;
}

constexpr Byte rotl8(Byte x, unsigned s) { return static_cast<Byte>((x << s) | (x >> (8 - s))); }

constexpr Byte affine(Byte b) {
    return static_cast<Byte>(b ^ rotl8(b, 1) ^ rotl8(b, 2) ^ rotl8(b, 3) ^ rotl8(b, 4) ^ 0x63);
}

constexpr std::array<Byte, 256> make_sbox() {
    std::array<Byte, 256> t{};
    for (unsigned i = 0; i < 256; ++i) t[i] = affine(ginv(static_cast<Byte>(i)));
    return t;
}

inline constexpr std::array<Byte, 256> sbox = make_sbox();

inline constexpr std::array<Byte, 11> rcon = {0x00, 0x01, 0x02, 0x04, 0x08, 0x10, 0x20, 0x40, 0x80, 0x1b, 0x36};

using Word = std::array<Byte, 4>;
using RoundKeys = std::array<AesKey, 11>;

constexpr Word sub_word(Word w) {
    for (auto& b : w) b = sbox[b];
    return w;
}

constexpr Word rot_word(Word w) { return {w[1], w[2], w[3], w[0]}; }

constexpr Word key_word(const AesKey& k, unsigned i) { return {k[4 * i], k[4 * i + 1], k[4 * i + 2], k[4 * i + 3]}; }

// One step of the key schedule: round key r from round key r-1.
constexpr AesKey next_round_key(const AesKey& prev, unsigned round) {
    Word t = sub_word(rot_word(key_word(prev, 3)));
    t[0] ^= rcon[round];
    AesKey out{};
    for (unsigned w = 0; w < 4; ++w) {
        for (unsigned b = 0; b < 4; ++b) {
            out[4 * w + b] = static_cast<Byte>(prev[4 * w + b] ^ t[b]);
            t[b] = out[4 * w + b];
        }
    }
    return out;
}

constexpr RoundKeys expand_key(const AesKey& key) {
    RoundKeys rk{};
    rk[0] = key;
    for (unsigned r = 1; r <= 10; ++r) rk[r] = next_round_key(rk[r - 1], r);
    return rk;
}

constexpr AesBlock sub_bytes(AesBlock s) {
    for (auto& b : s.bytes) b = sbox[b];
    return s;
}

constexpr AesBlock shift_rows(const AesBlock& s) {
    AesBlock out{};
    for (unsigned c = 0; c < 4; ++c)
        for (unsigned r = 0; r < 4; ++r) out[4 * c + r] = s[4 * ((c + r) % 4) + r];
    return out;
}

constexpr Word mix_column(const Word& a) {
    return {
        static_cast<Byte>(xtime(a[0]) ^ xtime(a[1]) ^ a[1] ^ a[2] ^ a[3]),
        static_cast<Byte>(a[0] ^ xtime(a[1]) ^ xtime(a[2]) ^ a[2] ^ a[3]),
        static_cast<Byte>(a[0] ^ a[1] ^ xtime(a[2]) ^ xtime(a[3]) ^ a[3]),
        static_cast<Byte>(xtime(a[0]) ^ a[0] ^ a[1] ^ a[2] ^ xtime(a[3])),
    };
}

constexpr AesBlock mix_columns(const AesBlock& s) {
    AesBlock out{};
    for (unsigned c = 0; c < 4; ++c) {
        const Word m = mix_column({s[4 * c], s[4 * c + 1], s[4 * c + 2], s[4 * c + 3]});
        for (unsigned r = 0; r < 4; ++r) out[4 * c + r] = m[r];
    }
    return out;
}

constexpr AesBlock add_round_key(AesBlock s, const AesKey& k) {
    for (unsigned i = 0; i < 16; ++i) s[i] ^= k[i];
    return s;
}

constexpr AesBlock encrypt(const RoundKeys& rk, const AesBlock& pt) {
    AesBlock s = add_round_key(pt, rk[0]);
    for (unsigned r = 1; r <= 9; ++r) s = add_round_key(mix_columns(shift_rows(sub_bytes(s))), rk[r]);
    return add_round_key(shift_rows(sub_bytes(s)), rk[10]);
}

constexpr AesBlock encrypt(const AesKey& key, const AesBlock& pt) { return encrypt(expand_key(key), pt); }

}  // namespace aes

inline AesBlock aes_encrypt_reference(const AesKey& key, const AesBlock& pt) { return aes::encrypt(key, pt); }

}  // namespace rtlpsc
