#pragma once

// AES S-box via inversion in the composite field GF((2^4)^2).
//
// GF(2^4) uses x^4 + x + 1. GF((2^4)^2) uses y^2 + y + lambda, with lambda the
// smallest element making that quadratic irreducible. An element h*y + l is
// packed as (h << 4) | l. The basis change from the AES field is derived from a
// root of the AES polynomial in the composite field, so no hand-entered matrix
// is involved.

#include <array>

#include "rtlpsc/aes.hpp"

namespace rtlpsc::gf {

constexpr Byte gf16_mul(Byte a, Byte b) {
    Byte p = 0;
    for (int i = 0; i < 4; ++i) {
        if (b & 1) p ^= a;
        const bool carry = a & 0x8;
        a = static_cast<Byte>((a << 1) & 0xf);
        if (carry) a ^= 0x3;
        b >>= 1;
    }
    return p;
}

constexpr Byte gf16_square(Byte a) { return gf16_mul(a, a); }

constexpr Byte gf16_inv(Byte a) {
    for (Byte b = 1; b < 16; ++b)
        if (gf16_mul(a, b) == 1) return b;
    return 0;
}

constexpr Byte find_lambda() {
    for (Byte l = 1; l < 16; ++l) {
        bool has_root = false;
        for (Byte y = 0; y < 16; ++y)
            if ((gf16_square(y) ^ y ^ l) == 0) has_root = true;
        if (!has_root) return l;
    }
    return 0;
}

inline constexpr Byte lambda = find_lambda();

constexpr Byte hi(Byte v) { return static_cast<Byte>(v >> 4); }
constexpr Byte lo(Byte v) { return static_cast<Byte>(v & 0xf); }
constexpr Byte pack(Byte h, Byte l) { return static_cast<Byte>((h << 4) | l); }

constexpr Byte composite_mul(Byte a, Byte b) {
    const Byte hh = gf16_mul(hi(a), hi(b));
    const Byte h = static_cast<Byte>(hh ^ gf16_mul(hi(a), lo(b)) ^ gf16_mul(lo(a), hi(b)));
    const Byte l = static_cast<Byte>(gf16_mul(hh, lambda) ^ gf16_mul(lo(a), lo(b)));
    return pack(h, l);
}

constexpr Byte apply_linear(const std::array<Byte, 8>& columns, Byte x) {
    Byte out = 0;
    for (unsigned i = 0; i < 8; ++i)
        if (x & (1u << i)) out ^= columns[i];
    return out;
}

// Images of alpha^0..alpha^7 under the isomorphism, alpha being the AES generator.
constexpr std::array<Byte, 8> make_map_columns() {
    for (unsigned cand = 2; cand < 256; ++cand) {
        const Byte b = static_cast<Byte>(cand);
        std::array<Byte, 9> pw{};
        pw[0] = 1;
        for (unsigned i = 1; i <= 8; ++i) pw[i] = composite_mul(pw[i - 1], b);
        // x^8 + x^4 + x^3 + x + 1
        if ((pw[8] ^ pw[4] ^ pw[3] ^ pw[1] ^ pw[0]) == 0) {
            std::array<Byte, 8> cols{};
            for (unsigned i = 0; i < 8; ++i) cols[i] = pw[i];
            return cols;
        }
    }
    return {};
}

inline constexpr std::array<Byte, 8> map_columns = make_map_columns();

constexpr std::array<Byte, 8> make_unmap_columns() {
    std::array<Byte, 256> inverse{};
    for (unsigned x = 0; x < 256; ++x) inverse[apply_linear(map_columns, static_cast<Byte>(x))] = static_cast<Byte>(x);
    std::array<Byte, 8> cols{};
    for (unsigned i = 0; i < 8; ++i) cols[i] = inverse[1u << i];
    return cols;
}

inline constexpr std::array<Byte, 8> unmap_columns = make_unmap_columns();

constexpr Byte to_composite(Byte x) { return apply_linear(map_columns, x); }
constexpr Byte from_composite(Byte x) { return apply_linear(unmap_columns, x); }

// Intermediate values of one inversion, in datapath order.
struct InversionStages {
    Byte sq_scaled = 0;  // lambda * h^2
    Byte hl_sum = 0;     // h ^ l
    Byte l_prod = 0;     // l * (h ^ l)
    Byte delta = 0;      // lambda*h^2 + l*(h^l), the GF(2^4) norm
    Byte delta_inv = 0;
    Byte out_h = 0;      // h * delta^-1
    Byte out_l = 0;      // (h ^ l) * delta^-1

    constexpr Byte result() const { return pack(out_h, out_l); }
};

constexpr InversionStages invert(Byte a) {
    InversionStages s;
    const Byte h = hi(a);
    const Byte l = lo(a);
    s.sq_scaled = gf16_mul(gf16_square(h), lambda);
    s.hl_sum = static_cast<Byte>(h ^ l);
    s.l_prod = gf16_mul(l, s.hl_sum);
    s.delta = static_cast<Byte>(s.sq_scaled ^ s.l_prod);
    s.delta_inv = gf16_inv(s.delta);
    s.out_h = gf16_mul(h, s.delta_inv);
    s.out_l = gf16_mul(s.hl_sum, s.delta_inv);
    return s;
}

struct SboxStages {
    Byte in = 0;
    Byte mapped = 0;
    InversionStages inv;
    Byte unmapped = 0;
    Byte out = 0;
};

constexpr SboxStages sbox_stages(Byte x) {
    SboxStages s;
    s.in = x;
    s.mapped = to_composite(x);
    s.inv = invert(s.mapped);
    s.unmapped = from_composite(s.inv.result());
    s.out = aes::affine(s.unmapped);
    return s;
}

constexpr bool matches_table() {
    for (unsigned x = 0; x < 256; ++x)
        if (sbox_stages(static_cast<Byte>(x)).out != aes::sbox[x]) return false;
    return true;
}

static_assert(lambda != 0, "no irreducible y^2 + y + lambda found");
static_assert(matches_table(), "composite-field S-box disagrees with the FIPS-197 table");

}  // namespace rtlpsc::gf
