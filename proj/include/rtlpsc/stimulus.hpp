#pragma once

#include <array>
#include <span>
#include <vector>

#include "rtlpsc/aes.hpp"
#include "rtlpsc/metrics.hpp"

namespace rtlpsc::stimulus {

inline constexpr std::size_t kLadderSize = 17;
inline constexpr std::size_t kDefaultPlaintexts = 1000;

// Key_i has its i low-order bytes set to 0xFF, the rest 0x00.
struct KeyLadder {
    std::array<AesKey, kLadderSize> keys{};

    const AesKey& operator[](std::size_t i) const { return keys.at(i); }
};

inline KeyLadder build_key_ladder() {
    KeyLadder ladder;
    for (std::size_t i = 0; i < kLadderSize; ++i)
        for (std::size_t b = 0; b < i; ++b) ladder.keys[i][15 - b] = 0xff;
    return ladder;
}

struct PlaintextChain {
    AesBlock seed;
    AesKey key;
    std::vector<AesBlock> plaintexts;
};

// plaintexts[0] = seed, plaintexts[j+1] = AES(key, plaintexts[j]).
inline PlaintextChain plaintext_chain(const AesKey& key, std::size_t n = kDefaultPlaintexts, const AesBlock& seed = {}) {
    if (n < 1) throw InsufficientData("plaintext chain needs n >= 1");
    PlaintextChain chain{seed, key, {}};
    chain.plaintexts.reserve(n);
    const auto rk = aes::expand_key(key);
    AesBlock p = seed;
    for (std::size_t j = 0; j < n; ++j) {
        chain.plaintexts.push_back(p);
        p = aes::encrypt(rk, p);
    }
    return chain;
}

struct SuitabilityVerdict {
    std::vector<double> kl_ladder;
    double spearman = 0.0;
    double threshold = 0.9;
    bool pass = false;
};

// kl_ladder[i] is the divergence between Key_0 and Key_{i+1}. The pair
// (Key_0, Key_last) is suitable when the ladder rises with i in rank order.
inline SuitabilityVerdict check_key_pair_suitability(std::span<const double> kl_ladder, double threshold = 0.9) {
    if (kl_ladder.size() < 3) throw InsufficientData("key-pair suitability needs at least 3 ladder points");
    std::vector<double> index(kl_ladder.size());
    for (std::size_t i = 0; i < index.size(); ++i) index[i] = static_cast<double>(i + 1);
    SuitabilityVerdict v;
    v.kl_ladder.assign(kl_ladder.begin(), kl_ladder.end());
    v.threshold = threshold;
    v.spearman = metrics::spearman(index, kl_ladder);
    v.pass = v.spearman >= threshold;
    return v;
}

}  // namespace rtlpsc::stimulus
