#include <gtest/gtest.h>

#include <random>

#include "openssl_aes.hpp"
#include "rtlpsc/rtl_model.hpp"
#include "rtlpsc/stimulus.hpp"

using namespace rtlpsc;
using rtl::Architecture;

namespace {

class Models : public ::testing::TestWithParam<Architecture> {};

std::size_t count_named(const rtl::DesignModel& m, std::string_view prefix, int parent) {
    std::size_t n = 0;
    for (const auto& b : m.blocks())
        if (b.parent == parent && b.name.starts_with(prefix)) ++n;
    return n;
}

}  // namespace

TEST_P(Models, FipsVector) {
    auto m = rtl::make_model(GetParam());
    const auto t = rtl::simulate(*m, AesKey::from_hex("000102030405060708090a0b0c0d0e0f"),
                                 AesBlock::from_hex("00112233445566778899aabbccddeeff"));
    EXPECT_EQ(t.ciphertext.hex(), "69c4e0d86a7b0430d8cdb78070b4c55a");
}

TEST_P(Models, RandomVectorsMatchOracle) {
    auto m = rtl::make_model(GetParam());
    std::mt19937_64 rng(3);
    for (int i = 0; i < 100; ++i) {
        AesKey k;
        AesBlock p;
        for (auto& b : k.bytes) b = static_cast<Byte>(rng());
        for (auto& b : p.bytes) b = static_cast<Byte>(rng());
        ASSERT_EQ(rtl::simulate(*m, k, p).ciphertext, oracle::aes128_encrypt(k, p));
    }
}

TEST_P(Models, BackToBackKeepsFunction) {
    auto m = rtl::make_model(GetParam());
    const auto key = AesKey::from_hex("2b7e151628aed2a6abf7158809cf4f3c");
    m->reset();
    m->load_key(key);
    AesBlock p{};
    for (int i = 0; i < 50; ++i) {
        const auto c = m->encrypt(p).ciphertext;
        ASSERT_EQ(c, oracle::aes128_encrypt(key, p));
        p = c;
    }
}

TEST_P(Models, Deterministic) {
    auto m = rtl::make_model(GetParam());
    const auto key = AesKey::from_hex("00000000000000000000000000ffffff");
    const auto pt = AesBlock::from_hex("0123456789abcdef0123456789abcdef");
    EXPECT_EQ(rtl::simulate(*m, key, pt), rtl::simulate(*m, key, pt));
}

TEST_P(Models, CountBoundsAndConservation) {
    auto m = rtl::make_model(GetParam());
    std::mt19937_64 rng(5);
    for (int i = 0; i < 20; ++i) {
        AesKey k;
        AesBlock p;
        for (auto& b : k.bytes) b = static_cast<Byte>(rng());
        for (auto& b : p.bytes) b = static_cast<Byte>(rng());
        const auto t = rtl::simulate(*m, k, p);
        ASSERT_EQ(t.cycles(), rtl::kWindow);
        for (std::size_t b = 0; b < m->blocks().size(); ++b) {
            for (std::size_t c = 0; c < t.cycles(); ++c) {
                EXPECT_LE(t.count(b, c), m->block_width(b));
                std::uint64_t expect = 0;
                for (std::size_t s = 0; s < m->signals().size(); ++s)
                    if (m->signals()[s].block == b) expect += t.toggles(c, s);
                for (std::size_t k2 = 0; k2 < m->blocks().size(); ++k2)
                    if (m->blocks()[k2].parent == static_cast<int>(b)) expect += t.count(k2, c);
                EXPECT_EQ(t.count(b, c), expect);
            }
        }
    }
}

TEST_P(Models, ExportConservesTotals) {
    auto m = rtl::make_model(GetParam());
    const auto t = rtl::simulate(*m, AesKey{}, AesBlock::from_hex("ffeeddccbbaa99887766554433221100"));
    const auto tree = saif::parse_saif(saif::emit_saif(rtl::export_trace_saif(t, *m)), {.strict = true}).tree;
    for (std::size_t b = 0; b < m->blocks().size(); ++b)
        EXPECT_EQ(saif::block_tc(tree, m->blocks()[b].path, true), t.window_total(b)) << m->blocks()[b].path;
    for (std::size_t c = 0; c < t.cycles(); ++c) {
        const auto ct = saif::parse_saif(saif::emit_saif(rtl::export_cycle_saif(t, *m, c))).tree;
        for (std::size_t b = 0; b < m->blocks().size(); ++b)
            ASSERT_EQ(saif::block_tc(ct, m->blocks()[b].path, true), t.count(b, c));
    }
    const std::uint64_t duration = rtl::kWindow * rtl::kCyclePeriod;
    for (const auto& n : tree.root.nets) EXPECT_EQ((n.t0 + n.t1) % duration, 0u) << n.name;
}

TEST_P(Models, EmptyWindowExportsZero) {
    auto m = rtl::make_model(GetParam());
    const rtl::CycleTrace empty(rtl::kWindow, m->signals().size(), m->blocks().size());
    const auto tree = rtl::export_trace_saif(empty, *m);
    EXPECT_EQ(saif::block_tc(tree, m->design_id(), true), 0u);
}

TEST_P(Models, KeyZeroHasMinimalFirstCycle) {
    auto m = rtl::make_model(GetParam());
    const auto ladder = stimulus::build_key_ladder();
    const auto first = [&](std::size_t i) { return rtl::simulate(*m, ladder[i], AesBlock{}).count(0, 0); };
    const auto k0 = first(0);
    for (std::size_t i = 1; i < stimulus::kLadderSize; ++i) EXPECT_LE(k0, first(i)) << i;
    EXPECT_LT(k0, first(16));
}

INSTANTIATE_TEST_SUITE_P(Both, Models, ::testing::Values(Architecture::GF, Architecture::LUT),
                         [](const auto& info) { return std::string(rtl::to_string(info.param)); });

TEST(GfModel, Hierarchy) {
    auto m = rtl::make_model(Architecture::GF);
    EXPECT_EQ(m->design_id(), "AES_GF_ENC");
    EXPECT_EQ(count_named(*m, "SubByte", 0), 5u);
    EXPECT_EQ(count_named(*m, "MixColumn", 0), 4u);
    for (std::size_t b = 0; b < m->blocks().size(); ++b) {
        const auto& info = m->blocks()[b];
        if (info.name.starts_with("SubByte")) {
            EXPECT_EQ(count_named(*m, "Sbox", static_cast<int>(b)), 4u);
        }
        if (info.name.starts_with("Sbox")) {
            EXPECT_EQ(count_named(*m, "GFinvComp", static_cast<int>(b)), 1u);
        }
    }
    EXPECT_EQ(m->blocks().size(), 1u + 5u + 20u + 20u + 4u);
    EXPECT_NO_THROW(m->block_index("AES_GF_ENC.SubByte0.Sbox0.GFinvComp"));
    const auto tree = rtl::export_trace_saif(rtl::simulate(*m, AesKey{}, AesBlock{}), *m);
    EXPECT_NO_THROW(tree.find("AES_GF_ENC.SubByte0.Sbox0.GFinvComp"));
}

TEST(LutModel, Hierarchy) {
    auto m = rtl::make_model(Architecture::LUT);
    EXPECT_EQ(m->design_id(), "AES_LUT_ENC");
    EXPECT_EQ(count_named(*m, "SubWord", 0), 1u);
    EXPECT_EQ(count_named(*m, "SubByte", 0), 1u);
    EXPECT_EQ(count_named(*m, "MixColumn", 0), 4u);
    EXPECT_EQ(m->blocks().size(), 7u);
}

TEST(LutModel, SubWordIdleInsideWindow) {
    auto m = rtl::make_model(Architecture::LUT);
    const auto sw = m->block_index("AES_LUT_ENC.SubWord");
    const auto key = AesKey::from_hex("ffffffffffffffffffffffffffffffff");
    m->reset();
    m->load_key(key);
    AesBlock p{};
    for (int i = 0; i < 5; ++i) {
        const auto t = m->encrypt(p);
        EXPECT_EQ(t.window_total(sw), 0u);
        p = t.ciphertext;
    }
}

TEST(Transitions, RegisterFlipCountsEight) {
    // A byte register going 0x0F -> 0xF0 contributes 8 toggles.
    EXPECT_EQ(transition_count(Bits128::from_u64(0x0F), Bits128::from_u64(0xF0)), 8u);
}
