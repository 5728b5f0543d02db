#include <gtest/gtest.h>

#include <fstream>
#include <random>
#include <sstream>

#include "rtlpsc/saif.hpp"

using namespace rtlpsc;
using namespace rtlpsc::saif;

namespace {

std::string fixture(const std::string& name) {
    std::ifstream in(std::string(RTLPSC_TEST_DATA) + "/" + name);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

ActivityTree parse(std::string_view s) { return parse_saif(s).tree; }

}  // namespace

TEST(SaifParse, MinimalFile) {
    const auto t = parse(R"((SAIFILE (SAIFVERSION "2.0") (INSTANCE top (NET (b (T0 10) (T1 12) (TC 22))))))");
    EXPECT_EQ(t.root.name, "top");
    ASSERT_EQ(t.root.nets.size(), 1u);
    EXPECT_EQ(t.root.nets[0].name, "b");
    EXPECT_EQ(t.root.nets[0].t0, 10u);
    EXPECT_EQ(t.root.nets[0].t1, 12u);
    EXPECT_EQ(t.root.nets[0].tc, 22u);
    ASSERT_NE(t.header("SAIFVERSION"), nullptr);
    EXPECT_EQ(t.header("SAIFVERSION")->atoms[0].text, "2.0");
}

TEST(SaifParse, EmptyInstance) {
    const auto t = parse("(SAIFILE (INSTANCE top))");
    EXPECT_TRUE(t.root.nets.empty());
    EXPECT_TRUE(t.root.children.empty());
}

TEST(SaifParse, NestedPath) {
    const auto t = parse("(SAIFILE (INSTANCE top (INSTANCE sbox0 (NET (n (TC 1))))))");
    EXPECT_EQ(t.find("top.sbox0").nets.at(0).tc, 1u);
}

TEST(SaifParse, Fixture) {
    const auto r = parse_saif(fixture("sample.saif"));
    const auto& t = r.tree;
    EXPECT_TRUE(r.warnings.empty());
    EXPECT_EQ(t.root.nets.size(), 3u);  // PORT entries count as nets
    ASSERT_NE(t.root.net("state[0]"), nullptr);
    EXPECT_EQ(t.root.net("state[0]")->tx, 0u);
    EXPECT_EQ(t.root.net("clk")->ig, 0u);
    EXPECT_EQ(block_tc(t, "top", false), 221u);
    EXPECT_EQ(block_tc(t, "top", true), 233u);
    EXPECT_EQ(block_tc(t, "top.sbox0", false), 8u);
    EXPECT_EQ(block_tc(t, "top.sbox0", true), 12u);
    EXPECT_EQ(block_tc(t, "top.sbox1", true), 0u);
    EXPECT_EQ(t.header("DIVIDER")->atoms.at(0).text, "/");
}

TEST(SaifParse, CaseInsensitiveKeywords) {
    const auto t = parse("(saifile (saifversion \"2.0\") (Instance top (net (a (t0 1) (t1 2) (tc 3)))))");
    EXPECT_EQ(t.root.nets.at(0).tc, 3u);
}

TEST(SaifParse, SyntaxErrorsCarryLocation) {
    try {
        parse_saif("(SAIFILE\n  (INSTANCE top (NET (a (TC x)))))");
        FAIL();
    } catch (const SyntaxError& e) {
        EXPECT_EQ(e.line(), 2u);
        EXPECT_GT(e.column(), 1u);
    }
    EXPECT_THROW(parse("(SAIFILE (INSTANCE top)"), SyntaxError);
    EXPECT_THROW(parse("(SAIFILE (INSTANCE top)) trailing"), SyntaxError);
    EXPECT_THROW(parse("(SAIFILE (SAIFVERSION \"2.0\"))"), SyntaxError);
    EXPECT_THROW(parse("(SAIFILE (INSTANCE top (NET)))"), SyntaxError);
    EXPECT_THROW(parse("(SAIFILE (INSTANCE top (NET (a))))"), SyntaxError);
    EXPECT_THROW(parse("(SAIFILE (INSTANCE top (NET (a (TC -1)))))"), SyntaxError);
    EXPECT_THROW(parse(""), SyntaxError);
}

TEST(SaifParse, StrictAndLenient) {
    const std::string text = "(SAIFILE (PROGRAM_NAME \"vcs\") (INSTANCE top (NET (a (TC 1) (TZ 4)))))";
    EXPECT_THROW(parse_saif(text, {.strict = true}), UnsupportedConstruct);
    const auto r = parse_saif(text);
    EXPECT_EQ(r.warnings.size(), 2u);
    EXPECT_EQ(r.tree.root.nets.at(0).tc, 1u);
}

TEST(SaifParse, DuplicateNets) {
    const std::string text = "(SAIFILE (INSTANCE top (NET (a (TC 1)) (a (TC 7)))))";
    EXPECT_THROW(parse_saif(text, {.strict = true}), SyntaxError);
    const auto r = parse_saif(text);
    ASSERT_EQ(r.tree.root.nets.size(), 1u);
    EXPECT_EQ(r.tree.root.nets[0].tc, 7u);
    EXPECT_FALSE(r.warnings.empty());
}

TEST(SaifParse, DepthLimit) {
    std::string s = "(SAIFILE ";
    for (int i = 0; i < 300; ++i) s += "(INSTANCE i" + std::to_string(i) + " ";
    for (int i = 0; i < 300; ++i) s += ")";
    s += ")";
    EXPECT_THROW(parse(s), SyntaxError);
}

TEST(SaifBlockTc, Examples) {
    const auto t = parse("(SAIFILE (INSTANCE top (NET (a (TC 3)) (b (TC 5))) (INSTANCE c (NET (x (TC 4))))))");
    EXPECT_EQ(block_tc(t, "top", false), 8u);
    EXPECT_EQ(block_tc(t, "top", true), 12u);
    EXPECT_THROW(block_tc(t, "top.missing", true), PathNotFound);
    EXPECT_THROW(block_tc(t, "other", true), PathNotFound);
}

TEST(SaifEmit, SingleNet) {
    const auto t = parse("(SAIFILE (INSTANCE top (NET (a (T0 1) (T1 2) (TC 3)))))");
    const auto text = emit_saif(t);
    std::size_t count = 0;
    for (std::size_t p = text.find("(NET"); p != std::string::npos; p = text.find("(NET", p + 1)) ++count;
    EXPECT_EQ(count, 1u);
    EXPECT_EQ(parse(text), t);
}

TEST(SaifEmit, NestingAndFixtureRoundTrip) {
    const auto t = parse("(SAIFILE (INSTANCE a (INSTANCE b (INSTANCE c))))");
    const auto text = emit_saif(t);
    std::size_t count = 0;
    for (std::size_t p = text.find("(INSTANCE"); p != std::string::npos; p = text.find("(INSTANCE", p + 1)) ++count;
    EXPECT_EQ(count, 3u);
    EXPECT_EQ(parse(text), t);
    const auto f = parse(fixture("sample.saif"));
    EXPECT_EQ(parse(emit_saif(f)), f);
}

namespace {

std::string random_name(std::mt19937_64& rng) {
    static const std::string chars = "abcXYZ_019[]/.()\\\"";
    std::uniform_int_distribution<std::size_t> len(1, 8), pick(0, chars.size() - 1);
    std::string s;
    const std::size_t n = len(rng);
    for (std::size_t i = 0; i < n; ++i) s += chars[pick(rng)];
    return s;
}

InstanceNode random_node(std::mt19937_64& rng, int depth) {
    InstanceNode node;
    node.name = random_name(rng) + std::to_string(rng() % 1000);
    const std::size_t nets = rng() % 4;
    for (std::size_t i = 0; i < nets; ++i) {
        NetActivity n;
        n.name = random_name(rng) + "_" + std::to_string(i);
        n.t0 = rng() % 100000;
        n.t1 = rng() % 100000;
        n.tc = rng() % 1000;
        if (rng() % 3 == 0) n.tx = rng() % 10;
        if (rng() % 5 == 0) n.ig = rng() % 10;
        node.nets.push_back(n);
    }
    if (depth < 4) {
        const std::size_t kids = rng() % 3;
        for (std::size_t i = 0; i < kids; ++i) {
            auto c = random_node(rng, depth + 1);
            c.name += "_" + std::to_string(i);
            node.children.push_back(std::move(c));
        }
    }
    return node;
}

std::uint64_t manual_sum(const InstanceNode& n) {
    std::uint64_t s = 0;
    for (const auto& x : n.nets) s += x.tc;
    return s;
}

void check_recursive(const ActivityTree& t, const InstanceNode& node, const std::string& path) {
    std::uint64_t expected = 0;
    std::vector<std::pair<const InstanceNode*, std::string>> stack{{&node, path}};
    while (!stack.empty()) {
        auto [cur, p] = stack.back();
        stack.pop_back();
        expected += block_tc(t, p, false);
        EXPECT_EQ(block_tc(t, p, false), manual_sum(*cur));
        for (const auto& c : cur->children) stack.push_back({&c, p + "." + c.name});
    }
    EXPECT_EQ(block_tc(t, path, true), expected);
}

}  // namespace

TEST(SaifProperty, RoundTripRandomTrees) {
    std::mt19937_64 rng(11);
    for (int i = 0; i < 300; ++i) {
        ActivityTree t;
        t.headers.push_back({"SAIFVERSION", {{"2.0", true}}});
        t.headers.push_back({"DESIGN", {{random_name(rng), true}}});
        t.headers.push_back({"TIMESCALE", {{"1", false}, {"ns", false}}});
        t.root = random_node(rng, 0);
        const auto text = emit_saif(t);
        const auto back = parse_saif(text, {.strict = true});
        ASSERT_EQ(back.tree, t) << text;
    }
}

void undot(InstanceNode& n) {
    for (char& ch : n.name)
        if (ch == '.') ch = '_';
    for (auto& c : n.children) undot(c);
}

TEST(SaifProperty, RecursiveSumsOverDescendants) {
    std::mt19937_64 rng(12);
    for (int i = 0; i < 100; ++i) {
        ActivityTree t;
        t.root = random_node(rng, 0);
        undot(t.root);
        const auto back = parse(emit_saif(t));
        check_recursive(back, back.root, back.root.name);
    }
}

TEST(SaifProperty, FuzzNeverCrashes) {
    std::mt19937_64 rng(13);
    const std::string seed_text = fixture("sample.saif");
    std::size_t errors = 0;
    for (int i = 0; i < 3000; ++i) {
        std::string s;
        if (i % 2 == 0) {
            const std::size_t n = rng() % 200;
            for (std::size_t k = 0; k < n; ++k) s += static_cast<char>(rng() % 256);
        } else {
            s = seed_text;
            const std::size_t edits = 1 + rng() % 5;
            for (std::size_t k = 0; k < edits; ++k) s[rng() % s.size()] = static_cast<char>(rng() % 256);
        }
        try {
            (void)parse_saif(s);
            (void)parse_saif(s, {.strict = true});
        } catch (const Error&) {
            ++errors;
        }
    }
    EXPECT_GT(errors, 0u);
}
