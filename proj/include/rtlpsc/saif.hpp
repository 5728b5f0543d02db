#pragma once

// Reader and writer for a subset of the Switching Activity Interchange Format.
//
// Grammar (keywords case-insensitive, `//` comments to end of line):
//
//   file     := '(' 'SAIFILE' header* instance ')'
//   header   := '(' keyword atom* ')'
//   instance := '(' 'INSTANCE' identifier netsec? instance* ')'
//   netsec   := '(' ('NET' | 'PORT') netdef+ ')'
//   netdef   := '(' identifier counter+ ')'
//   counter  := '(' ('T0'|'T1'|'TX'|'TC'|'IG') integer ')'
//
// Inside an identifier a backslash makes the next character literal, so
// `\bus[3]` and `a\(b\)` are single names. Identifiers end at whitespace or an
// unescaped parenthesis.

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "rtlpsc/error.hpp"

namespace rtlpsc::saif {

struct NetActivity {
    std::string name;
    std::uint64_t t0 = 0;
    std::uint64_t t1 = 0;
    std::uint64_t tc = 0;
    // Carried through for round-tripping; never used by the metrics.
    std::optional<std::uint64_t> tx;
    std::optional<std::uint64_t> ig;

    friend bool operator==(const NetActivity&, const NetActivity&) = default;
};

struct InstanceNode {
    std::string name;
    std::vector<NetActivity> nets;
    std::vector<InstanceNode> children;

    const InstanceNode* child(std::string_view n) const {
        for (const auto& c : children)
            if (c.name == n) return &c;
        return nullptr;
    }

    const NetActivity* net(std::string_view n) const {
        for (const auto& x : nets)
            if (x.name == n) return &x;
        return nullptr;
    }

    friend bool operator==(const InstanceNode&, const InstanceNode&) = default;
};

struct Atom {
    std::string text;
    bool quoted = false;

    friend bool operator==(const Atom&, const Atom&) = default;
};

struct Header {
    std::string keyword;  // upper-case
    std::vector<Atom> atoms;

    friend bool operator==(const Header&, const Header&) = default;
};

struct ActivityTree {
    std::vector<Header> headers;
    InstanceNode root;

    friend bool operator==(const ActivityTree&, const ActivityTree&) = default;

    // Dot-joined instance names starting with the root name.
    const InstanceNode& find(std::string_view path) const {
        std::size_t pos = path.find('.');
        if (path.substr(0, pos) != root.name) throw PathNotFound(std::string(path));
        const InstanceNode* node = &root;
        while (pos != std::string_view::npos) {
            const std::size_t next = path.find('.', pos + 1);
            const auto seg = path.substr(pos + 1, next == std::string_view::npos ? next : next - pos - 1);
            node = node->child(seg);
            if (!node) throw PathNotFound(std::string(path));
            pos = next;
        }
        return *node;
    }

    const Header* header(std::string_view keyword) const {
        for (const auto& h : headers)
            if (h.keyword == keyword) return &h;
        return nullptr;
    }
};

struct ParseOptions {
    bool strict = false;
    std::size_t max_depth = 256;
};

struct ParseResult {
    ActivityTree tree;
    std::vector<std::string> warnings;
};

namespace detail {

inline std::string upper(std::string_view s) {
    std::string out(s);
    for (auto& c : out) c = static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
    return out;
}

inline bool is_header_keyword(std::string_view kw) {
    static constexpr std::string_view known[] = {"SAIFVERSION", "DIRECTION", "DESIGN", "DATE",
                                                 "VENDOR", "DIVIDER", "TIMESCALE", "DURATION"};
    return std::find(std::begin(known), std::end(known), kw) != std::end(known);
}

class Parser {
public:
    Parser(std::string_view text, const ParseOptions& opts) : text_(text), opts_(opts) {}

    ParseResult run() {
        ParseResult result;
        expect_open();
        expect_keyword("SAIFILE");
        bool have_instance = false;
        while (true) {
            skip_ws();
            if (at_end()) fail("unexpected end of input, expected ')'");
            if (peek() == ')') {
                advance();
                break;
            }
            if (have_instance) fail("unexpected clause after top-level INSTANCE");
            const auto [line, col] = position();
            expect_open();
            const std::string kw = upper(read_word("keyword"));
            if (kw == "INSTANCE") {
                result.tree.root = parse_instance(1);
                have_instance = true;
            } else if (is_header_keyword(kw)) {
                result.tree.headers.push_back(parse_header(kw));
            } else {
                unsupported(kw, line, col);
            }
        }
        if (!have_instance) fail("SAIFILE contains no INSTANCE");
        skip_ws();
        if (!at_end()) fail("trailing content after SAIFILE");
        result.warnings = std::move(warnings_);
        return result;
    }

private:
    bool at_end() const { return pos_ >= text_.size(); }
    char peek() const { return text_[pos_]; }

    void advance() {
        if (text_[pos_] == '\n') {
            ++line_;
            col_ = 1;
        } else {
            ++col_;
        }
        ++pos_;
    }

    std::pair<std::size_t, std::size_t> position() const { return {line_, col_}; }

    [[noreturn]] void fail(const std::string& what) const { throw SyntaxError(what, line_, col_); }

    void skip_ws() {
        while (!at_end()) {
            const char c = peek();
            if (std::isspace(static_cast<unsigned char>(c))) {
                advance();
            } else if (c == '/' && pos_ + 1 < text_.size() && text_[pos_ + 1] == '/') {
                while (!at_end() && peek() != '\n') advance();
            } else {
                return;
            }
        }
    }

    void expect_open() {
        skip_ws();
        if (at_end() || peek() != '(') fail("expected '('");
        advance();
    }

    void expect_close() {
        skip_ws();
        if (at_end() || peek() != ')') fail("expected ')'");
        advance();
    }

    static bool is_delim(char c) {
        return c == '(' || c == ')' || c == '"' || std::isspace(static_cast<unsigned char>(c));
    }

    // Bare word with backslash escapes resolved.
    std::string read_word(const char* what) {
        skip_ws();
        std::string out;
        while (!at_end()) {
            const char c = peek();
            if (c == '\\') {
                advance();
                if (at_end() || std::isspace(static_cast<unsigned char>(peek()))) fail("dangling escape");
                out.push_back(peek());
                advance();
                continue;
            }
            if (is_delim(c)) break;
            if (c == '/' && pos_ + 1 < text_.size() && text_[pos_ + 1] == '/') break;
            out.push_back(c);
            advance();
        }
        if (out.empty()) fail(std::string("expected ") + what);
        return out;
    }

    std::string read_string() {
        advance();  // opening quote
        std::string out;
        while (true) {
            if (at_end()) fail("unterminated string");
            const char c = peek();
            if (c == '"') {
                advance();
                return out;
            }
            if (c == '\\') {
                advance();
                if (at_end()) fail("unterminated string");
            }
            out.push_back(peek());
            advance();
        }
    }

    void expect_keyword(std::string_view kw) {
        const std::string w = upper(read_word("keyword"));
        if (w != kw) fail("expected " + std::string(kw) + ", found '" + w + "'");
    }

    std::uint64_t read_integer() {
        const std::string w = read_word("integer");
        std::uint64_t v = 0;
        const auto [ptr, ec] = std::from_chars(w.data(), w.data() + w.size(), v);
        if (ec != std::errc{} || ptr != w.data() + w.size()) fail("invalid integer '" + w + "'");
        return v;
    }

    // Consumes the remainder of a clause whose '(' and keyword were already read.
    void skip_clause() {
        std::size_t depth = 1;
        while (depth > 0) {
            skip_ws();
            if (at_end()) fail("unexpected end of input inside skipped clause");
            const char c = peek();
            if (c == '(') {
                ++depth;
                advance();
            } else if (c == ')') {
                --depth;
                advance();
            } else if (c == '"') {
                read_string();
            } else {
                read_word("atom");
            }
        }
    }

    void unsupported(const std::string& kw, std::size_t line, std::size_t col) {
        if (opts_.strict) throw UnsupportedConstruct("clause " + kw, line, col);
        warnings_.push_back(std::to_string(line) + ":" + std::to_string(col) + ": skipped unsupported clause " + kw);
        skip_clause();
    }

    Header parse_header(const std::string& kw) {
        Header h{kw, {}};
        while (true) {
            skip_ws();
            if (at_end()) fail("unexpected end of input in header");
            const char c = peek();
            if (c == ')') {
                advance();
                return h;
            }
            if (c == '(') fail("nested clause in header " + kw);
            if (c == '"')
                h.atoms.push_back({read_string(), true});
            else
                h.atoms.push_back({read_word("atom"), false});
        }
    }

    InstanceNode parse_instance(std::size_t depth) {
        if (depth > opts_.max_depth) fail("instance nesting exceeds " + std::to_string(opts_.max_depth));
        InstanceNode node;
        node.name = read_word("instance name");
        while (true) {
            skip_ws();
            if (at_end()) fail("unexpected end of input in INSTANCE " + node.name);
            if (peek() == ')') {
                advance();
                return node;
            }
            const auto [line, col] = position();
            expect_open();
            const std::string kw = upper(read_word("keyword"));
            if (kw == "NET" || kw == "PORT") {
                parse_netsec(node);
            } else if (kw == "INSTANCE") {
                InstanceNode child = parse_instance(depth + 1);
                auto it = std::find_if(node.children.begin(), node.children.end(),
                                       [&](const InstanceNode& c) { return c.name == child.name; });
                if (it == node.children.end()) {
                    node.children.push_back(std::move(child));
                } else if (opts_.strict) {
                    throw SyntaxError("duplicate instance " + child.name, line, col);
                } else {
                    warnings_.push_back(std::to_string(line) + ":" + std::to_string(col) +
                                        ": duplicate instance " + child.name + ", last occurrence kept");
                    *it = std::move(child);
                }
            } else {
                unsupported(kw, line, col);
            }
        }
    }

    void parse_netsec(InstanceNode& node) {
        std::size_t defs = 0;
        while (true) {
            skip_ws();
            if (at_end()) fail("unexpected end of input in NET section");
            if (peek() == ')') {
                advance();
                break;
            }
            const auto [line, col] = position();
            expect_open();
            NetActivity net = parse_netdef();
            ++defs;
            auto it = std::find_if(node.nets.begin(), node.nets.end(),
                                   [&](const NetActivity& n) { return n.name == net.name; });
            if (it == node.nets.end()) {
                node.nets.push_back(std::move(net));
            } else if (opts_.strict) {
                throw SyntaxError("duplicate net " + net.name + " in " + node.name, line, col);
            } else {
                warnings_.push_back(std::to_string(line) + ":" + std::to_string(col) + ": duplicate net " +
                                    net.name + " in " + node.name + ", last occurrence kept");
                *it = std::move(net);
            }
        }
        if (defs == 0) fail("empty NET section");
    }

    NetActivity parse_netdef() {
        NetActivity net;
        net.name = read_word("net name");
        std::size_t counters = 0;
        while (true) {
            skip_ws();
            if (at_end()) fail("unexpected end of input in net " + net.name);
            if (peek() == ')') {
                advance();
                break;
            }
            const auto [line, col] = position();
            expect_open();
            const std::string kw = upper(read_word("counter"));
            if (kw == "T0" || kw == "T1" || kw == "TC" || kw == "TX" || kw == "IG") {
                const std::uint64_t v = read_integer();
                expect_close();
                if (kw == "T0") net.t0 = v;
                else if (kw == "T1") net.t1 = v;
                else if (kw == "TC") net.tc = v;
                else if (kw == "TX") net.tx = v;
                else net.ig = v;
                ++counters;
            } else {
                unsupported(kw, line, col);
            }
        }
        if (counters == 0) fail("net " + net.name + " has no counters");
        return net;
    }

    std::string_view text_;
    ParseOptions opts_;
    std::size_t pos_ = 0;
    std::size_t line_ = 1;
    std::size_t col_ = 1;
    std::vector<std::string> warnings_;
};

inline std::string escape_identifier(std::string_view name) {
    std::string out;
    out.reserve(name.size());
    for (char c : name) {
        if (c == '(' || c == ')' || c == '\\' || c == '"' || c == '/') out.push_back('\\');
        out.push_back(c);
    }
    return out;
}

inline std::string escape_string(std::string_view s) {
    std::string out;
    for (char c : s) {
        if (c == '"' || c == '\\') out.push_back('\\');
        out.push_back(c);
    }
    return out;
}

inline void emit_instance(const InstanceNode& node, std::size_t indent, std::string& out) {
    const std::string pad(indent, ' ');
    out += pad + "(INSTANCE " + escape_identifier(node.name) + "\n";
    if (!node.nets.empty()) {
        out += pad + "  (NET\n";
        for (const auto& n : node.nets) {
            out += pad + "    (" + escape_identifier(n.name);
            out += " (T0 " + std::to_string(n.t0) + ")";
            out += " (T1 " + std::to_string(n.t1) + ")";
            if (n.tx) out += " (TX " + std::to_string(*n.tx) + ")";
            out += " (TC " + std::to_string(n.tc) + ")";
            if (n.ig) out += " (IG " + std::to_string(*n.ig) + ")";
            out += ")\n";
        }
        out += pad + "  )\n";
    }
    for (const auto& c : node.children) emit_instance(c, indent + 2, out);
    out += pad + ")\n";
}

inline std::uint64_t own_tc(const InstanceNode& node) {
    std::uint64_t sum = 0;
    for (const auto& n : node.nets) sum += n.tc;
    return sum;
}

inline std::uint64_t subtree_tc(const InstanceNode& node) {
    std::uint64_t sum = own_tc(node);
    for (const auto& c : node.children) sum += subtree_tc(c);
    return sum;
}

}  // namespace detail

inline ParseResult parse_saif(std::string_view text, const ParseOptions& opts = {}) {
    return detail::Parser(text, opts).run();
}

// Sum of TC over one instance's nets, optionally including every descendant.
inline std::uint64_t block_tc(const ActivityTree& tree, std::string_view path, bool recursive) {
    const InstanceNode& node = tree.find(path);
    return recursive ? detail::subtree_tc(node) : detail::own_tc(node);
}

inline std::string emit_saif(const ActivityTree& tree) {
    std::string out = "(SAIFILE\n";
    for (const auto& h : tree.headers) {
        out += "  (" + h.keyword;
        for (const auto& a : h.atoms) {
            out += ' ';
            out += a.quoted ? "\"" + detail::escape_string(a.text) + "\"" : detail::escape_identifier(a.text);
        }
        out += ")\n";
    }
    detail::emit_instance(tree.root, 2, out);
    out += ")\n";
    return out;
}

}  // namespace rtlpsc::saif
