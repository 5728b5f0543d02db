#pragma once

// Report serialization (JSON, CSV, text), config files, KL-vector CSV input and
// SAIF listing/diff helpers used by the command-line tool.

#include <charconv>
#include <cstdio>
#include <iomanip>
#include <set>
#include <sstream>

#include "json.hpp"
#include "rtlpsc/assessment.hpp"

namespace rtlpsc::report {

using ojson = nlohmann::ordered_json;

// Shortest decimal string that parses back to the same double.
inline std::string format_number(double v) {
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, res.ptr);
}

inline std::string short_number(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.6g", v);
    return buf;
}

inline double parse_number(std::string_view s) {
    double v = 0.0;
    while (!s.empty() && s.front() == ' ') s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\r')) s.remove_suffix(1);
    if (!s.empty() && s.front() == '+') s.remove_prefix(1);
    const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
    if (res.ec != std::errc() || res.ptr != s.data() + s.size())
        throw Error("not a number: '" + std::string(s) + "'");
    return v;
}

// ---- configuration -------------------------------------------------------

inline ojson config_to_json(const assess::AssessmentConfig& c) {
    ojson j;
    j["stimulus"] = {{"n_plaintexts", c.n_plaintexts},
                     {"key_ref", c.key_ref},
                     {"key_alt", c.key_alt},
                     {"chain_per_key", c.chain_per_key},
                     {"ladder", c.ladder}};
    j["model"] = {{"cycle_window", c.cycle_window},
                  {"carry_state", c.carry_state},
                  {"first_round_cycle", c.first_round_cycle + 1}};
    j["thresholds"] = {{"sr_threshold", c.sr_threshold},
                       {"sr_n", c.sr_n},
                       {"kl_norm_threshold", c.kl_norm_threshold},
                       {"kl_threshold", c.kl_threshold ? ojson(*c.kl_threshold) : ojson(nullptr)},
                       {"suitability_threshold", c.suitability_threshold}};
    j["metrics"] = {{"symmetric_kl", c.symmetric_kl},
                    {"block_sr", c.block_sr},
                    {"mc_trials", c.mc_trials},
                    {"rng_seed", c.rng_seed},
                    {"bootstrap_resamples", c.bootstrap_resamples}};
    return j;
}

namespace detail {

template <class T>
void read_field(const nlohmann::json& sec, const std::string& section, const std::string& key, T& out) {
    const auto it = sec.find(key);
    if (it == sec.end()) return;
    try {
        if constexpr (std::is_same_v<T, bool>) {
            if (!it->is_boolean()) throw ConfigError("");
        } else if constexpr (std::is_integral_v<T>) {
            if (!it->is_number_unsigned()) throw ConfigError("");
        } else {
            if (!it->is_number()) throw ConfigError("");
        }
        out = it->get<T>();
    } catch (const std::exception&) {
        throw ConfigError("config key '" + section + "." + key + "' has the wrong type");
    }
}

}  // namespace detail

// Applies a (possibly partial) config document on top of `base`. Unknown
// sections or keys are rejected by name.
inline assess::AssessmentConfig config_from_json(const nlohmann::json& j, assess::AssessmentConfig base = {}) {
    static const std::map<std::string, std::set<std::string>> schema = {
        {"stimulus", {"n_plaintexts", "key_ref", "key_alt", "chain_per_key", "ladder"}},
        {"model", {"cycle_window", "carry_state", "first_round_cycle"}},
        {"thresholds", {"sr_threshold", "sr_n", "kl_norm_threshold", "kl_threshold", "suitability_threshold"}},
        {"metrics", {"symmetric_kl", "block_sr", "mc_trials", "rng_seed", "bootstrap_resamples"}},
    };
    if (!j.is_object()) throw ConfigError("config must be a JSON object");
    for (auto it = j.begin(); it != j.end(); ++it) {
        const auto s = schema.find(it.key());
        if (s == schema.end()) throw ConfigError("unknown config key '" + it.key() + "'");
        if (!it->is_object()) throw ConfigError("config section '" + it.key() + "' must be an object");
        for (auto k = it->begin(); k != it->end(); ++k)
            if (!s->second.count(k.key())) throw ConfigError("unknown config key '" + it.key() + "." + k.key() + "'");
    }
    auto& c = base;
    const nlohmann::json empty = nlohmann::json::object();
    auto sec = [&](const char* name) -> const nlohmann::json& { return j.contains(name) ? j.at(name) : empty; };

    detail::read_field(sec("stimulus"), "stimulus", "n_plaintexts", c.n_plaintexts);
    detail::read_field(sec("stimulus"), "stimulus", "key_ref", c.key_ref);
    detail::read_field(sec("stimulus"), "stimulus", "key_alt", c.key_alt);
    detail::read_field(sec("stimulus"), "stimulus", "chain_per_key", c.chain_per_key);
    detail::read_field(sec("stimulus"), "stimulus", "ladder", c.ladder);
    detail::read_field(sec("model"), "model", "cycle_window", c.cycle_window);
    detail::read_field(sec("model"), "model", "carry_state", c.carry_state);
    std::size_t first_round = c.first_round_cycle + 1;
    detail::read_field(sec("model"), "model", "first_round_cycle", first_round);
    if (first_round < 1) throw ConfigError("config key 'model.first_round_cycle' is 1-based");
    c.first_round_cycle = first_round - 1;
    detail::read_field(sec("thresholds"), "thresholds", "sr_threshold", c.sr_threshold);
    detail::read_field(sec("thresholds"), "thresholds", "sr_n", c.sr_n);
    detail::read_field(sec("thresholds"), "thresholds", "kl_norm_threshold", c.kl_norm_threshold);
    if (const auto& t = sec("thresholds"); t.contains("kl_threshold")) {
        if (t.at("kl_threshold").is_null()) {
            c.kl_threshold.reset();
        } else {
            double v = 0.0;
            detail::read_field(t, "thresholds", "kl_threshold", v);
            c.kl_threshold = v;
        }
    }
    detail::read_field(sec("thresholds"), "thresholds", "suitability_threshold", c.suitability_threshold);
    detail::read_field(sec("metrics"), "metrics", "symmetric_kl", c.symmetric_kl);
    detail::read_field(sec("metrics"), "metrics", "block_sr", c.block_sr);
    detail::read_field(sec("metrics"), "metrics", "mc_trials", c.mc_trials);
    detail::read_field(sec("metrics"), "metrics", "rng_seed", c.rng_seed);
    detail::read_field(sec("metrics"), "metrics", "bootstrap_resamples", c.bootstrap_resamples);
    return c;
}

inline assess::AssessmentConfig load_config(const std::filesystem::path& path, assess::AssessmentConfig base = {}) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(assess::read_file(path));
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError("cannot parse " + path.string() + ": " + e.what());
    }
    return config_from_json(j, base);
}

// ---- leakage report ------------------------------------------------------

inline ojson cycle_value(const assess::LeakageReport& r, std::size_t c) {
    return r.per_cycle ? ojson(c + 1) : ojson(nullptr);
}

inline ojson to_json(const assess::LeakageReport& r) {
    ojson j;
    j["tool"] = {{"name", "rtlpsc"}, {"version", assess::kToolVersion}};
    j["cycle_indexing"] = "1-based; cycle 1 loads plaintext XOR round key 0, cycle " +
                          std::to_string(r.config.first_round_cycle + 1) + " is the first round";
    j["design_id"] = r.design_id;
    j["source"] = r.source;
    j["keys"] = {{"ref", r.key_ref}, {"alt", r.key_alt}};
    j["n"] = r.n;
    j["cycles"] = r.cycles;
    j["per_cycle"] = r.per_cycle;
    j["seed"] = r.config.rng_seed;
    j["config"] = config_to_json(r.config);
    j["inputs"] = ojson::object();
    for (const auto& [k, v] : r.digests) j["inputs"][k] = v;
    j["kl_threshold"] = {{"value", r.kl_threshold},
                         {"derived", r.kl_threshold_derived},
                         {"sr_threshold", r.config.sr_threshold},
                         {"sr_n", r.config.sr_n}};

    ojson design = ojson::array();
    for (std::size_t c = 0; c < r.cycles; ++c) {
        const auto& cell = r.cells[0][c];
        design.push_back({{"cycle", cycle_value(r, c)},
                          {"kl", cell.kl},
                          {"ci_low", r.design_kl_ci[c].lo},
                          {"ci_high", r.design_kl_ci[c].hi},
                          {"sr", cell.sr ? ojson(cell.sr->sr) : ojson(nullptr)},
                          {"sr_ci", cell.sr ? ojson(cell.sr->ci_halfwidth) : ojson(nullptr)}});
    }
    j["design"] = {{"path", r.blocks[0]}, {"per_cycle", design}};

    ojson blocks = ojson::array();
    for (std::size_t b = 0; b < r.blocks.size(); ++b) {
        ojson cells = ojson::array();
        for (std::size_t c = 0; c < r.cycles; ++c) {
            const auto& cell = r.cells[b][c];
            cells.push_back({{"cycle", cycle_value(r, c)},
                             {"kl", cell.kl},
                             {"kl_reverse", cell.kl_reverse},
                             {"kl_norm", cell.kl_norm ? ojson(*cell.kl_norm) : ojson(nullptr)},
                             {"sr", cell.sr ? ojson(cell.sr->sr) : ojson(nullptr)},
                             {"sr_ci", cell.sr ? ojson(cell.sr->ci_halfwidth) : ojson(nullptr)},
                             {"mu0", cell.f0.mu},
                             {"var0", cell.f0.sigma2},
                             {"mu1", cell.f1.mu},
                             {"var1", cell.f1.sigma2}});
        }
        blocks.push_back({{"path", r.blocks[b]}, {"cells", cells}});
    }
    j["blocks"] = blocks;

    ojson vul = ojson::array();
    for (const auto& e : r.vulnerable) {
        const auto& cell = r.cells[e.block][e.cycle];
        ojson crit = ojson::array();
        for (auto c : e.criteria) crit.push_back(assess::to_string(c));
        vul.push_back({{"path", r.blocks[e.block]},
                       {"cycle", cycle_value(r, e.cycle)},
                       {"criteria", crit},
                       {"kl", cell.kl},
                       {"kl_norm", cell.kl_norm ? ojson(*cell.kl_norm) : ojson(nullptr)},
                       {"sr", cell.sr ? ojson(cell.sr->sr) : ojson(nullptr)}});
    }
    j["vulnerable"] = vul;

    if (r.suitability) {
        j["suitability"] = {{"kl_ladder", r.suitability->kl_ladder},
                            {"spearman", r.suitability->spearman},
                            {"threshold", r.suitability->threshold},
                            {"pass", r.suitability->pass}};
    } else {
        j["suitability"] = nullptr;
    }
    j["warnings"] = r.warnings;
    return j;
}

inline std::string to_json_text(const assess::LeakageReport& r) { return to_json(r).dump(2) + "\n"; }

inline std::string to_csv(const assess::LeakageReport& r) {
    std::string out = "path,cycle,kl,kl_norm,sr,sr_ci,mu0,var0,mu1,var1,vulnerable\n";
    for (std::size_t b = 0; b < r.blocks.size(); ++b) {
        for (std::size_t c = 0; c < r.cycles; ++c) {
            const auto& cell = r.cells[b][c];
            out += r.blocks[b];
            out += ',';
            if (r.per_cycle) out += std::to_string(c + 1);
            out += ',' + format_number(cell.kl) + ',';
            if (cell.kl_norm) out += format_number(*cell.kl_norm);
            out += ',';
            if (cell.sr) out += format_number(cell.sr->sr);
            out += ',';
            if (cell.sr) out += format_number(cell.sr->ci_halfwidth);
            out += ',' + format_number(cell.f0.mu) + ',' + format_number(cell.f0.sigma2) + ',' +
                   format_number(cell.f1.mu) + ',' + format_number(cell.f1.sigma2) + ',';
            out += r.is_vulnerable(b, c) ? "1" : "0";
            out += '\n';
        }
    }
    return out;
}

inline std::string to_text(const assess::LeakageReport& r) {
    std::ostringstream o;
    o << "design " << r.design_id << " (" << r.source << ")\n";
    o << "keys   ref " << r.key_ref << "\n       alt " << r.key_alt << "\n";
    o << "n=" << r.n << " cycles=" << r.cycles << " seed=" << r.config.rng_seed << "\n";
    o << "kl threshold " << short_number(r.kl_threshold) << (r.kl_threshold_derived ? " (derived: SR " : " (given; SR ")
      << short_number(r.config.sr_threshold) << " at n=" << r.config.sr_n << ")\n";
    o << "cycle numbering is 1-based; cycle " << r.config.first_round_cycle + 1 << " is the first round\n\n";
    o << "design-level KL per cycle\n";
    for (std::size_t c = 0; c < r.cycles; ++c) {
        o << "  " << std::setw(3);
        if (r.per_cycle)
            o << c + 1;
        else
            o << "all";
        o << "  kl " << std::setw(12) << short_number(r.cells[0][c].kl) << "  95% ["
          << short_number(r.design_kl_ci[c].lo) << ", " << short_number(r.design_kl_ci[c].hi) << "]";
        if (r.cells[0][c].sr) o << "  sr " << short_number(r.cells[0][c].sr->sr);
        o << "\n";
    }
    o << "\nvulnerable (" << r.vulnerable.size() << ")\n";
    for (const auto& e : r.vulnerable) {
        const auto& cell = r.cells[e.block][e.cycle];
        o << "  " << r.blocks[e.block] << " @ ";
        if (r.per_cycle)
            o << e.cycle + 1;
        else
            o << "all";
        o << "  [";
        for (std::size_t i = 0; i < e.criteria.size(); ++i) o << (i ? "," : "") << assess::to_string(e.criteria[i]);
        o << "]  kl " << short_number(cell.kl);
        if (cell.kl_norm) o << "  norm " << short_number(*cell.kl_norm);
        if (cell.sr) o << "  sr " << short_number(cell.sr->sr);
        o << "\n";
    }
    if (r.suitability) {
        o << "\nkey ladder: spearman " << short_number(r.suitability->spearman) << " (threshold "
          << short_number(r.suitability->threshold) << ") " << (r.suitability->pass ? "pass" : "FAIL") << "\n";
    }
    if (!r.warnings.empty()) {
        o << "\nwarnings\n";
        for (const auto& w : r.warnings) o << "  " << w << "\n";
    }
    return o.str();
}

// ---- KL vectors from CSV -------------------------------------------------

struct KlEntry {
    std::string path;
    std::string cycle;
    double kl = 0.0;
};

inline std::vector<std::string> split_csv_line(std::string_view line) {
    std::vector<std::string> out;
    std::string cur;
    bool quoted = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
        const char ch = line[i];
        if (quoted) {
            if (ch == '"' && i + 1 < line.size() && line[i + 1] == '"') {
                cur += '"';
                ++i;
            } else if (ch == '"') {
                quoted = false;
            } else {
                cur += ch;
            }
        } else if (ch == '"') {
            quoted = true;
        } else if (ch == ',') {
            out.push_back(std::move(cur));
            cur.clear();
        } else if (ch != '\r') {
            cur += ch;
        }
    }
    out.push_back(std::move(cur));
    return out;
}

// Reads any CSV whose header names path, cycle and kl columns.
inline std::vector<KlEntry> parse_kl_csv(std::string_view text, const std::string& name = "csv") {
    std::vector<KlEntry> out;
    std::istringstream in{std::string(text)};
    std::string line;
    std::size_t lineno = 0;
    std::optional<std::size_t> ip, ic, ik;
    std::size_t width = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty() || line == "\r") continue;
        const auto f = split_csv_line(line);
        if (!ik) {
            for (std::size_t i = 0; i < f.size(); ++i) {
                if (f[i] == "path") ip = i;
                if (f[i] == "cycle") ic = i;
                if (f[i] == "kl") ik = i;
            }
            if (!ip || !ic || !ik) throw Error(name + ": header must contain path, cycle and kl columns");
            width = f.size();
            continue;
        }
        if (f.size() != width) throw Error(name + ":" + std::to_string(lineno) + ": expected " + std::to_string(width) + " fields");
        try {
            out.push_back({f[*ip], f[*ic], parse_number(f[*ik])});
        } catch (const Error& e) {
            throw Error(name + ":" + std::to_string(lineno) + ": " + e.what());
        }
    }
    if (!ik) throw Error(name + ": empty file");
    return out;
}

struct AlignedKl {
    std::vector<std::string> labels;
    std::vector<double> a;
    std::vector<double> b;
};

// Pairs entries by (path, cycle), keeping the order of `a`.
inline AlignedKl align_kl(const std::vector<KlEntry>& a, const std::vector<KlEntry>& b) {
    std::map<std::pair<std::string, std::string>, double> mb;
    for (const auto& e : b) mb[{e.path, e.cycle}] = e.kl;
    AlignedKl out;
    for (const auto& e : a) {
        const auto it = mb.find({e.path, e.cycle});
        if (it == mb.end()) continue;
        out.labels.push_back(e.cycle.empty() ? e.path : e.path + "@" + e.cycle);
        out.a.push_back(e.kl);
        out.b.push_back(it->second);
    }
    if (out.a.size() != a.size() || out.a.size() != b.size()) throw LengthMismatch(a.size(), b.size());
    return out;
}

// ---- SAIF helpers --------------------------------------------------------

inline void list_tree(std::ostream& o, const saif::InstanceNode& node, const std::string& prefix, int depth) {
    const std::string path = prefix.empty() ? node.name : prefix + "." + node.name;
    std::uint64_t own = 0;
    for (const auto& n : node.nets) own += n.tc;
    std::uint64_t total = 0;
    std::vector<const saif::InstanceNode*> stack{&node};
    while (!stack.empty()) {
        const auto* cur = stack.back();
        stack.pop_back();
        for (const auto& n : cur->nets) total += n.tc;
        for (const auto& c : cur->children) stack.push_back(&c);
    }
    o << std::string(static_cast<std::size_t>(depth) * 2, ' ') << node.name << "  nets=" << node.nets.size()
      << " tc=" << own << " tc_total=" << total << "\n";
    for (const auto& c : node.children) list_tree(o, c, path, depth + 1);
}

inline std::string saif_listing(const saif::ActivityTree& t) {
    std::ostringstream o;
    for (const auto& h : t.headers) {
        o << h.keyword;
        for (const auto& a : h.atoms) o << " " << (a.quoted ? "\"" + a.text + "\"" : a.text);
        o << "\n";
    }
    list_tree(o, t.root, "", 0);
    return o.str();
}

inline void collect_paths(const saif::InstanceNode& node, const std::string& prefix,
                          std::map<std::string, std::uint64_t>& out) {
    const std::string path = prefix.empty() ? node.name : prefix + "." + node.name;
    std::uint64_t own = 0;
    for (const auto& n : node.nets) own += n.tc;
    out[path] = own;
    for (const auto& c : node.children) collect_paths(c, path, out);
}

struct SaifDiff {
    std::vector<std::pair<std::string, std::int64_t>> deltas;  // b - a, recursive totals
    std::vector<std::string> only_a;
    std::vector<std::string> only_b;
};

inline SaifDiff saif_diff(const saif::ActivityTree& a, const saif::ActivityTree& b) {
    std::map<std::string, std::uint64_t> pa, pb;
    collect_paths(a.root, "", pa);
    collect_paths(b.root, "", pb);
    SaifDiff d;
    for (const auto& [path, _] : pa) {
        if (!pb.count(path)) {
            d.only_a.push_back(path);
            continue;
        }
        const auto ta = saif::block_tc(a, path, true);
        const auto tb = saif::block_tc(b, path, true);
        d.deltas.emplace_back(path, static_cast<std::int64_t>(tb) - static_cast<std::int64_t>(ta));
    }
    for (const auto& [path, _] : pb)
        if (!pa.count(path)) d.only_b.push_back(path);
    return d;
}

}  // namespace rtlpsc::report
