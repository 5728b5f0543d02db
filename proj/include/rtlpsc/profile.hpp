#pragma once

// Switching profiles: toggle-count samples per (block, cycle) over a plaintext
// chain, gathered either from the built-in cycle models or from a directory of
// SAIF files.
//
// SAIF directory layout:
//
//   <dir>/manifest.json
//   <dir>/<key_id>/p<j>_c<c>.saif    one file per plaintext j and cycle c (0-based)
//   <dir>/<key_id>/p<j>.saif         whole-encryption files when per_cycle is false

#include <filesystem>
#include <fstream>
#include <optional>
#include <span>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"
#include "rtlpsc/digest.hpp"
#include "rtlpsc/parallel.hpp"
#include "rtlpsc/rtl_model.hpp"
#include "rtlpsc/saif.hpp"

namespace rtlpsc::assess {

struct SwitchingProfile {
    std::string design_id;
    std::string key_id;
    std::vector<std::string> blocks;  // blocks[0] is the design itself
    std::size_t n = 0;
    std::size_t cycles = 0;
    bool per_cycle = true;
    std::vector<std::uint32_t> counts;  // [(block * cycles + cycle) * n + plaintext]

    void allocate() { counts.assign(blocks.size() * cycles * n, 0); }

    std::uint32_t& at(std::size_t block, std::size_t cycle, std::size_t j) {
        return counts[(block * cycles + cycle) * n + j];
    }

    std::span<const std::uint32_t> samples(std::size_t block, std::size_t cycle) const {
        return {counts.data() + (block * cycles + cycle) * n, n};
    }

    bool same_grid(const SwitchingProfile& o) const {
        return blocks == o.blocks && n == o.n && cycles == o.cycles && per_cycle == o.per_cycle;
    }

    friend bool operator==(const SwitchingProfile&, const SwitchingProfile&) = default;
};

inline SwitchingProfile empty_profile(const rtl::DesignModel& model, std::string key_id, std::size_t n) {
    SwitchingProfile p;
    p.design_id = model.design_id();
    p.key_id = std::move(key_id);
    for (const auto& b : model.blocks()) p.blocks.push_back(b.path);
    p.n = n;
    p.cycles = rtl::kWindow;
    p.allocate();
    return p;
}

// Runs fn(j, trace) for every plaintext in order within each worker's chunk.
// With carry_state the model is not reset between plaintexts; a chunk starting
// at j > 0 first replays plaintext j-1, which fully determines the model state,
// so chunking does not change any trace.
template <class Fn>
void simulate_chain(rtl::Architecture arch, const AesKey& key, std::span<const AesBlock> plaintexts, bool carry_state,
                    unsigned jobs, Fn&& fn) {
    const std::size_t n = plaintexts.size();
    const std::size_t chunks = std::max<std::size_t>(1, std::min<std::size_t>(jobs, n));
    const std::size_t per = (n + chunks - 1) / chunks;
    parallel_for(chunks, jobs, [&](std::size_t chunk) {
        const std::size_t begin = chunk * per;
        const std::size_t end = std::min(n, begin + per);
        if (begin >= end) return;
        auto model = rtl::make_model(arch);
        model->reset();
        model->load_key(key);
        if (carry_state && begin > 0) model->encrypt(plaintexts[begin - 1]);
        for (std::size_t j = begin; j < end; ++j) {
            if (!carry_state && j > begin) {
                model->reset();
                model->load_key(key);
            }
            fn(j, model->encrypt(plaintexts[j]), *model);
        }
    });
}

inline SwitchingProfile collect_builtin(rtl::Architecture arch, const AesKey& key, std::span<const AesBlock> plaintexts,
                                        bool carry_state, unsigned jobs, std::string key_id) {
    const auto proto = rtl::make_model(arch);
    SwitchingProfile p = empty_profile(*proto, std::move(key_id), plaintexts.size());
    simulate_chain(arch, key, plaintexts, carry_state, jobs,
                   [&](std::size_t j, const rtl::CycleTrace& trace, const rtl::DesignModel&) {
                       for (std::size_t b = 0; b < p.blocks.size(); ++b)
                           for (std::size_t c = 0; c < p.cycles; ++c) p.at(b, c, j) = trace.count(b, c);
                   });
    return p;
}

struct SaifManifest {
    std::string design_id;
    std::vector<std::string> keys;    // directory names; keys[0] is the reference key
    std::vector<std::string> key_values;  // optional hex values, same order
    std::vector<std::string> blocks;  // paths of interest; the design root is prepended if absent
    std::size_t n = 0;
    std::size_t cycle_window = rtl::kWindow;
    bool per_cycle = true;
};

inline std::string saif_file_name(std::size_t plaintext, std::optional<std::size_t> cycle) {
    std::string s = "p" + std::to_string(plaintext);
    if (cycle) s += "_c" + std::to_string(*cycle);
    return s + ".saif";
}

inline std::string read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw MissingFile(path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return std::move(ss).str();
}

inline void write_file(const std::filesystem::path& path, std::string_view text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("cannot write " + path.string());
    out << text;
    if (!out) throw Error("write failed: " + path.string());
}

inline SaifManifest read_manifest(const std::filesystem::path& dir) {
    const auto path = dir / "manifest.json";
    if (!std::filesystem::exists(path)) throw MissingFile(path.string());
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(read_file(path));
    } catch (const nlohmann::json::exception& e) {
        throw Error("invalid manifest " + path.string() + ": " + e.what());
    }
    static const std::vector<std::string> known = {"design_id", "keys", "key_values", "blocks", "n", "cycle_window", "per_cycle"};
    for (auto it = j.begin(); it != j.end(); ++it)
        if (std::find(known.begin(), known.end(), it.key()) == known.end())
            throw Error("manifest: unknown key '" + it.key() + "'");
    SaifManifest m;
    try {
        m.design_id = j.at("design_id").get<std::string>();
        m.keys = j.value("keys", std::vector<std::string>{"key0", "key1"});
        m.key_values = j.value("key_values", std::vector<std::string>{});
        m.blocks = j.value("blocks", std::vector<std::string>{});
        m.n = j.at("n").get<std::size_t>();
        m.cycle_window = j.value("cycle_window", rtl::kWindow);
        m.per_cycle = j.value("per_cycle", true);
    } catch (const nlohmann::json::exception& e) {
        throw Error("manifest " + path.string() + ": " + e.what());
    }
    if (m.keys.size() != 2) throw Error("manifest: exactly two key directories expected");
    if (m.n < 2) throw Error("manifest: n must be at least 2");
    if (m.cycle_window < 1) throw Error("manifest: cycle_window must be positive");
    if (m.blocks.empty() || m.blocks.front() != m.design_id) m.blocks.insert(m.blocks.begin(), m.design_id);
    return m;
}

inline void write_manifest(const std::filesystem::path& dir, const SaifManifest& m) {
    nlohmann::ordered_json j;
    j["design_id"] = m.design_id;
    j["keys"] = m.keys;
    if (!m.key_values.empty()) j["key_values"] = m.key_values;
    j["blocks"] = m.blocks;
    j["n"] = m.n;
    j["cycle_window"] = m.cycle_window;
    j["per_cycle"] = m.per_cycle;
    write_file(dir / "manifest.json", j.dump(2) + "\n");
}

struct SaifCollection {
    SwitchingProfile profile;
    std::string digest;  // over every file read, in plaintext/cycle order
    std::vector<std::string> warnings;
};

inline SaifCollection collect_saif(const std::filesystem::path& dir, const SaifManifest& m, std::size_t key_slot,
                                   bool strict, unsigned jobs) {
    SaifCollection out;
    auto& p = out.profile;
    p.design_id = m.design_id;
    p.key_id = m.keys.at(key_slot);
    p.blocks = m.blocks;
    p.n = m.n;
    p.per_cycle = m.per_cycle;
    p.cycles = m.per_cycle ? m.cycle_window : 1;
    p.allocate();

    const auto key_dir = dir / p.key_id;
    const std::size_t files_per_pt = p.cycles;
    std::vector<std::string> digests(p.n * files_per_pt);
    std::vector<std::vector<std::string>> warnings(p.n);
    parallel_for(p.n, jobs, [&](std::size_t j) {
        for (std::size_t c = 0; c < files_per_pt; ++c) {
            const auto path = key_dir / saif_file_name(j, m.per_cycle ? std::optional<std::size_t>(c) : std::nullopt);
            if (!std::filesystem::exists(path))
                throw MissingFile(path.string(), j, m.per_cycle ? std::optional<std::size_t>(c) : std::nullopt);
            const std::string text = read_file(path);
            digests[j * files_per_pt + c] = sha256_hex(text);
            saif::ParseResult parsed;
            try {
                parsed = saif::parse_saif(text, {.strict = strict});
            } catch (const Error& e) {
                throw Error(path.string() + ": " + e.what());
            }
            for (auto& w : parsed.warnings) warnings[j].push_back(path.filename().string() + ":" + w);
            for (std::size_t b = 0; b < p.blocks.size(); ++b) {
                try {
                    p.at(b, c, j) = static_cast<std::uint32_t>(saif::block_tc(parsed.tree, p.blocks[b], true));
                } catch (const PathNotFound&) {
                    throw GridMismatch(path.string() + ": block " + p.blocks[b] + " not present");
                }
            }
        }
    });
    Sha256 all;
    for (const auto& d : digests) all.update(d);
    out.digest = all.finish();
    for (auto& w : warnings) out.warnings.insert(out.warnings.end(), w.begin(), w.end());
    return out;
}

// Simulates both keys with the built-in model and writes the SAIF directory
// that collect_saif reads back.
inline SaifManifest write_saif_directory(const std::filesystem::path& dir, rtl::Architecture arch,
                                         const std::array<AesKey, 2>& keys,
                                         const std::array<std::vector<AesBlock>, 2>& chains, bool carry_state,
                                         bool per_cycle, unsigned jobs) {
    const auto proto = rtl::make_model(arch);
    SaifManifest m;
    m.design_id = proto->design_id();
    m.keys = {"key_ref", "key_alt"};
    m.key_values = {keys[0].hex(), keys[1].hex()};
    for (const auto& b : proto->blocks()) m.blocks.push_back(b.path);
    m.n = chains[0].size();
    m.cycle_window = rtl::kWindow;
    m.per_cycle = per_cycle;
    if (chains[1].size() != m.n) throw GridMismatch("plaintext chains differ in length");
    std::filesystem::create_directories(dir);
    for (std::size_t k = 0; k < 2; ++k) {
        const auto key_dir = dir / m.keys[k];
        std::filesystem::create_directories(key_dir);
        simulate_chain(arch, keys[k], chains[k], carry_state, jobs,
                       [&](std::size_t j, const rtl::CycleTrace& trace, const rtl::DesignModel& model) {
                           if (per_cycle) {
                               for (std::size_t c = 0; c < trace.cycles(); ++c)
                                   write_file(key_dir / saif_file_name(j, c),
                                              saif::emit_saif(rtl::export_cycle_saif(trace, model, c)));
                           } else {
                               write_file(key_dir / saif_file_name(j, std::nullopt),
                                          saif::emit_saif(rtl::export_trace_saif(trace, model)));
                           }
                       });
    }
    write_manifest(dir, m);
    return m;
}

}  // namespace rtlpsc::assess
