#pragma once

// Vulnerable-block identification: fit per-(block, cycle) Gaussians for a key
// pair, compute KL and success-rate grids, normalize, threshold.

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "rtlpsc/metrics.hpp"
#include "rtlpsc/profile.hpp"
#include "rtlpsc/stimulus.hpp"

namespace rtlpsc::assess {

inline constexpr std::uint64_t kDefaultSeed = 20180601;
inline constexpr const char* kToolVersion = "0.1.0";

struct AssessmentConfig {
    std::size_t n_plaintexts = 1000;
    std::size_t cycle_window = rtl::kWindow;
    std::size_t key_ref = 0;  // ladder indices
    std::size_t key_alt = 16;
    bool chain_per_key = true;
    bool carry_state = true;
    bool ladder = false;

    double sr_threshold = 0.95;
    std::size_t sr_n = 25;
    double kl_norm_threshold = 0.5;
    std::optional<double> kl_threshold;  // derived from sr_threshold at sr_n when unset
    double suitability_threshold = 0.9;

    bool symmetric_kl = false;
    bool block_sr = true;
    std::size_t mc_trials = 10000;
    std::uint64_t rng_seed = kDefaultSeed;
    std::size_t bootstrap_resamples = 1000;

    std::size_t first_round_cycle = 1;  // 0-based

    void validate() const {
        auto prob = [](double v, const char* name) {
            if (!(v > 0.0 && v <= 1.0)) throw ConfigError(std::string(name) + " must be in (0, 1]");
        };
        prob(sr_threshold, "sr_threshold");
        prob(kl_norm_threshold, "kl_norm_threshold");
        if (!(suitability_threshold >= -1.0 && suitability_threshold <= 1.0))
            throw ConfigError("suitability_threshold must be in [-1, 1]");
        if (n_plaintexts < 2) throw ConfigError("n_plaintexts must be at least 2");
        if (cycle_window < 1 || cycle_window > rtl::kWindow)
            throw ConfigError("cycle_window must be in 1.." + std::to_string(rtl::kWindow));
        if (key_ref >= stimulus::kLadderSize || key_alt >= stimulus::kLadderSize)
            throw ConfigError("key_ref and key_alt must be ladder indices 0..16");
        if (sr_n < 1) throw ConfigError("sr_n must be at least 1");
        if (mc_trials < 1) throw ConfigError("mc_trials must be at least 1");
        if (bootstrap_resamples < 1) throw ConfigError("bootstrap_resamples must be at least 1");
        if (kl_threshold && !(*kl_threshold > 0.0)) throw ConfigError("kl_threshold must be positive");
        if (first_round_cycle >= cycle_window) throw ConfigError("first_round_cycle must lie inside the cycle window");
    }
};

struct Source {
    std::optional<rtl::Architecture> arch;
    std::optional<std::filesystem::path> saif_dir;
    bool strict = false;
};

struct Cell {
    metrics::GaussianModel f0;
    metrics::GaussianModel f1;
    double kl = 0.0;          // D(f0||f1), or the symmetric variant
    double kl_reverse = 0.0;  // D(f1||f0)
    std::optional<double> kl_norm;  // absent for the design block
    std::optional<metrics::SrPoint> sr;
};

enum class Criterion { KlNorm, KlAbs, Sr };

inline const char* to_string(Criterion c) {
    switch (c) {
        case Criterion::KlNorm: return "kl_norm";
        case Criterion::KlAbs: return "kl_abs";
        case Criterion::Sr: return "sr";
    }
    return "?";
}

struct VulnerableEntry {
    std::size_t block = 0;
    std::size_t cycle = 0;
    std::vector<Criterion> criteria;
};

struct LeakageReport {
    std::string design_id;
    std::string source;  // "builtin:gf", "builtin:lut" or "saif"
    std::string key_ref;
    std::string key_alt;
    std::size_t n = 0;
    std::size_t cycles = 0;
    bool per_cycle = true;
    std::vector<std::string> blocks;
    std::vector<std::vector<Cell>> cells;  // [block][cycle]
    std::vector<metrics::Interval> design_kl_ci;
    double kl_threshold = 0.0;
    bool kl_threshold_derived = true;
    std::vector<VulnerableEntry> vulnerable;
    std::optional<stimulus::SuitabilityVerdict> suitability;
    std::vector<std::string> warnings;
    std::map<std::string, std::string> digests;
    AssessmentConfig config;

    std::vector<double> design_kl() const {
        std::vector<double> v;
        for (const auto& c : cells.at(0)) v.push_back(c.kl);
        return v;
    }

    bool is_vulnerable(std::size_t block, std::size_t cycle) const {
        for (const auto& e : vulnerable)
            if (e.block == block && e.cycle == cycle) return true;
        return false;
    }
};

inline std::vector<double> per_cycle_design_kl(const SwitchingProfile& p0, const SwitchingProfile& p1) {
    if (!p0.same_grid(p1)) throw GridMismatch("profiles " + p0.key_id + " and " + p1.key_id + " differ in grid");
    std::vector<double> out(p0.cycles);
    for (std::size_t c = 0; c < p0.cycles; ++c)
        out[c] = metrics::kl_divergence(metrics::fit_gaussian(p0.samples(0, c)), metrics::fit_gaussian(p1.samples(0, c)));
    return out;
}

// Divides every entry by the grid maximum; an all-zero grid stays zero.
inline std::vector<std::vector<double>> normalize_kl(const std::vector<std::vector<double>>& grid) {
    double mx = 0.0;
    for (const auto& row : grid)
        for (double v : row) mx = std::max(mx, v);
    auto out = grid;
    for (auto& row : out)
        for (double& v : row) v = mx > 0.0 ? v / mx : 0.0;
    return out;
}

// Sub-blocks are judged by normalized KL (strict >) or SR at sr_n (strict >).
// The design block carries no normalized value and is judged by the absolute
// KL threshold or SR instead.
inline std::vector<VulnerableEntry> identify_vulnerable(const LeakageReport& r, const AssessmentConfig& cfg) {
    std::vector<VulnerableEntry> out;
    for (std::size_t b = 0; b < r.cells.size(); ++b) {
        for (std::size_t c = 0; c < r.cells[b].size(); ++c) {
            const Cell& cell = r.cells[b][c];
            VulnerableEntry e{b, c, {}};
            if (cell.kl_norm && *cell.kl_norm > cfg.kl_norm_threshold) e.criteria.push_back(Criterion::KlNorm);
            if (!cell.kl_norm && cell.kl > r.kl_threshold) e.criteria.push_back(Criterion::KlAbs);
            if (cell.sr && cell.sr->sr > cfg.sr_threshold) e.criteria.push_back(Criterion::Sr);
            if (!e.criteria.empty()) out.push_back(std::move(e));
        }
    }
    return out;
}

inline bool criterion_holds(const LeakageReport& r, const VulnerableEntry& e, Criterion c) {
    const Cell& cell = r.cells.at(e.block).at(e.cycle);
    switch (c) {
        case Criterion::KlNorm: return cell.kl_norm && *cell.kl_norm > r.config.kl_norm_threshold;
        case Criterion::KlAbs: return cell.kl > r.kl_threshold;
        case Criterion::Sr: return cell.sr && cell.sr->sr > r.config.sr_threshold;
    }
    return false;
}

namespace detail {

inline std::vector<std::vector<double>> sub_block_grid(const LeakageReport& r, bool reverse) {
    std::vector<std::vector<double>> g;
    for (std::size_t b = 1; b < r.cells.size(); ++b) {
        auto& row = g.emplace_back();
        for (const auto& c : r.cells[b]) row.push_back(reverse ? c.kl_reverse : c.kl);
    }
    return g;
}

inline SwitchingProfile truncate_cycles(SwitchingProfile p, std::size_t window) {
    if (window >= p.cycles) return p;
    SwitchingProfile t = p;
    t.cycles = window;
    t.allocate();
    for (std::size_t b = 0; b < p.blocks.size(); ++b)
        for (std::size_t c = 0; c < window; ++c)
            for (std::size_t j = 0; j < p.n; ++j) t.at(b, c, j) = p.samples(b, c)[j];
    return t;
}

inline std::string chain_digest(std::span<const AesBlock> pts) {
    Sha256 h;
    for (const auto& p : pts) h.update(std::string_view(reinterpret_cast<const char*>(p.bytes.data()), p.bytes.size()));
    return h.finish();
}

}  // namespace detail

// Fits, KL and SR for every (block, cycle) of a matching profile pair.
inline LeakageReport evaluate_profiles(const SwitchingProfile& p0, const SwitchingProfile& p1,
                                       const AssessmentConfig& cfg, unsigned jobs) {
    if (!p0.same_grid(p1)) throw GridMismatch("profiles " + p0.key_id + " and " + p1.key_id + " differ in grid");
    LeakageReport r;
    r.design_id = p0.design_id;
    r.n = p0.n;
    r.cycles = p0.cycles;
    r.per_cycle = p0.per_cycle;
    r.blocks = p0.blocks;
    r.config = cfg;
    r.cells.assign(r.blocks.size(), std::vector<Cell>(r.cycles));

    const std::size_t ncells = r.blocks.size() * r.cycles;
    parallel_for(ncells, jobs, [&](std::size_t i) {
        const std::size_t b = i / r.cycles;
        const std::size_t c = i % r.cycles;
        Cell& cell = r.cells[b][c];
        cell.f0 = metrics::fit_gaussian(p0.samples(b, c));
        cell.f1 = metrics::fit_gaussian(p1.samples(b, c));
        const double fwd = metrics::kl_divergence(cell.f0, cell.f1);
        cell.kl_reverse = metrics::kl_divergence(cell.f1, cell.f0);
        cell.kl = cfg.symmetric_kl ? 0.5 * (fwd + cell.kl_reverse) : fwd;
        if (b == 0 || cfg.block_sr)
            cell.sr = metrics::success_rate(cell.f0, cell.f1, cfg.sr_n, cfg.mc_trials,
                                            metrics::derive_seed(cfg.rng_seed, 0x10000 + i), 1);
    });

    if (cfg.kl_threshold) {
        r.kl_threshold = *cfg.kl_threshold;
        r.kl_threshold_derived = false;
    } else {
        r.kl_threshold = metrics::kl_for_success_rate(cfg.sr_threshold, cfg.sr_n, cfg.mc_trials, cfg.rng_seed, jobs);
    }

    const auto norm = normalize_kl(detail::sub_block_grid(r, false));
    for (std::size_t b = 1; b < r.blocks.size(); ++b)
        for (std::size_t c = 0; c < r.cycles; ++c) r.cells[b][c].kl_norm = norm[b - 1][c];
    r.vulnerable = identify_vulnerable(r, cfg);

    // Compare the KL-criterion flags against the reverse divergence direction.
    if (!cfg.symmetric_kl && r.blocks.size() > 1) {
        const auto rev = normalize_kl(detail::sub_block_grid(r, true));
        std::vector<std::string> only_fwd, only_rev;
        for (std::size_t b = 1; b < r.blocks.size(); ++b) {
            for (std::size_t c = 0; c < r.cycles; ++c) {
                const bool f = norm[b - 1][c] > cfg.kl_norm_threshold;
                const bool v = rev[b - 1][c] > cfg.kl_norm_threshold;
                const std::string label = r.blocks[b] + "@" + std::to_string(c + 1);
                if (f && !v) only_fwd.push_back(label);
                if (v && !f) only_rev.push_back(label);
            }
        }
        auto join = [](const std::vector<std::string>& v) {
            std::string s;
            for (std::size_t i = 0; i < v.size() && i < 8; ++i) s += (i ? ", " : "") + v[i];
            if (v.size() > 8) s += ", ... (" + std::to_string(v.size()) + " total)";
            return s;
        };
        if (!only_fwd.empty())
            r.warnings.push_back("key symmetry: flagged by D(ref||alt) only: " + join(only_fwd));
        if (!only_rev.empty())
            r.warnings.push_back("key symmetry: flagged by D(alt||ref) only: " + join(only_rev));
    }

    r.design_kl_ci.resize(r.cycles);
    parallel_for(r.cycles, jobs, [&](std::size_t c) {
        r.design_kl_ci[c] = metrics::bootstrap_kl_interval(p0.samples(0, c), p1.samples(0, c), cfg.bootstrap_resamples,
                                                           metrics::derive_seed(cfg.rng_seed, 0x20000 + c));
    });
    return r;
}

inline double window_design_kl(const SwitchingProfile& p0, const SwitchingProfile& p1) {
    double s = 0.0;
    for (double v : per_cycle_design_kl(p0, p1)) s += v;
    return s;
}

// KL summed over the window between Key_0 and each Key_i, i = 1..16.
inline std::vector<double> ladder_kl(rtl::Architecture arch, const AssessmentConfig& cfg, unsigned jobs,
                                     const SwitchingProfile* key0_profile = nullptr) {
    const auto ladder = stimulus::build_key_ladder();
    const auto chain0 = stimulus::plaintext_chain(ladder[0], cfg.n_plaintexts);
    SwitchingProfile p0 = key0_profile ? *key0_profile
                                       : detail::truncate_cycles(collect_builtin(arch, ladder[0], chain0.plaintexts,
                                                                                cfg.carry_state, jobs, "key0"),
                                                                 cfg.cycle_window);
    std::vector<double> out;
    for (std::size_t i = 1; i < stimulus::kLadderSize; ++i) {
        const auto chain =
            cfg.chain_per_key ? stimulus::plaintext_chain(ladder[i], cfg.n_plaintexts) : chain0;
        const auto pi = detail::truncate_cycles(
            collect_builtin(arch, ladder[i], chain.plaintexts, cfg.carry_state, jobs, "key" + std::to_string(i)),
            cfg.cycle_window);
        out.push_back(window_design_kl(p0, pi));
    }
    return out;
}

struct ProfilePair {
    SwitchingProfile ref;
    SwitchingProfile alt;
    std::string key_ref;
    std::string key_alt;
    std::map<std::string, std::string> digests;
    std::vector<std::string> warnings;
};

inline ProfilePair builtin_profiles(rtl::Architecture arch, const AssessmentConfig& cfg, unsigned jobs) {
    const auto ladder = stimulus::build_key_ladder();
    const AesKey& k0 = ladder[cfg.key_ref];
    const AesKey& k1 = ladder[cfg.key_alt];
    const auto c0 = stimulus::plaintext_chain(k0, cfg.n_plaintexts);
    const auto c1 = cfg.chain_per_key ? stimulus::plaintext_chain(k1, cfg.n_plaintexts) : c0;
    ProfilePair pp;
    pp.ref = detail::truncate_cycles(collect_builtin(arch, k0, c0.plaintexts, cfg.carry_state, jobs,
                                                     "key" + std::to_string(cfg.key_ref)),
                                     cfg.cycle_window);
    pp.alt = detail::truncate_cycles(collect_builtin(arch, k1, c1.plaintexts, cfg.carry_state, jobs,
                                                     "key" + std::to_string(cfg.key_alt)),
                                     cfg.cycle_window);
    pp.key_ref = k0.hex();
    pp.key_alt = k1.hex();
    pp.digests["plaintexts_ref"] = detail::chain_digest(c0.plaintexts);
    pp.digests["plaintexts_alt"] = detail::chain_digest(c1.plaintexts);
    return pp;
}

inline ProfilePair saif_profiles(const std::filesystem::path& dir, const AssessmentConfig& cfg, bool strict,
                                 unsigned jobs) {
    const auto m = read_manifest(dir);
    ProfilePair pp;
    auto a = collect_saif(dir, m, 0, strict, jobs);
    auto b = collect_saif(dir, m, 1, strict, jobs);
    if (m.per_cycle && m.cycle_window > cfg.cycle_window) {
        a.profile = detail::truncate_cycles(std::move(a.profile), cfg.cycle_window);
        b.profile = detail::truncate_cycles(std::move(b.profile), cfg.cycle_window);
    }
    pp.ref = std::move(a.profile);
    pp.alt = std::move(b.profile);
    pp.key_ref = m.key_values.size() == 2 ? m.key_values[0] : m.keys[0];
    pp.key_alt = m.key_values.size() == 2 ? m.key_values[1] : m.keys[1];
    pp.digests["manifest"] = sha256_hex(read_file(dir / "manifest.json"));
    pp.digests["saif_ref"] = a.digest;
    pp.digests["saif_alt"] = b.digest;
    if (m.n != cfg.n_plaintexts)
        pp.warnings.push_back("manifest n=" + std::to_string(m.n) + " overrides n_plaintexts=" +
                              std::to_string(cfg.n_plaintexts));
    if (!m.per_cycle) pp.warnings.push_back("whole-encryption SAIF files: per-cycle analysis unavailable");
    const std::size_t limit = 20;
    for (auto* ws : {&a.warnings, &b.warnings}) {
        for (std::size_t i = 0; i < ws->size() && i < limit; ++i) pp.warnings.push_back("saif " + (*ws)[i]);
        if (ws->size() > limit)
            pp.warnings.push_back("saif: " + std::to_string(ws->size() - limit) + " further parser warnings");
    }
    return pp;
}

inline LeakageReport run_assessment(const AssessmentConfig& cfg, const Source& src, unsigned jobs = default_jobs()) {
    cfg.validate();
    if (src.arch.has_value() == src.saif_dir.has_value())
        throw ConfigError("exactly one of a builtin architecture or a SAIF directory is required");
    ProfilePair pp = src.arch ? builtin_profiles(*src.arch, cfg, jobs) : saif_profiles(*src.saif_dir, cfg, src.strict, jobs);
    if (pp.ref.per_cycle && cfg.first_round_cycle >= pp.ref.cycles)
        throw ConfigError("first_round_cycle lies outside the collected window");
    LeakageReport r = evaluate_profiles(pp.ref, pp.alt, cfg, jobs);
    r.source = src.arch ? "builtin:" + std::string(rtl::to_string(*src.arch)) : std::string("saif");
    r.key_ref = pp.key_ref;
    r.key_alt = pp.key_alt;
    r.digests = pp.digests;
    r.warnings.insert(r.warnings.begin(), pp.warnings.begin(), pp.warnings.end());
    if (cfg.ladder) {
        if (src.arch) {
            const SwitchingProfile* key0 = cfg.key_ref == 0 ? &pp.ref : nullptr;
            const auto kls = ladder_kl(*src.arch, cfg, jobs, key0);
            r.suitability = stimulus::check_key_pair_suitability(kls, cfg.suitability_threshold);
            if (!r.suitability->pass)
                r.warnings.push_back("key ladder KL is not rank-increasing; the key pair may be unsuitable");
        } else {
            r.warnings.push_back("ladder check needs a builtin architecture; skipped");
        }
    }
    return r;
}

struct CorrelationReport {
    double pearson = 0.0;
    std::vector<double> deltas;  // b - a
};

inline CorrelationReport correlate_levels(std::span<const double> a, std::span<const double> b) {
    CorrelationReport r;
    r.pearson = metrics::pearson(a, b);
    for (std::size_t i = 0; i < a.size(); ++i) r.deltas.push_back(b[i] - a[i]);
    return r;
}

}  // namespace rtlpsc::assess
