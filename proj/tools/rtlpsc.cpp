// rtlpsc: power side-channel leakage assessment for RTL AES designs.

#include <cstdlib>
#include <iostream>

#include "CLI11.hpp"
#include "rtlpsc/rtlpsc.hpp"

namespace fs = std::filesystem;
using namespace rtlpsc;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitError = 1;
constexpr int kExitVulnerable = 2;

std::uint64_t seed_from_env(std::uint64_t fallback) {
    const char* s = std::getenv("RTLPSC_SEED");
    if (!s || !*s) return fallback;
    std::uint64_t v = 0;
    const std::string_view sv(s);
    const auto res = std::from_chars(sv.data(), sv.data() + sv.size(), v);
    if (res.ec != std::errc() || res.ptr != sv.data() + sv.size())
        throw ConfigError("RTLPSC_SEED must be an unsigned integer, got '" + std::string(sv) + "'");
    return v;
}

// "1..200", "10..100:10" or "5,10,25".
std::vector<std::size_t> parse_n_grid(const std::string& text) {
    std::vector<std::size_t> out;
    auto num = [&](std::string_view s) {
        std::size_t v = 0;
        const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
        if (res.ec != std::errc() || res.ptr != s.data() + s.size() || s.empty())
            throw ConfigError("bad plaintext count '" + std::string(s) + "' in '" + text + "'");
        return v;
    };
    const auto dots = text.find("..");
    if (dots != std::string::npos) {
        std::string_view rest = std::string_view(text).substr(dots + 2);
        std::size_t step = 1;
        if (const auto colon = rest.find(':'); colon != std::string_view::npos) {
            step = num(rest.substr(colon + 1));
            rest = rest.substr(0, colon);
        }
        const std::size_t lo = num(std::string_view(text).substr(0, dots));
        const std::size_t hi = num(rest);
        if (lo < 1 || hi < lo || step < 1) throw ConfigError("bad range '" + text + "'");
        for (std::size_t n = lo; n <= hi; n += step) out.push_back(n);
        return out;
    }
    std::string_view s(text);
    while (!s.empty()) {
        const auto comma = s.find(',');
        out.push_back(num(s.substr(0, comma)));
        if (comma == std::string_view::npos) break;
        s.remove_prefix(comma + 1);
    }
    if (out.empty() || out.front() < 1) throw ConfigError("bad plaintext grid '" + text + "'");
    return out;
}

unsigned resolve_jobs(unsigned jobs) { return jobs == 0 ? default_jobs() : jobs; }

saif::ActivityTree load_saif(const std::string& path, bool strict) {
    auto res = saif::parse_saif(assess::read_file(path), {.strict = strict});
    for (const auto& w : res.warnings) std::cerr << path << ": warning: " << w << "\n";
    return std::move(res.tree);
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"RTL power side-channel leakage assessment of AES designs"};
    app.require_subcommand(1);
    app.set_version_flag("--version", assess::kToolVersion);

    // assess
    auto* assess_cmd = app.add_subcommand("assess", "identify vulnerable blocks for a key pair");
    std::string arch_name, saif_dir, config_path, out_dir = ".";
    std::vector<std::string> formats{"json", "csv", "text"};
    std::optional<std::size_t> opt_n, opt_trials, opt_key_ref, opt_key_alt;
    std::optional<std::uint64_t> opt_seed;
    unsigned jobs = 0;
    bool fail_on_vulnerable = false, ladder = false, symmetric = false, no_block_sr = false, strict = false,
         reset_between = false, quiet = false;
    auto* arch_opt = assess_cmd->add_option("--arch", arch_name, "builtin architecture: gf or lut");
    auto* dir_opt = assess_cmd->add_option("--saif-dir", saif_dir, "directory of SAIF files with manifest.json");
    arch_opt->excludes(dir_opt);
    assess_cmd->add_option("--config", config_path, "JSON config file");
    assess_cmd->add_option("--n", opt_n, "plaintexts per key");
    assess_cmd->add_option("--out-dir", out_dir, "where report files are written")->capture_default_str();
    assess_cmd->add_option("--format", formats, "any of json, csv, text")->delimiter(',')->capture_default_str();
    assess_cmd->add_option("--seed", opt_seed, "RNG seed (overrides RTLPSC_SEED and the config file)");
    assess_cmd->add_option("--trials", opt_trials, "Monte-Carlo trials per success-rate estimate");
    assess_cmd->add_option("--key-ref", opt_key_ref, "ladder index of the reference key");
    assess_cmd->add_option("--key-alt", opt_key_alt, "ladder index of the alternative key");
    assess_cmd->add_option("--jobs", jobs, "worker threads (0 = logical cores)");
    assess_cmd->add_flag("--fail-on-vulnerable", fail_on_vulnerable, "exit 2 when the vulnerable set is non-empty");
    assess_cmd->add_flag("--ladder", ladder, "run the key-ladder suitability check");
    assess_cmd->add_flag("--symmetric-kl", symmetric, "average both KL directions");
    assess_cmd->add_flag("--no-block-sr", no_block_sr, "success rate at design level only");
    assess_cmd->add_flag("--strict", strict, "reject SAIF constructs outside the supported subset");
    assess_cmd->add_flag("--reset-between", reset_between, "reset the model before every plaintext");
    assess_cmd->add_flag("-q,--quiet", quiet, "do not print the summary");

    // saif
    auto* saif_cmd = app.add_subcommand("saif", "SAIF utilities");
    saif_cmd->require_subcommand(1);
    auto* parse_cmd = saif_cmd->add_subcommand("parse", "validate a file and list its hierarchy with TC sums");
    std::string saif_a, saif_b;
    bool saif_strict = false;
    parse_cmd->add_option("file", saif_a)->required();
    parse_cmd->add_flag("--strict", saif_strict);
    auto* diff_cmd = saif_cmd->add_subcommand("diff", "per-path TC deltas between two files");
    diff_cmd->add_option("a", saif_a)->required();
    diff_cmd->add_option("b", saif_b)->required();
    diff_cmd->add_flag("--strict", saif_strict);
    auto* export_cmd = saif_cmd->add_subcommand("export", "simulate a key pair and write a SAIF directory");
    std::string export_arch, export_dir;
    std::size_t export_n = 1000, export_ref = 0, export_alt = 16;
    bool export_aggregate = false, export_reset = false;
    export_cmd->add_option("--arch", export_arch)->required();
    export_cmd->add_option("--out", export_dir)->required();
    export_cmd->add_option("--n", export_n)->capture_default_str();
    export_cmd->add_option("--key-ref", export_ref)->capture_default_str();
    export_cmd->add_option("--key-alt", export_alt)->capture_default_str();
    export_cmd->add_flag("--aggregate", export_aggregate, "one file per plaintext instead of per cycle");
    export_cmd->add_flag("--reset-between", export_reset);
    export_cmd->add_option("--jobs", jobs);

    // srcurve
    auto* sr_cmd = app.add_subcommand("srcurve", "success rate vs plaintexts for a target KL");
    double sr_kl = 0.47;
    std::string sr_grid = "1..200";
    std::size_t sr_trials = 10000;
    double sr_threshold = 0.95;
    std::optional<std::uint64_t> sr_seed;
    sr_cmd->add_option("--kl", sr_kl)->capture_default_str();
    sr_cmd->add_option("--n", sr_grid, "range a..b[:step] or list")->capture_default_str();
    sr_cmd->add_option("--trials", sr_trials)->capture_default_str();
    sr_cmd->add_option("--threshold", sr_threshold, "report the first n reaching this SR")->capture_default_str();
    sr_cmd->add_option("--seed", sr_seed);
    sr_cmd->add_option("--jobs", jobs);

    // correlate
    auto* corr_cmd = app.add_subcommand("correlate", "Pearson correlation of two KL vectors (CSV path,cycle,kl)");
    std::string corr_a, corr_b;
    corr_cmd->add_option("a", corr_a)->required();
    corr_cmd->add_option("b", corr_b)->required();

    // stimulus
    auto* stim_cmd = app.add_subcommand("stimulus", "key ladder and plaintext chains");
    stim_cmd->require_subcommand(1);
    auto* dump_cmd = stim_cmd->add_subcommand("dump", "hex lines, one value per line");
    std::string dump_what = "ladder";
    std::size_t dump_key = 0, dump_n = 1000;
    dump_cmd->add_option("--what", dump_what, "ladder or chain")
        ->check(CLI::IsMember({"ladder", "chain"}))
        ->capture_default_str();
    dump_cmd->add_option("--key", dump_key, "ladder index keying the chain")->capture_default_str();
    dump_cmd->add_option("--n", dump_n)->capture_default_str();

    // config
    auto* cfg_cmd = app.add_subcommand("config", "configuration helpers");
    bool cfg_defaults = false;
    cfg_cmd->add_flag("--defaults", cfg_defaults, "print the default configuration")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForVersion& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kExitError;
    }

    try {
        if (*assess_cmd) {
            assess::AssessmentConfig cfg;
            cfg.rng_seed = seed_from_env(cfg.rng_seed);
            if (!config_path.empty()) cfg = report::load_config(config_path, cfg);
            if (opt_n) cfg.n_plaintexts = *opt_n;
            if (opt_seed) cfg.rng_seed = *opt_seed;
            if (opt_trials) cfg.mc_trials = *opt_trials;
            if (opt_key_ref) cfg.key_ref = *opt_key_ref;
            if (opt_key_alt) cfg.key_alt = *opt_key_alt;
            if (ladder) cfg.ladder = true;
            if (symmetric) cfg.symmetric_kl = true;
            if (no_block_sr) cfg.block_sr = false;
            if (reset_between) cfg.carry_state = false;
            for (const auto& f : formats)
                if (f != "json" && f != "csv" && f != "text") throw ConfigError("unknown format '" + f + "'");

            assess::Source src;
            if (!arch_name.empty()) src.arch = rtl::parse_architecture(arch_name);
            if (!saif_dir.empty()) src.saif_dir = saif_dir;
            if (!src.arch && !src.saif_dir) throw ConfigError("assess needs --arch or --saif-dir");
            src.strict = strict;

            const auto r = assess::run_assessment(cfg, src, resolve_jobs(jobs));
            fs::create_directories(out_dir);
            const std::string text = report::to_text(r);
            for (const auto& f : formats) {
                if (f == "json") assess::write_file(fs::path(out_dir) / "report.json", report::to_json_text(r));
                if (f == "csv") assess::write_file(fs::path(out_dir) / "report.csv", report::to_csv(r));
                if (f == "text") assess::write_file(fs::path(out_dir) / "summary.txt", text);
            }
            if (!quiet) std::cout << text;
            return fail_on_vulnerable && !r.vulnerable.empty() ? kExitVulnerable : kExitOk;
        }

        if (*saif_cmd) {
            if (*parse_cmd) {
                std::cout << report::saif_listing(load_saif(saif_a, saif_strict));
                return kExitOk;
            }
            if (*diff_cmd) {
                const auto d = report::saif_diff(load_saif(saif_a, saif_strict), load_saif(saif_b, saif_strict));
                std::cout << "path,delta_tc\n";
                for (const auto& [path, delta] : d.deltas) std::cout << path << "," << delta << "\n";
                for (const auto& p : d.only_a) std::cout << "# only in " << saif_a << ": " << p << "\n";
                for (const auto& p : d.only_b) std::cout << "# only in " << saif_b << ": " << p << "\n";
                return kExitOk;
            }
            if (*export_cmd) {
                if (export_ref >= stimulus::kLadderSize || export_alt >= stimulus::kLadderSize)
                    throw ConfigError("key indices must be 0..16");
                const auto arch = rtl::parse_architecture(export_arch);
                const auto ladder_keys = stimulus::build_key_ladder();
                const std::array<AesKey, 2> keys{ladder_keys[export_ref], ladder_keys[export_alt]};
                const std::array<std::vector<AesBlock>, 2> chains{
                    stimulus::plaintext_chain(keys[0], export_n).plaintexts,
                    stimulus::plaintext_chain(keys[1], export_n).plaintexts};
                const auto m = assess::write_saif_directory(export_dir, arch, keys, chains, !export_reset,
                                                            !export_aggregate, resolve_jobs(jobs));
                std::cout << "wrote " << m.n << " plaintexts x " << (m.per_cycle ? m.cycle_window : 1)
                          << " files per key to " << export_dir << "\n";
                return kExitOk;
            }
        }

        if (*sr_cmd) {
            const auto grid = parse_n_grid(sr_grid);
            const std::uint64_t seed = sr_seed ? *sr_seed : seed_from_env(assess::kDefaultSeed);
            double kl = sr_kl;
            if (!(kl >= 0.0)) throw ConfigError("--kl must be non-negative");
            if (kl == 0.0) {
                kl = 1e-12;
                std::cerr << "# kl 0 evaluated as the limit kl=1e-12; identical models always tie\n";
            }
            const auto curve = metrics::sr_vs_kl_curve(kl, grid, sr_trials, seed, resolve_jobs(jobs));
            std::cout << "n,sr,ci\n";
            for (const auto& p : curve.points)
                std::cout << p.n << "," << report::format_number(p.sr) << "," << report::format_number(p.ci_halfwidth)
                          << "\n";
            const auto cross = curve.first_crossing(sr_threshold);
            std::cerr << "# kl " << report::format_number(sr_kl) << ": first n with sr >= "
                      << report::format_number(sr_threshold) << ": " << (cross ? std::to_string(cross) : "none")
                      << "\n";
            return kExitOk;
        }

        if (*corr_cmd) {
            const auto a = report::parse_kl_csv(assess::read_file(corr_a), corr_a);
            const auto b = report::parse_kl_csv(assess::read_file(corr_b), corr_b);
            const auto al = report::align_kl(a, b);
            const auto c = assess::correlate_levels(al.a, al.b);
            std::cout << "pearson " << report::format_number(c.pearson) << " (" << std::fixed << std::setprecision(2)
                      << c.pearson * 100.0 << "%) over " << al.a.size() << " entries\n";
            std::cout << std::defaultfloat << "entry,kl_a,kl_b,delta\n";
            for (std::size_t i = 0; i < al.a.size(); ++i)
                std::cout << al.labels[i] << "," << report::format_number(al.a[i]) << ","
                          << report::format_number(al.b[i]) << "," << report::format_number(c.deltas[i]) << "\n";
            return kExitOk;
        }

        if (*stim_cmd) {
            const auto ladder_keys = stimulus::build_key_ladder();
            if (dump_what == "ladder") {
                for (const auto& k : ladder_keys.keys) std::cout << k.hex() << "\n";
            } else {
                if (dump_key >= stimulus::kLadderSize) throw ConfigError("--key must be 0..16");
                for (const auto& p : stimulus::plaintext_chain(ladder_keys[dump_key], dump_n).plaintexts)
                    std::cout << p.hex() << "\n";
            }
            return kExitOk;
        }

        if (*cfg_cmd) {
            assess::AssessmentConfig cfg;
            cfg.rng_seed = seed_from_env(cfg.rng_seed);
            std::cout << report::config_to_json(cfg).dump(2) << "\n";
            return kExitOk;
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitError;
    }
    return kExitError;
}
