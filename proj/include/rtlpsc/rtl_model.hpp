#pragma once

// Cycle-accurate, zero-delay models of two AES-128 encryption architectures.
//
// Every cycle each modeled signal takes one value; its toggle count for the
// cycle is the Hamming distance to the previous cycle's value. Within cycle c
// the registers hold what was captured at clock edge c and the combinational
// nets are functions of those registers (they compute what edge c+1 captures).
//
// Window layout, shared by both architectures (0-based):
//   cycle 0      load: state <- plaintext ^ round key 0
//   cycles 1..10 state holds the result of rounds 1..10
//
// Models are not reset between encryptions unless the caller asks for it, so
// the first cycle of encryption j sees the last values of encryption j-1.

#include <memory>
#include <string>
#include <string_view>
#include <vector>

#include "rtlpsc/aes.hpp"
#include "rtlpsc/composite_sbox.hpp"
#include "rtlpsc/error.hpp"
#include "rtlpsc/saif.hpp"

namespace rtlpsc::rtl {

enum class Architecture { GF, LUT };

inline std::string_view to_string(Architecture a) { return a == Architecture::GF ? "gf" : "lut"; }

inline Architecture parse_architecture(std::string_view s) {
    if (s == "gf" || s == "GF") return Architecture::GF;
    if (s == "lut" || s == "LUT") return Architecture::LUT;
    throw Error("unknown architecture '" + std::string(s) + "' (expected gf or lut)");
}

inline constexpr std::size_t kWindow = 11;

struct BlockInfo {
    std::string name;
    std::string path;
    int parent = -1;
};

struct SignalInfo {
    std::string name;
    std::size_t block = 0;
    unsigned width = 0;
};

// Toggle counts of one encryption over the cycle window.
class CycleTrace {
public:
    CycleTrace() = default;
    CycleTrace(std::size_t cycles, std::size_t signals, std::size_t blocks)
        : cycles_(cycles),
          signals_(signals),
          blocks_(blocks),
          toggles_(cycles * signals, 0),
          ones_(cycles * signals, 0),
          block_counts_(blocks * cycles, 0) {}

    std::size_t cycles() const noexcept { return cycles_; }
    std::size_t signal_count() const noexcept { return signals_; }
    std::size_t block_count() const noexcept { return blocks_; }

    unsigned toggles(std::size_t cycle, std::size_t signal) const { return toggles_[cycle * signals_ + signal]; }
    unsigned ones(std::size_t cycle, std::size_t signal) const { return ones_[cycle * signals_ + signal]; }

    // Inclusive of all descendant blocks.
    std::uint32_t count(std::size_t block, std::size_t cycle) const { return block_counts_[block * cycles_ + cycle]; }

    std::uint64_t window_total(std::size_t block) const {
        std::uint64_t s = 0;
        for (std::size_t c = 0; c < cycles_; ++c) s += count(block, c);
        return s;
    }

    AesBlock ciphertext;

    friend bool operator==(const CycleTrace&, const CycleTrace&) = default;

private:
    friend class DesignModel;

    std::size_t cycles_ = 0;
    std::size_t signals_ = 0;
    std::size_t blocks_ = 0;
    std::vector<std::uint16_t> toggles_;
    std::vector<std::uint8_t> ones_;
    std::vector<std::uint32_t> block_counts_;
};

class DesignModel {
public:
    virtual ~DesignModel() = default;

    Architecture architecture() const noexcept { return arch_; }
    const std::string& design_id() const { return blocks_.front().name; }
    const std::vector<BlockInfo>& blocks() const noexcept { return blocks_; }
    const std::vector<SignalInfo>& signals() const noexcept { return signals_; }

    std::size_t block_index(std::string_view path) const {
        for (std::size_t i = 0; i < blocks_.size(); ++i)
            if (blocks_[i].path == path) return i;
        throw PathNotFound(std::string(path));
    }

    // Total signal bit-width of a block including descendants.
    unsigned block_width(std::size_t block) const {
        unsigned w = 0;
        for (const auto& s : signals_)
            if (is_within(s.block, block)) w += s.width;
        return w;
    }

    bool is_within(std::size_t block, std::size_t ancestor) const {
        for (int b = static_cast<int>(block); b >= 0; b = blocks_[static_cast<std::size_t>(b)].parent)
            if (static_cast<std::size_t>(b) == ancestor) return true;
        return false;
    }

    // All signals and registers to zero. The key must be loaded again afterwards.
    void reset() {
        std::fill(values_.begin(), values_.end(), Bits128{});
        clear_registers();
    }

    virtual void load_key(const AesKey& key) = 0;

    CycleTrace encrypt(const AesBlock& pt) {
        CycleTrace trace(kWindow, signals_.size(), blocks_.size());
        std::vector<Bits128> next;
        for (std::size_t c = 0; c < kWindow; ++c) {
            next = values_;
            evaluate_cycle(static_cast<unsigned>(c), pt, next);
            for (std::size_t s = 0; s < signals_.size(); ++s) {
                trace.toggles_[c * signals_.size() + s] = static_cast<std::uint16_t>(transition_count(values_[s], next[s]));
                trace.ones_[c * signals_.size() + s] = static_cast<std::uint8_t>(next[s].popcount());
            }
            values_.swap(next);
        }
        for (std::size_t s = 0; s < signals_.size(); ++s)
            for (std::size_t c = 0; c < kWindow; ++c)
                trace.block_counts_[signals_[s].block * kWindow + c] += trace.toggles_[c * signals_.size() + s];
        // Parents follow children in reverse creation order.
        for (std::size_t b = blocks_.size(); b-- > 1;) {
            const auto parent = static_cast<std::size_t>(blocks_[b].parent);
            for (std::size_t c = 0; c < kWindow; ++c)
                trace.block_counts_[parent * kWindow + c] += trace.block_counts_[b * kWindow + c];
        }
        trace.ciphertext = current_ciphertext();
        return trace;
    }

protected:
    explicit DesignModel(Architecture arch) : arch_(arch) {}

    std::size_t add_block(const std::string& name, int parent) {
        BlockInfo b;
        b.name = name;
        b.parent = parent;
        b.path = parent < 0 ? name : blocks_[static_cast<std::size_t>(parent)].path + "." + name;
        blocks_.push_back(std::move(b));
        return blocks_.size() - 1;
    }

    std::size_t add_signal(const std::string& name, std::size_t block, unsigned width) {
        signals_.push_back({name, block, width});
        values_.emplace_back();
        return signals_.size() - 1;
    }

    // Writes the values of cycle `cycle` into `values` (pre-filled with the
    // previous cycle's values) and advances the register state.
    virtual void evaluate_cycle(unsigned cycle, const AesBlock& pt, std::vector<Bits128>& values) = 0;
    virtual AesBlock current_ciphertext() const = 0;
    virtual void clear_registers() = 0;

    // Signals written outside the window (LUT key expansion).
    std::vector<Bits128>& raw_values() { return values_; }

private:
    Architecture arch_;
    std::vector<BlockInfo> blocks_;
    std::vector<SignalInfo> signals_;
    std::vector<Bits128> values_;
};

namespace detail {

inline AesBlock round_output(const AesBlock& state, unsigned round, const AesKey& rk) {
    const AesBlock sr = aes::shift_rows(aes::sub_bytes(state));
    return aes::add_round_key(round == 10 ? sr : aes::mix_columns(sr), rk);
}

inline Bits128 column_bits(const AesBlock& s, unsigned col) {
    return Bits128::from_bytes(std::array<Byte, 4>{s[4 * col], s[4 * col + 1], s[4 * col + 2], s[4 * col + 3]});
}

struct MixColumnSignals {
    std::size_t in, xt, out;
};

inline void write_mix_column(const MixColumnSignals& ids, const AesBlock& sr, unsigned col, std::vector<Bits128>& v) {
    const aes::Word a{sr[4 * col], sr[4 * col + 1], sr[4 * col + 2], sr[4 * col + 3]};
    const aes::Word x{aes::xtime(a[0]), aes::xtime(a[1]), aes::xtime(a[2]), aes::xtime(a[3])};
    v[ids.in] = Bits128::from_bytes(a);
    v[ids.xt] = Bits128::from_bytes(x);
    v[ids.out] = Bits128::from_bytes(aes::mix_column(a));
}

}  // namespace detail

// Composite-field S-boxes, round keys computed alongside the rounds.
//
//   AES_GF_ENC
//     SubByte0..3   one state column each, Sbox0..3 (row) -> GFinvComp
//     SubByte4      key-schedule S-boxes on RotWord(w3)
//     MixColumn0..3
class GfModel final : public DesignModel {
public:
    GfModel() : DesignModel(Architecture::GF) {
        const auto root = add_block("AES_GF_ENC", -1);
        data_in_ = add_signal("data_in", root, 128);
        state_reg_ = add_signal("state_reg", root, 128);
        key_reg_ = add_signal("key_reg", root, 128);
        rcon_ = add_signal("rcon", root, 8);
        round_ctr_ = add_signal("round_ctr", root, 4);
        for (unsigned sb = 0; sb < 5; ++sb) {
            const auto sub = add_block("SubByte" + std::to_string(sb), static_cast<int>(root));
            for (unsigned j = 0; j < 4; ++j) {
                const auto box = add_block("Sbox" + std::to_string(j), static_cast<int>(sub));
                const auto inv = add_block("GFinvComp", static_cast<int>(box));
                SboxSignals s{};
                s.in = add_signal("sbox_in", box, 8);
                s.iso = add_signal("iso_out", box, 8);
                s.sq_scaled = add_signal("sq_scaled", inv, 4);
                s.hl_sum = add_signal("hl_sum", inv, 4);
                s.l_prod = add_signal("l_prod", inv, 4);
                s.delta = add_signal("delta", inv, 4);
                s.delta_inv = add_signal("delta_inv", inv, 4);
                s.inv_hi = add_signal("inv_hi", inv, 4);
                s.inv_lo = add_signal("inv_lo", inv, 4);
                s.inv_iso = add_signal("inv_iso_out", box, 8);
                s.out = add_signal("sbox_out", box, 8);
                sboxes_[sb * 4 + j] = s;
            }
        }
        for (unsigned c = 0; c < 4; ++c) {
            const auto mc = add_block("MixColumn" + std::to_string(c), static_cast<int>(root));
            mix_[c] = {add_signal("mc_in", mc, 32), add_signal("mc_xtime", mc, 32), add_signal("mc_out", mc, 32)};
        }
    }

    void load_key(const AesKey& key) override {
        key_ = key;
        round_keys_ = aes::expand_key(key);
    }

private:
    struct SboxSignals {
        std::size_t in, iso, sq_scaled, hl_sum, l_prod, delta, delta_inv, inv_hi, inv_lo, inv_iso, out;
    };

    void write_sbox(const SboxSignals& ids, Byte x, std::vector<Bits128>& v) const {
        const auto st = gf::sbox_stages(x);
        v[ids.in] = Bits128::from_u64(st.in);
        v[ids.iso] = Bits128::from_u64(st.mapped);
        v[ids.sq_scaled] = Bits128::from_u64(st.inv.sq_scaled);
        v[ids.hl_sum] = Bits128::from_u64(st.inv.hl_sum);
        v[ids.l_prod] = Bits128::from_u64(st.inv.l_prod);
        v[ids.delta] = Bits128::from_u64(st.inv.delta);
        v[ids.delta_inv] = Bits128::from_u64(st.inv.delta_inv);
        v[ids.inv_hi] = Bits128::from_u64(st.inv.out_h);
        v[ids.inv_lo] = Bits128::from_u64(st.inv.out_l);
        v[ids.inv_iso] = Bits128::from_u64(st.unmapped);
        v[ids.out] = Bits128::from_u64(st.out);
    }

    void evaluate_cycle(unsigned cycle, const AesBlock& pt, std::vector<Bits128>& v) override {
        if (cycle == 0) {
            state_ = aes::add_round_key(pt, key_);
            key_reg_value_ = key_;
        } else {
            state_ = detail::round_output(state_, cycle, round_keys_[cycle]);
            key_reg_value_ = aes::next_round_key(key_reg_value_, cycle);
        }
        v[data_in_] = pt.bits();
        v[state_reg_] = state_.bits();
        v[key_reg_] = key_reg_value_.bits();
        v[rcon_] = Bits128::from_u64(cycle < 10 ? aes::rcon[cycle + 1] : 0);
        v[round_ctr_] = Bits128::from_u64(cycle);

        for (unsigned col = 0; col < 4; ++col)
            for (unsigned row = 0; row < 4; ++row) write_sbox(sboxes_[col * 4 + row], state_[4 * col + row], v);
        const aes::Word rot = aes::rot_word(aes::key_word(key_reg_value_, 3));
        for (unsigned j = 0; j < 4; ++j) write_sbox(sboxes_[16 + j], rot[j], v);

        const AesBlock sr = aes::shift_rows(aes::sub_bytes(state_));
        for (unsigned c = 0; c < 4; ++c) detail::write_mix_column(mix_[c], sr, c, v);
    }

    AesBlock current_ciphertext() const override { return state_; }

    void clear_registers() override {
        state_ = {};
        key_reg_value_ = {};
    }

    std::size_t data_in_, state_reg_, key_reg_, rcon_, round_ctr_;
    std::array<SboxSignals, 20> sboxes_{};
    std::array<detail::MixColumnSignals, 4> mix_{};
    AesKey key_{};
    aes::RoundKeys round_keys_{};
    AesBlock state_{};
    AesKey key_reg_value_{};
};

// Table S-boxes, round keys expanded once per key into key registers.
//
//   AES_LUT_ENC
//     SubWord       key expansion only, idle inside the window
//     SubByte       all 16 state bytes
//     MixColumn0..3
class LutModel final : public DesignModel {
public:
    LutModel() : DesignModel(Architecture::LUT) {
        const auto root = add_block("AES_LUT_ENC", -1);
        data_in_ = add_signal("data_in", root, 128);
        state_reg_ = add_signal("state_reg", root, 128);
        rk_bus_ = add_signal("rk_bus", root, 128);
        round_ctr_ = add_signal("round_ctr", root, 4);
        const auto sw = add_block("SubWord", static_cast<int>(root));
        sw_in_ = add_signal("sw_in", sw, 32);
        sw_out_ = add_signal("sw_out", sw, 32);
        const auto sb = add_block("SubByte", static_cast<int>(root));
        sb_in_ = add_signal("sb_in", sb, 128);
        sb_out_ = add_signal("sb_out", sb, 128);
        for (unsigned c = 0; c < 4; ++c) {
            const auto mc = add_block("MixColumn" + std::to_string(c), static_cast<int>(root));
            mix_[c] = {add_signal("mc_in", mc, 32), add_signal("mc_xtime", mc, 32), add_signal("mc_out", mc, 32)};
        }
    }

    // Runs the key expansion. Its cycles precede the encryption window and are
    // not part of any trace.
    void load_key(const AesKey& key) override {
        round_keys_ = aes::expand_key(key);
        auto& v = raw_values();
        for (unsigned r = 1; r <= 10; ++r) {
            const aes::Word rot = aes::rot_word(aes::key_word(round_keys_[r - 1], 3));
            v[sw_in_] = Bits128::from_bytes(rot);
            v[sw_out_] = Bits128::from_bytes(aes::sub_word(rot));
        }
        v[rk_bus_] = round_keys_[0].bits();
    }

private:
    void evaluate_cycle(unsigned cycle, const AesBlock& pt, std::vector<Bits128>& v) override {
        state_ = cycle == 0 ? aes::add_round_key(pt, round_keys_[0])
                            : detail::round_output(state_, cycle, round_keys_[cycle]);
        v[data_in_] = pt.bits();
        v[state_reg_] = state_.bits();
        v[rk_bus_] = round_keys_[(cycle + 1) % 11].bits();
        v[round_ctr_] = Bits128::from_u64(cycle);

        const AesBlock sb = aes::sub_bytes(state_);
        v[sb_in_] = state_.bits();
        v[sb_out_] = sb.bits();
        const AesBlock sr = aes::shift_rows(sb);
        for (unsigned c = 0; c < 4; ++c) detail::write_mix_column(mix_[c], sr, c, v);
    }

    AesBlock current_ciphertext() const override { return state_; }

    void clear_registers() override { state_ = {}; }

    std::size_t data_in_, state_reg_, rk_bus_, round_ctr_, sw_in_, sw_out_, sb_in_, sb_out_;
    std::array<detail::MixColumnSignals, 4> mix_{};
    aes::RoundKeys round_keys_{};
    AesBlock state_{};
};

inline std::unique_ptr<DesignModel> make_model(Architecture arch) {
    if (arch == Architecture::GF) return std::make_unique<GfModel>();
    return std::make_unique<LutModel>();
}

// One encryption from the all-zero reset state.
inline CycleTrace simulate(DesignModel& model, const AesKey& key, const AesBlock& pt) {
    model.reset();
    model.load_key(key);
    return model.encrypt(pt);
}

inline constexpr std::uint64_t kCyclePeriod = 10;  // simulator time units per clock cycle

namespace detail {

inline saif::ActivityTree make_tree(const DesignModel& model, std::size_t first, std::size_t last,
                                    const CycleTrace& trace) {
    const auto& blocks = model.blocks();
    const auto& sigs = model.signals();
    std::vector<saif::InstanceNode> nodes(blocks.size());
    for (std::size_t b = 0; b < blocks.size(); ++b) nodes[b].name = blocks[b].name;
    for (std::size_t s = 0; s < sigs.size(); ++s) {
        saif::NetActivity net;
        net.name = sigs[s].name;
        std::uint64_t ones = 0;
        for (std::size_t c = first; c < last; ++c) {
            net.tc += trace.toggles(c, s);
            ones += trace.ones(c, s);
        }
        // Bus nets: durations are summed over bits.
        net.t1 = ones * kCyclePeriod;
        net.t0 = std::uint64_t{sigs[s].width} * (last - first) * kCyclePeriod - net.t1;
        nodes[sigs[s].block].nets.push_back(std::move(net));
    }
    for (std::size_t b = blocks.size(); b-- > 1;) {
        auto& parent = nodes[static_cast<std::size_t>(blocks[b].parent)];
        parent.children.insert(parent.children.begin(), std::move(nodes[b]));
    }
    saif::ActivityTree tree;
    tree.headers = {
        {"SAIFVERSION", {{"2.0", true}}},
        {"DIRECTION", {{"backward", true}}},
        {"DESIGN", {{model.design_id(), true}}},
        {"VENDOR", {{"rtlpsc", true}}},
        {"DIVIDER", {{".", false}}},
        {"TIMESCALE", {{"1", false}, {"ns", false}}},
        {"DURATION", {{std::to_string((last - first) * kCyclePeriod), false}}},
    };
    tree.root = std::move(nodes[0]);
    return tree;
}

}  // namespace detail

// Whole-window activity of one encryption.
inline saif::ActivityTree export_trace_saif(const CycleTrace& trace, const DesignModel& model) {
    return detail::make_tree(model, 0, trace.cycles(), trace);
}

// Activity of a single cycle of one encryption.
inline saif::ActivityTree export_cycle_saif(const CycleTrace& trace, const DesignModel& model, std::size_t cycle) {
    return detail::make_tree(model, cycle, cycle + 1, trace);
}

}  // namespace rtlpsc::rtl
