#pragma once

#include "forge/crease_pattern.hpp"
#include "forge/env.hpp"
#include "forge/error.hpp"
#include "forge/fold.hpp"
#include "forge/metrics.hpp"
#include "forge/raster.hpp"

#include <nlohmann/json.hpp>

#include <array>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <optional>
#include <random>
#include <regex>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace forge {

enum class TaskErrc { InfeasiblePrefix, InsufficientStates, InsufficientPool, CountMismatch, Io };

class TaskError : public CodedError<TaskErrc> {
public:
    TaskError(TaskErrc code, const std::string& what, std::size_t step = 0)
        : CodedError<TaskErrc>(code, what), step_(step) {}
    /// 1-based failing step for InfeasiblePrefix.
    [[nodiscard]] std::size_t step() const noexcept { return step_; }

private:
    std::size_t step_;
};

struct SequenceState {
    FoldFile fold;
    std::string fold_text;
    RasterImage front;
    RasterImage back;
};

struct FoldSequence {
    std::string design_id;
    std::vector<SequenceState> states;
};

/// Parses a script file body: a JSON array of action objects.
inline std::vector<AgentAction> parse_script(std::string_view text) {
    nlohmann::json arr;
    try {
        arr = nlohmann::json::parse(text.begin(), text.end());
    } catch (const nlohmann::json::parse_error& e) {
        throw ActionError(ActionErrc::Malformed, e.what());
    }
    if (!arr.is_array()) throw ActionError(ActionErrc::Malformed, "script must be a JSON array");
    std::vector<AgentAction> out;
    for (const auto& a : arr) out.push_back(parse_action(a.dump()));
    return out;
}

/// Raw message texts of a script, as an agent would send them.
inline std::vector<std::string> script_messages(std::string_view text) {
    const auto arr = nlohmann::json::parse(text.begin(), text.end());
    std::vector<std::string> out;
    for (const auto& a : arr) out.push_back(a.dump());
    return out;
}

/// States of every prefix of the script, starting with `base` itself.
inline FoldSequence build_sequence(std::string design_id, std::span<const AgentAction> script,
                                   const CreasePattern& base = CreasePattern::blank(), const ImageOptions& opt = {}) {
    FoldSequence seq;
    seq.design_id = std::move(design_id);
    const auto push = [&](const CreasePattern& cp, const FoldedState& folded) {
        SequenceState s;
        s.fold = cp.to_fold();
        s.fold_text = serialize_fold(s.fold);
        s.front = rasterize(render_folded(cp, folded, Side::Front, opt.style), opt.width, opt.height, opt.style.margin);
        s.back = rasterize(render_folded(cp, folded, Side::Back, opt.style), opt.width, opt.height, opt.style.margin);
        seq.states.push_back(std::move(s));
    };
    auto verdict = is_foldable(base, opt.budget);
    if (!verdict.valid()) throw TaskError(TaskErrc::InfeasiblePrefix, "base pattern is not foldable", 0);
    CreasePattern cp = base;
    push(cp, *verdict.witness);
    for (std::size_t k = 0; k < script.size(); ++k) {
        auto r = apply_action(cp, script[k], opt.budget);
        if (!r.accepted)
            throw TaskError(TaskErrc::InfeasiblePrefix,
                            "step " + std::to_string(k + 1) + " rejected: " + r.status + (r.reason.empty() ? "" : " (" + r.reason + ")"),
                            k + 1);
        cp = std::move(r.pattern);
        push(cp, *r.folded);
    }
    return seq;
}

enum class Variant { Associative, Causal };

constexpr std::string_view to_string(Variant v) noexcept {
    return v == Variant::Associative ? "associative" : "causal";
}

/// A state of some sequence: index into a sequence list plus state index.
struct StateRef {
    std::size_t sequence = 0;
    std::size_t state = 0;

    friend bool operator==(const StateRef&, const StateRef&) = default;
};

struct MCQInstance {
    Variant variant = Variant::Causal;
    StateRef reference;
    std::array<StateRef, 4> options{};
    char correct_label = 'A';
    std::uint64_t seed = 0;
};

/// Signed number of folds from the reference to an option, or nothing when
/// the option comes from another design.
inline std::optional<long> fold_distance(const StateRef& reference, const StateRef& option) {
    if (reference.sequence != option.sequence) return std::nullopt;
    return static_cast<long>(option.state) - static_cast<long>(reference.state);
}

/// One instance for state t of sequences[seq]. Associative distractors are
/// foreign states (index >= 1, differing from the answer); causal ones are
/// other states of the same sequence.
inline MCQInstance make_instance(std::span<const FoldSequence> sequences, std::size_t seq, std::size_t t, Variant variant,
                                 std::uint64_t seed) {
    const FoldSequence& s = sequences[seq];
    if (t + 1 >= s.states.size()) throw TaskError(TaskErrc::InsufficientStates, "state t+1 does not exist");
    std::vector<StateRef> candidates;
    if (variant == Variant::Causal) {
        for (std::size_t i = 0; i < s.states.size(); ++i)
            if (i != t && i != t + 1) candidates.push_back({seq, i});
        if (candidates.size() < 4)
            throw TaskError(TaskErrc::InsufficientStates, "causal instance needs four states besides t and t+1");
    } else {
        const std::string& answer = s.states[t + 1].fold_text;
        for (std::size_t q = 0; q < sequences.size(); ++q) {
            if (q == seq || sequences[q].design_id == s.design_id) continue;
            for (std::size_t i = 1; i < sequences[q].states.size(); ++i)
                if (sequences[q].states[i].fold_text != answer) candidates.push_back({q, i});
        }
        if (candidates.size() < 3) throw TaskError(TaskErrc::InsufficientPool, "fewer than three foreign states");
    }

    std::mt19937_64 rng(seed);
    for (std::size_t i = 0; i < 3; ++i) std::swap(candidates[i], candidates[i + uniform_index(rng, candidates.size() - i)]);
    std::array<StateRef, 4> opts{StateRef{seq, t + 1}, candidates[0], candidates[1], candidates[2]};
    for (std::size_t i = 3; i > 0; --i) std::swap(opts[i], opts[uniform_index(rng, i + 1)]);

    MCQInstance inst;
    inst.variant = variant;
    inst.reference = {seq, t};
    inst.options = opts;
    inst.seed = seed;
    for (std::size_t i = 0; i < 4; ++i)
        if (opts[i] == StateRef{seq, t + 1}) inst.correct_label = static_cast<char>('A' + i);
    return inst;
}

/// Draws `count` instances, picking sequence, step and variant at random
/// and skipping draws that cannot form an instance.
inline std::vector<MCQInstance> generate_instances(std::span<const FoldSequence> sequences, std::size_t count,
                                                   std::uint64_t seed, bool associative = true, bool causal = true) {
    std::vector<MCQInstance> out;
    if (sequences.empty() || (!associative && !causal)) return out;
    std::mt19937_64 rng(seed);
    std::size_t misses = 0;
    while (out.size() < count) {
        const std::size_t q = uniform_index(rng, sequences.size());
        const std::size_t n = sequences[q].states.size();
        const Variant v = !causal ? Variant::Associative
                          : !associative ? Variant::Causal
                          : (uniform_index(rng, 2) == 0 ? Variant::Associative : Variant::Causal);
        const std::uint64_t inst_seed = rng();
        if (n < 2) {
            if (++misses > 100 * (count + 1)) throw TaskError(TaskErrc::InsufficientStates, "no usable sequence");
            continue;
        }
        const std::size_t t = uniform_index(rng, n - 1);
        try {
            out.push_back(make_instance(sequences, q, t, v, inst_seed));
        } catch (const TaskError&) {
            if (++misses > 100 * (count + 1)) throw TaskError(TaskErrc::InsufficientStates, "no usable sequence");
        }
    }
    return out;
}

enum class ChoiceErrc { NoMatch, InvalidOption, MultipleMatches };
using ChoiceError = CodedError<ChoiceErrc>;

/// Accepts only a reply that is exactly \boxed{X} (surrounding whitespace
/// allowed) with X in A-D.
inline char parse_choice(std::string_view raw) {
    static const std::regex boxed(R"(\\boxed\{([^}]*)\})");
    const std::string text(raw);
    auto begin = std::sregex_iterator(text.begin(), text.end(), boxed);
    const auto matches = std::distance(begin, std::sregex_iterator());
    if (matches == 0) throw ChoiceError(ChoiceErrc::NoMatch, "no boxed answer");
    if (matches > 1) throw ChoiceError(ChoiceErrc::MultipleMatches, "more than one boxed answer");
    const auto first = text.find_first_not_of(" \t\r\n");
    const auto last = text.find_last_not_of(" \t\r\n");
    const std::smatch m = *begin;
    if (static_cast<std::size_t>(m.position(0)) != first || static_cast<std::size_t>(m.position(0) + m.length(0)) != last + 1)
        throw ChoiceError(ChoiceErrc::NoMatch, "extra text around the boxed answer");
    const std::string x = m[1].str();
    if (x.size() != 1 || x[0] < 'A' || x[0] > 'D') throw ChoiceError(ChoiceErrc::InvalidOption, "option must be A-D");
    return x[0];
}

/// Fraction of correct answers; a missing answer counts as wrong.
inline double score_accuracy(std::span<const MCQInstance> instances, std::span<const std::optional<char>> answers) {
    if (instances.size() != answers.size())
        throw TaskError(TaskErrc::CountMismatch, "answer count differs from instance count");
    if (instances.empty()) return 0.0;
    std::size_t correct = 0;
    for (std::size_t i = 0; i < instances.size(); ++i)
        if (answers[i] && *answers[i] == instances[i].correct_label) ++correct;
    return static_cast<double>(correct) / static_cast<double>(instances.size());
}

inline nlohmann::json manifest(const MCQInstance& inst, std::span<const FoldSequence> sequences, std::size_t index) {
    const auto ref = [&](const StateRef& r) {
        return nlohmann::json{{"design", sequences[r.sequence].design_id}, {"state", r.state}};
    };
    nlohmann::json options = nlohmann::json::object();
    for (std::size_t i = 0; i < 4; ++i) {
        auto o = ref(inst.options[i]);
        o["image"] = std::string(1, static_cast<char>('A' + i)) + ".png";
        options[std::string(1, static_cast<char>('A' + i))] = std::move(o);
    }
    auto reference = ref(inst.reference);
    reference["image"] = "reference.png";
    return {{"index", index},
            {"variant", to_string(inst.variant)},
            {"seed", inst.seed},
            {"correct_label", std::string(1, inst.correct_label)},
            {"reference", std::move(reference)},
            {"options", std::move(options)}};
}

/// Writes one directory per instance (reference.png, A-D.png with front on
/// the left and back on the right, manifest.json) and an index.json.
inline void write_bundle(const std::filesystem::path& dir, std::span<const MCQInstance> instances,
                         std::span<const FoldSequence> sequences, std::uint64_t seed) {
    namespace fs = std::filesystem;
    const auto write_file = [](const fs::path& p, std::span<const std::uint8_t> bytes) {
        std::ofstream f(p, std::ios::binary);
        f.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
        if (!f) throw TaskError(TaskErrc::Io, "cannot write " + p.string());
    };
    const auto pair_png = [&](const StateRef& r) {
        const auto& s = sequences[r.sequence].states[r.state];
        return encode_png(hconcat(s.front, s.back));
    };
    fs::create_directories(dir);
    nlohmann::json index{{"seed", seed}, {"count", instances.size()}, {"instances", nlohmann::json::array()}};
    for (std::size_t i = 0; i < instances.size(); ++i) {
        char name[32];
        std::snprintf(name, sizeof name, "instance-%05zu", i);
        const fs::path sub = dir / name;
        fs::create_directories(sub);
        write_file(sub / "reference.png", pair_png(instances[i].reference));
        for (std::size_t k = 0; k < 4; ++k)
            write_file(sub / (std::string(1, static_cast<char>('A' + k)) + ".png"), pair_png(instances[i].options[k]));
        const std::string m = manifest(instances[i], sequences, i).dump(2) + "\n";
        write_file(sub / "manifest.json", std::span(reinterpret_cast<const std::uint8_t*>(m.data()), m.size()));
        index["instances"].push_back({{"dir", name}, {"variant", to_string(instances[i].variant)}});
    }
    const std::string text = index.dump(2) + "\n";
    write_file(dir / "index.json", std::span(reinterpret_cast<const std::uint8_t*>(text.data()), text.size()));
}

} // namespace forge
