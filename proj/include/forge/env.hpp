#pragma once

#include "forge/crease_pattern.hpp"
#include "forge/error.hpp"
#include "forge/flat_fold.hpp"
#include "forge/fold.hpp"
#include "forge/metrics.hpp"
#include "forge/raster.hpp"
#include "forge/render.hpp"
#include "forge/scorer.hpp"

#include <nlohmann/json.hpp>

#include <chrono>
#include <cmath>
#include <cstdint>
#include <optional>
#include <random>
#include <set>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace forge {

// ---------------------------------------------------------------------------
// Actions

enum class ActionErrc { Malformed, UnknownAction, SchemaViolation, OutOfBounds };
using ActionError = CodedError<ActionErrc>;

constexpr std::string_view to_string(ActionErrc c) noexcept {
    switch (c) {
    case ActionErrc::Malformed: return "Malformed";
    case ActionErrc::UnknownAction: return "UnknownAction";
    case ActionErrc::SchemaViolation: return "SchemaViolation";
    case ActionErrc::OutOfBounds: return "OutOfBounds";
    }
    return "?";
}

struct CreaseSpec {
    Vec2 p1;
    Vec2 p2;
    Assignment assignment = Assignment::Valley;
    /// Set when the crease was given by vertex indices; p1/p2 are then
    /// resolved against the pattern at execution time.
    std::optional<VertexPair> edge_vertices;

    friend bool operator==(const CreaseSpec&, const CreaseSpec&) = default;
};

struct AgentAction {
    enum class Kind { AddCrease, AddCreases };
    Kind kind = Kind::AddCrease;
    std::vector<CreaseSpec> creases;

    friend bool operator==(const AgentAction&, const AgentAction&) = default;
};

namespace detail {

inline void only_keys(const nlohmann::json& obj, std::initializer_list<std::string_view> allowed) {
    for (const auto& [key, value] : obj.items()) {
        if (std::find(allowed.begin(), allowed.end(), key) == allowed.end())
            throw ActionError(ActionErrc::SchemaViolation, "unexpected field \"" + key + "\"");
    }
}

inline Vec2 action_point(const nlohmann::json& obj, const char* key, double size) {
    const auto it = obj.find(key);
    if (it == obj.end()) throw ActionError(ActionErrc::SchemaViolation, std::string("missing ") + key);
    if (!it->is_array() || it->size() != 2 || !(*it)[0].is_number() || !(*it)[1].is_number())
        throw ActionError(ActionErrc::SchemaViolation, std::string(key) + " must be [x, y]");
    const Vec2 p{(*it)[0].get<double>(), (*it)[1].get<double>()};
    if (!(p.x >= 0.0 && p.x <= size && p.y >= 0.0 && p.y <= size))
        throw ActionError(ActionErrc::OutOfBounds, std::string(key) + " lies outside the sheet");
    return p;
}

inline Assignment action_assignment(const nlohmann::json& obj) {
    const auto it = obj.find("assignment");
    if (it == obj.end()) throw ActionError(ActionErrc::SchemaViolation, "missing assignment");
    if (it->is_string()) {
        if (*it == "M") return Assignment::Mountain;
        if (*it == "V") return Assignment::Valley;
    }
    throw ActionError(ActionErrc::SchemaViolation, "assignment must be \"M\" or \"V\"");
}

} // namespace detail

/// Strict parse of one agent message: exactly one JSON object (surrounding
/// whitespace allowed) matching the add_crease or add_creases schema.
inline AgentAction parse_action(std::string_view raw, double size = CreasePattern::default_size) {
    nlohmann::json obj;
    try {
        obj = nlohmann::json::parse(raw.begin(), raw.end());
    } catch (const nlohmann::json::parse_error& e) {
        throw ActionError(ActionErrc::Malformed, e.what());
    }
    if (!obj.is_object()) throw ActionError(ActionErrc::Malformed, "expected a JSON object");
    const auto kind = obj.find("action");
    if (kind == obj.end() || !kind->is_string()) throw ActionError(ActionErrc::SchemaViolation, "missing action");

    AgentAction action;
    if (*kind == "add_crease") {
        action.kind = AgentAction::Kind::AddCrease;
        CreaseSpec spec;
        if (obj.contains("edge_vertices")) {
            detail::only_keys(obj, {"action", "edge_vertices", "assignment"});
            const auto& ev = obj["edge_vertices"];
            if (!ev.is_array() || ev.size() != 2 || !ev[0].is_number_unsigned() || !ev[1].is_number_unsigned())
                throw ActionError(ActionErrc::SchemaViolation, "edge_vertices must be two vertex indices");
            spec.edge_vertices = VertexPair{ev[0].get<std::size_t>(), ev[1].get<std::size_t>()};
        } else {
            detail::only_keys(obj, {"action", "p1", "p2", "assignment"});
            spec.p1 = detail::action_point(obj, "p1", size);
            spec.p2 = detail::action_point(obj, "p2", size);
        }
        spec.assignment = detail::action_assignment(obj);
        action.creases.push_back(spec);
    } else if (*kind == "add_creases") {
        action.kind = AgentAction::Kind::AddCreases;
        detail::only_keys(obj, {"action", "creases"});
        const auto it = obj.find("creases");
        if (it == obj.end() || !it->is_array() || it->empty())
            throw ActionError(ActionErrc::SchemaViolation, "creases must be a non-empty array");
        for (const auto& c : *it) {
            if (!c.is_object()) throw ActionError(ActionErrc::SchemaViolation, "each crease must be an object");
            detail::only_keys(c, {"p1", "p2", "assignment"});
            action.creases.push_back({detail::action_point(c, "p1", size), detail::action_point(c, "p2", size),
                                      detail::action_assignment(c), std::nullopt});
        }
    } else {
        throw ActionError(ActionErrc::UnknownAction, "unknown action " + kind->dump());
    }
    return action;
}

inline nlohmann::json to_json(const AgentAction& a) {
    const auto crease = [](const CreaseSpec& c) {
        nlohmann::json j;
        if (c.edge_vertices) {
            j["edge_vertices"] = {(*c.edge_vertices)[0], (*c.edge_vertices)[1]};
        } else {
            j["p1"] = {c.p1.x, c.p1.y};
            j["p2"] = {c.p2.x, c.p2.y};
        }
        j["assignment"] = std::string(1, to_char(c.assignment));
        return j;
    };
    nlohmann::json j;
    if (a.kind == AgentAction::Kind::AddCrease && a.creases.size() == 1) {
        j = crease(a.creases.front());
        j["action"] = "add_crease";
    } else {
        j["action"] = "add_creases";
        j["creases"] = nlohmann::json::array();
        for (const auto& c : a.creases) j["creases"].push_back(crease(c));
    }
    return j;
}

// ---------------------------------------------------------------------------
// Executing actions

struct ApplyResult {
    bool accepted = false;
    /// "Valid", a parse/insert error name, or a FoldStatus name.
    std::string status;
    std::string reason;
    std::optional<FoldStatus> fold_status;
    CreasePattern pattern;
    std::optional<FoldedState> folded;
};

/// Inserts every crease of the action into a copy of `cp` and validates the
/// result once. Nothing is committed unless the whole action folds flat.
inline ApplyResult apply_action(const CreasePattern& cp, const AgentAction& action, const SearchBudget& budget) {
    ApplyResult out;
    CreasePattern tentative = cp;
    for (std::size_t i = 0; i < action.creases.size(); ++i) {
        CreaseSpec c = action.creases[i];
        if (c.edge_vertices) {
            const auto [u, v] = *c.edge_vertices;
            if (u >= tentative.vertices().size() || v >= tentative.vertices().size()) {
                out.status = "UnknownVertex";
                out.reason = "crease " + std::to_string(i + 1) + " names a missing vertex";
                out.pattern = cp;
                return out;
            }
            c.p1 = tentative.vertices()[u];
            c.p2 = tentative.vertices()[v];
        }
        try {
            tentative.insert_crease({c.p1, c.p2}, c.assignment);
        } catch (const CpError& e) {
            out.status = std::string(to_string(e.code()));
            out.reason = "crease " + std::to_string(i + 1) + ": " + e.what();
            out.pattern = cp;
            return out;
        }
    }
    auto verdict = is_foldable(tentative, budget);
    out.fold_status = verdict.status;
    out.status = std::string(to_string(verdict.status));
    if (!verdict.valid()) {
        for (const auto& v : verdict.violations) {
            if (!out.reason.empty()) out.reason += "; ";
            out.reason += v.rule;
            if (v.subject == Violation::Subject::Vertex) out.reason += " at vertex " + std::to_string(v.first);
        }
        out.pattern = cp;
        return out;
    }
    out.accepted = true;
    out.pattern = std::move(tentative);
    out.folded = std::move(verdict.witness);
    return out;
}

// ---------------------------------------------------------------------------
// Sessions

enum class SessionErrc { SessionClosed, BudgetExhausted, TargetNotRenderable };
using SessionError = CodedError<SessionErrc>;

constexpr std::string_view to_string(SessionErrc c) noexcept {
    switch (c) {
    case SessionErrc::SessionClosed: return "SessionClosed";
    case SessionErrc::BudgetExhausted: return "BudgetExhausted";
    case SessionErrc::TargetNotRenderable: return "TargetNotRenderable";
    }
    return "?";
}

struct SessionConfig {
    std::size_t max_steps = 25;
    ImageOptions images{};
    std::string prompt_template_id = "full-step";
};

/// Images always come in the order target, current, crease pattern.
struct Observation {
    RasterImage target_img;
    RasterImage current_img;
    RasterImage cp_img;
    bool foldability_feedback = true;
    std::string prompt_template_id;
    std::size_t steps_attempted = 0;
    std::size_t max_steps = 0;
};

struct StepVerdict {
    bool accepted = false;
    std::string status;
    std::string reason;
};

struct Attempt {
    std::string raw;
    std::optional<AgentAction> action;
    StepVerdict verdict;
    bool reshaped = false;
    std::int64_t timestamp_ms = 0;
};

struct EpisodeRecord {
    std::string episode_id;
    std::string target;
    std::size_t max_steps = 0;
    std::vector<Attempt> attempts;
    std::string final_fold;
    std::optional<std::string> transport_error;
    std::optional<EpisodeScore> score;

    [[nodiscard]] std::size_t steps_valid() const noexcept {
        return static_cast<std::size_t>(
            std::count_if(attempts.begin(), attempts.end(), [](const Attempt& a) { return a.verdict.accepted; }));
    }
};

inline double query_efficiency(const EpisodeRecord& r) noexcept {
    return query_efficiency(r.steps_valid(), r.attempts.size());
}

/// One closed-loop episode: blank sheet, fixed target, bounded attempts.
/// Not thread-safe; callers serialise access.
class Session {
public:
    Session(std::string episode_id, std::string target_name, const FoldFile& target, SessionConfig cfg = {})
        : cfg_(std::move(cfg)), target_(target), pattern_(CreasePattern::blank()) {
        record_.episode_id = std::move(episode_id);
        record_.target = std::move(target_name);
        record_.max_steps = cfg_.max_steps;
        try {
            target_img_ = folded_image(CreasePattern::from_fold(target_), Side::Front, cfg_.images);
        } catch (const std::exception& e) {
            throw SessionError(SessionErrc::TargetNotRenderable, e.what());
        }
        const auto verdict = is_foldable(pattern_, cfg_.images.budget);
        folded_ = *verdict.witness;
        render_current();
    }

    [[nodiscard]] Observation observe() const {
        return {target_img_, current_img_, cp_img_, feedback_, cfg_.prompt_template_id, record_.attempts.size(),
                cfg_.max_steps};
    }

    /// Parses and executes one raw agent message. Unparseable text is a
    /// rejected attempt, not an error.
    StepVerdict submit(std::string raw) {
        ensure_open();
        Attempt attempt;
        attempt.raw = std::move(raw);
        try {
            attempt.action = parse_action(attempt.raw, pattern_.size());
        } catch (const ActionError& e) {
            attempt.verdict = {false, std::string(to_string(e.code())), e.what()};
        }
        if (attempt.action) execute(attempt);
        return log(std::move(attempt));
    }

    StepVerdict step(const AgentAction& action) {
        ensure_open();
        Attempt attempt;
        attempt.raw = to_json(action).dump();
        attempt.action = action;
        execute(attempt);
        return log(std::move(attempt));
    }

    /// Closes the session and scores it. Semantic similarity is left empty
    /// without a scorer or when the scorer fails.
    EpisodeScore finish(EmbeddingScorer* scorer = nullptr) {
        if (closed_ && record_.score) return *record_.score;
        closed_ = true;
        EpisodeScore s;
        s.steps_attempted = record_.attempts.size();
        s.steps_valid = record_.steps_valid();
        s.steps_reshaping = static_cast<std::size_t>(std::count_if(
            record_.attempts.begin(), record_.attempts.end(), [](const Attempt& a) { return a.reshaped; }));
        s.qe = query_efficiency(s.steps_valid, s.steps_attempted);
        s.gs = iou(current_mask_, extract_mask(target_img_));
        if (scorer != nullptr) s.ss = semantic_similarity(current_img_, target_img_, *scorer);
        record_.final_fold = serialize_fold(pattern_.to_fold());
        record_.score = s;
        return s;
    }

    void note_transport_error(std::string what) { record_.transport_error = std::move(what); }

    [[nodiscard]] bool closed() const noexcept { return closed_; }
    [[nodiscard]] bool budget_left() const noexcept { return record_.attempts.size() < cfg_.max_steps; }
    [[nodiscard]] const CreasePattern& pattern() const noexcept { return pattern_; }
    [[nodiscard]] const FoldedState& folded() const noexcept { return folded_; }
    [[nodiscard]] const EpisodeRecord& record() const noexcept { return record_; }
    [[nodiscard]] const SessionConfig& config() const noexcept { return cfg_; }

private:
    void ensure_open() const {
        if (closed_) throw SessionError(SessionErrc::SessionClosed, "session is closed");
        if (!budget_left()) throw SessionError(SessionErrc::BudgetExhausted, "step budget exhausted");
    }

    void execute(Attempt& attempt) {
        auto result = apply_action(pattern_, *attempt.action, cfg_.images.budget);
        if (result.accepted) {
            pattern_ = std::move(result.pattern);
            folded_ = std::move(*result.folded);
            const BinaryMask before = current_mask_;
            render_current();
            attempt.reshaped = current_mask_ != before;
        }
        attempt.verdict = {result.accepted, std::move(result.status), std::move(result.reason)};
    }

    StepVerdict log(Attempt attempt) {
        attempt.timestamp_ms = std::chrono::duration_cast<std::chrono::milliseconds>(
                                   std::chrono::system_clock::now().time_since_epoch())
                                   .count();
        feedback_ = attempt.verdict.accepted;
        record_.attempts.push_back(std::move(attempt));
        return record_.attempts.back().verdict;
    }

    void render_current() {
        const auto& o = cfg_.images;
        current_img_ = rasterize(render_folded(pattern_, folded_, Side::Front, o.style), o.width, o.height, o.style.margin);
        cp_img_ = rasterize(render_crease_pattern(pattern_, o.style), o.width, o.height, o.style.margin);
        current_mask_ = extract_mask(current_img_);
    }

    SessionConfig cfg_;
    FoldFile target_;
    CreasePattern pattern_;
    FoldedState folded_;
    RasterImage target_img_, current_img_, cp_img_;
    BinaryMask current_mask_;
    bool feedback_ = true;
    bool closed_ = false;
    EpisodeRecord record_;
};

// ---------------------------------------------------------------------------
// Agents

class AgentTransportError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Receives an observation, answers with raw text or nothing to stop.
class AgentClient {
public:
    virtual ~AgentClient() = default;
    virtual std::optional<std::string> act(const Observation& obs) = 0;
};

/// Replays fixed messages in order, then stops.
class ScriptedAgent final : public AgentClient {
public:
    explicit ScriptedAgent(std::vector<std::string> messages) : messages_(std::move(messages)) {}

    std::optional<std::string> act(const Observation&) override {
        if (next_ >= messages_.size()) return std::nullopt;
        return messages_[next_++];
    }

private:
    std::vector<std::string> messages_;
    std::size_t next_ = 0;
};

class NullAgent final : public AgentClient {
public:
    std::optional<std::string> act(const Observation&) override { return std::nullopt; }
};

/// Uniform draw in [0, n) from a 64-bit engine, identical on every platform.
inline std::size_t uniform_index(std::mt19937_64& rng, std::size_t n) {
    const std::uint64_t bound = n;
    const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() - std::numeric_limits<std::uint64_t>::max() % bound;
    std::uint64_t x = rng();
    while (x >= limit) x = rng();
    return static_cast<std::size_t>(x % bound);
}

/// Baseline emitting random edge-to-edge creases on a grid along the
/// sheet boundary, with random mountain/valley assignment.
class RandomAgent final : public AgentClient {
public:
    explicit RandomAgent(std::uint64_t seed, double grid = 0.25, double size = CreasePattern::default_size)
        : rng_(seed), grid_(grid), size_(size) {}

    std::optional<std::string> act(const Observation&) override {
        const auto slots = static_cast<std::size_t>(std::llround(4.0 * size_ / grid_));
        for (;;) {
            const Vec2 a = perimeter_point(uniform_index(rng_, slots));
            const Vec2 b = perimeter_point(uniform_index(rng_, slots));
            if (same_side(a, b)) continue;
            const char* asg = uniform_index(rng_, 2) == 0 ? "M" : "V";
            nlohmann::json j{{"action", "add_crease"}, {"p1", {a.x, a.y}}, {"p2", {b.x, b.y}}, {"assignment", asg}};
            return j.dump();
        }
    }

private:
    [[nodiscard]] Vec2 perimeter_point(std::size_t slot) const {
        const double s = static_cast<double>(slot) * grid_;
        if (s < size_) return {s, 0.0};
        if (s < 2 * size_) return {size_, s - size_};
        if (s < 3 * size_) return {3 * size_ - s, size_};
        return {0.0, 4 * size_ - s};
    }

    [[nodiscard]] bool same_side(Vec2 a, Vec2 b) const {
        return (a.x == 0.0 && b.x == 0.0) || (a.y == 0.0 && b.y == 0.0) || (a.x == size_ && b.x == size_) ||
               (a.y == size_ && b.y == size_);
    }

    std::mt19937_64 rng_;
    double grid_;
    double size_;
};

/// Runs observation -> agent -> step until the budget is spent or the agent
/// stops, then scores. A transport failure ends the episode early.
inline EpisodeRecord run_episode(std::string episode_id, std::string target_name, const FoldFile& target,
                                 AgentClient& agent, const SessionConfig& cfg = {}, EmbeddingScorer* scorer = nullptr) {
    Session session(std::move(episode_id), std::move(target_name), target, cfg);
    while (session.budget_left()) {
        std::optional<std::string> raw;
        try {
            raw = agent.act(session.observe());
        } catch (const AgentTransportError& e) {
            session.note_transport_error(e.what());
            break;
        }
        if (!raw) break;
        session.submit(std::move(*raw));
    }
    session.finish(scorer);
    return session.record();
}

inline nlohmann::json to_json(const EpisodeScore& s) {
    return {{"qe", s.qe},
            {"gs", s.gs},
            {"ss", s.ss ? nlohmann::json(*s.ss) : nlohmann::json(nullptr)},
            {"steps_attempted", s.steps_attempted},
            {"steps_valid", s.steps_valid},
            {"steps_reshaping", s.steps_reshaping}};
}

inline nlohmann::json to_json(const EpisodeRecord& r) {
    nlohmann::json attempts = nlohmann::json::array();
    for (const auto& a : r.attempts) {
        attempts.push_back({{"raw", a.raw},
                            {"action", a.action ? to_json(*a.action) : nlohmann::json(nullptr)},
                            {"accepted", a.verdict.accepted},
                            {"status", a.verdict.status},
                            {"reason", a.verdict.reason},
                            {"reshaped", a.reshaped},
                            {"timestamp_ms", a.timestamp_ms}});
    }
    nlohmann::json j{{"episode_id", r.episode_id},
                     {"target", r.target},
                     {"max_steps", r.max_steps},
                     {"attempts", std::move(attempts)},
                     {"final_fold", r.final_fold}};
    j["transport_error"] = r.transport_error ? nlohmann::json(*r.transport_error) : nlohmann::json(nullptr);
    j["score"] = r.score ? to_json(*r.score) : nlohmann::json(nullptr);
    return j;
}

/// Raw agent messages of a recorded episode, in order.
inline std::vector<std::string> recorded_messages(const nlohmann::json& record) {
    std::vector<std::string> out;
    for (const auto& a : record.at("attempts")) out.push_back(a.at("raw").get<std::string>());
    return out;
}

} // namespace forge
