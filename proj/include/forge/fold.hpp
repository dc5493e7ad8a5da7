#pragma once

#include "forge/error.hpp"
#include "forge/geometry.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <array>
#include <charconv>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

namespace forge {

enum class Assignment : std::uint8_t { Mountain, Valley, Boundary, Flat };

constexpr char to_char(Assignment a) noexcept {
    switch (a) {
    case Assignment::Mountain: return 'M';
    case Assignment::Valley: return 'V';
    case Assignment::Boundary: return 'B';
    case Assignment::Flat: return 'F';
    }
    return '?';
}

constexpr std::optional<Assignment> assignment_from(std::string_view s) noexcept {
    if (s == "M") return Assignment::Mountain;
    if (s == "V") return Assignment::Valley;
    if (s == "B") return Assignment::Boundary;
    if (s == "F") return Assignment::Flat;
    return std::nullopt;
}

constexpr bool is_crease(Assignment a) noexcept {
    return a == Assignment::Mountain || a == Assignment::Valley;
}

enum class FoldErrc { Syntax, Schema, Index, Mismatch };
using FoldError = CodedError<FoldErrc>;

using VertexPair = std::array<std::size_t, 2>;

/// The subset of a FOLD document the environment understands. Keys outside
/// the four core arrays are carried as compact JSON text and written back
/// unchanged.
struct FoldFile {
    std::vector<Vec2> vertices_coords;
    std::vector<VertexPair> edges_vertices;
    std::vector<Assignment> edges_assignment;
    std::vector<std::vector<std::size_t>> faces_vertices;
    std::map<std::string, std::string> extra_fields;

    friend bool operator==(const FoldFile&, const FoldFile&) = default;
};

namespace detail {

inline std::string format_number(double v) {
    if (v == 0.0) v = 0.0; // drop the sign of -0
    std::array<char, 64> buf{};
    const auto res = std::to_chars(buf.data(), buf.data() + buf.size(), v);
    return {buf.data(), res.ptr};
}

inline double as_number(const nlohmann::json& j, const char* field) {
    if (!j.is_number()) throw FoldError(FoldErrc::Schema, std::string(field) + ": expected a number");
    return j.get<double>();
}

inline std::size_t as_index(const nlohmann::json& j, const char* field) {
    if (!j.is_number_integer() && !j.is_number_unsigned())
        throw FoldError(FoldErrc::Schema, std::string(field) + ": expected a vertex index");
    const auto v = j.get<std::int64_t>();
    if (v < 0) throw FoldError(FoldErrc::Index, std::string(field) + ": negative vertex index");
    return static_cast<std::size_t>(v);
}

inline const nlohmann::json& require_array(const nlohmann::json& doc, const char* key) {
    const auto it = doc.find(key);
    if (it == doc.end()) throw FoldError(FoldErrc::Schema, std::string("missing ") + key);
    if (!it->is_array()) throw FoldError(FoldErrc::Schema, std::string(key) + " is not an array");
    return *it;
}

} // namespace detail

inline constexpr std::array<std::string_view, 4> core_fold_keys{
    "vertices_coords", "edges_vertices", "edges_assignment", "faces_vertices"};

/// Checks the structural invariants of a FoldFile; throws FoldError.
inline void validate(const FoldFile& f) {
    const std::size_t nv = f.vertices_coords.size();
    if (f.edges_vertices.size() != f.edges_assignment.size())
        throw FoldError(FoldErrc::Mismatch, "edges_assignment has " + std::to_string(f.edges_assignment.size()) +
                                                " entries for " + std::to_string(f.edges_vertices.size()) + " edges");
    for (std::size_t e = 0; e < f.edges_vertices.size(); ++e) {
        const auto [u, v] = f.edges_vertices[e];
        if (u >= nv || v >= nv)
            throw FoldError(FoldErrc::Index, "edge " + std::to_string(e) + " references a missing vertex");
        if (u == v) throw FoldError(FoldErrc::Schema, "edge " + std::to_string(e) + " is a loop");
    }
    for (std::size_t i = 0; i < f.faces_vertices.size(); ++i) {
        const auto& face = f.faces_vertices[i];
        for (std::size_t v : face)
            if (v >= nv) throw FoldError(FoldErrc::Index, "face " + std::to_string(i) + " references a missing vertex");
        const std::set<std::size_t> distinct(face.begin(), face.end());
        if (face.size() < 3 || distinct.size() != face.size())
            throw FoldError(FoldErrc::Schema, "face " + std::to_string(i) + " is not a simple cycle of >= 3 vertices");
    }
}

/// Parses a FOLD (JSON) document. Only 2D coordinates are accepted.
inline FoldFile parse_fold(std::string_view text) {
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(text.begin(), text.end());
    } catch (const nlohmann::json::parse_error& e) {
        throw FoldError(FoldErrc::Syntax, e.what());
    }
    if (!doc.is_object()) throw FoldError(FoldErrc::Syntax, "FOLD document must be an object");

    FoldFile f;
    for (const auto& p : detail::require_array(doc, "vertices_coords")) {
        if (!p.is_array() || p.size() != 2) throw FoldError(FoldErrc::Schema, "vertices_coords: expected [x, y]");
        f.vertices_coords.push_back({detail::as_number(p[0], "vertices_coords"), detail::as_number(p[1], "vertices_coords")});
    }
    for (const auto& e : detail::require_array(doc, "edges_vertices")) {
        if (!e.is_array() || e.size() != 2) throw FoldError(FoldErrc::Schema, "edges_vertices: expected [u, v]");
        f.edges_vertices.push_back({detail::as_index(e[0], "edges_vertices"), detail::as_index(e[1], "edges_vertices")});
    }
    for (const auto& a : detail::require_array(doc, "edges_assignment")) {
        if (!a.is_string()) throw FoldError(FoldErrc::Schema, "edges_assignment: expected a string");
        const auto parsed = assignment_from(a.get_ref<const std::string&>());
        if (!parsed) throw FoldError(FoldErrc::Schema, "edges_assignment: unsupported value " + a.dump());
        f.edges_assignment.push_back(*parsed);
    }
    for (const auto& face : detail::require_array(doc, "faces_vertices")) {
        if (!face.is_array()) throw FoldError(FoldErrc::Schema, "faces_vertices: expected an index list");
        auto& cycle = f.faces_vertices.emplace_back();
        for (const auto& v : face) cycle.push_back(detail::as_index(v, "faces_vertices"));
    }
    for (const auto& [key, value] : doc.items()) {
        if (std::find(core_fold_keys.begin(), core_fold_keys.end(), key) == core_fold_keys.end())
            f.extra_fields.emplace(key, value.dump());
    }
    validate(f);
    return f;
}

/// Canonical text: core arrays in a fixed order, then extra keys sorted by
/// name, shortest round-trip decimals. Equal inputs give equal bytes.
inline std::string serialize_fold(const FoldFile& f) {
    std::string out = "{\n";
    const auto key = [&](std::string_view k) {
        out += "  \"";
        out += k;
        out += "\": ";
    };
    const auto rows = [&](std::size_t n, auto&& emit_row) {
        if (n == 0) {
            out += "[]";
            return;
        }
        out += "[\n";
        for (std::size_t i = 0; i < n; ++i) {
            out += "    ";
            emit_row(i);
            out += i + 1 < n ? ",\n" : "\n";
        }
        out += "  ]";
    };

    key("vertices_coords");
    rows(f.vertices_coords.size(), [&](std::size_t i) {
        out += '[' + detail::format_number(f.vertices_coords[i].x) + ", " +
               detail::format_number(f.vertices_coords[i].y) + ']';
    });
    out += ",\n";
    key("edges_vertices");
    rows(f.edges_vertices.size(), [&](std::size_t i) {
        out += '[' + std::to_string(f.edges_vertices[i][0]) + ", " + std::to_string(f.edges_vertices[i][1]) + ']';
    });
    out += ",\n";
    key("edges_assignment");
    rows(f.edges_assignment.size(), [&](std::size_t i) {
        out += '"';
        out += to_char(f.edges_assignment[i]);
        out += '"';
    });
    out += ",\n";
    key("faces_vertices");
    rows(f.faces_vertices.size(), [&](std::size_t i) {
        out += '[';
        const auto& face = f.faces_vertices[i];
        for (std::size_t k = 0; k < face.size(); ++k) {
            if (k) out += ", ";
            out += std::to_string(face[k]);
        }
        out += ']';
    });
    for (const auto& [k, v] : f.extra_fields) {
        out += ",\n  " + nlohmann::json(k).dump() + ": " + v;
    }
    out += "\n}\n";
    return out;
}

enum class Complexity { Easy, Medium, Hard };

constexpr std::string_view to_string(Complexity c) noexcept {
    switch (c) {
    case Complexity::Easy: return "Easy";
    case Complexity::Medium: return "Medium";
    case Complexity::Hard: return "Hard";
    }
    return "?";
}

/// Inclusive upper bounds for the Easy and Medium tiers. A design's tier is
/// the harder of its crease-count tier and its vertex-count tier.
struct ComplexityThresholds {
    std::size_t easy_max_creases = 20;
    std::size_t medium_max_creases = 60;
    std::size_t easy_max_vertices = std::numeric_limits<std::size_t>::max();
    std::size_t medium_max_vertices = std::numeric_limits<std::size_t>::max();
};

constexpr Complexity classify_complexity(std::size_t vertex_count, std::size_t crease_count,
                                         const ComplexityThresholds& t = {}) noexcept {
    const auto tier = [](std::size_t n, std::size_t easy, std::size_t medium) {
        if (n <= easy) return 0;
        if (n <= medium) return 1;
        return 2;
    };
    const int worst = std::max(tier(crease_count, t.easy_max_creases, t.medium_max_creases),
                               tier(vertex_count, t.easy_max_vertices, t.medium_max_vertices));
    return static_cast<Complexity>(worst);
}

struct DesignMeta {
    std::string category;
    Complexity complexity = Complexity::Easy;
    std::size_t vertex_count = 0;
    std::size_t crease_count = 0;
};

/// Counts M/V edges as creases; B and F edges are not fold lines.
inline DesignMeta describe(const FoldFile& f, std::string category, const ComplexityThresholds& t = {}) {
    DesignMeta m;
    m.category = std::move(category);
    m.vertex_count = f.vertices_coords.size();
    m.crease_count = static_cast<std::size_t>(
        std::count_if(f.edges_assignment.begin(), f.edges_assignment.end(), is_crease));
    m.complexity = classify_complexity(m.vertex_count, m.crease_count, t);
    return m;
}

} // namespace forge
