#pragma once

#include "forge/error.hpp"
#include "forge/fold.hpp"
#include "forge/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <numeric>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace forge {

enum class CpErrc {
    DegenerateSegment,
    OutOfBounds,
    CollinearOverlap,
    DuplicateCrease,
    InvalidAssignment,
    UnknownVertex,
    NonPlanar,
};
using CpError = CodedError<CpErrc>;

constexpr std::string_view to_string(CpErrc c) noexcept {
    switch (c) {
    case CpErrc::DegenerateSegment: return "DegenerateSegment";
    case CpErrc::OutOfBounds: return "OutOfBounds";
    case CpErrc::CollinearOverlap: return "CollinearOverlap";
    case CpErrc::DuplicateCrease: return "DuplicateCrease";
    case CpErrc::InvalidAssignment: return "InvalidAssignment";
    case CpErrc::UnknownVertex: return "UnknownVertex";
    case CpErrc::NonPlanar: return "NonPlanar";
    }
    return "?";
}

struct Segment {
    Vec2 p1;
    Vec2 p2;
};

struct Edge {
    VertexPair v;
    Assignment assignment = Assignment::Flat;

    friend bool operator==(const Edge&, const Edge&) = default;
};

inline constexpr std::size_t no_face = std::numeric_limits<std::size_t>::max();

/// One incident edge of a vertex star, with its direction leaving the vertex.
struct StarEdge {
    std::size_t edge = 0;
    std::size_t other = 0;
    double angle = 0.0;
    Assignment assignment = Assignment::Flat;
};

/// Edges around a vertex in counter-clockwise order. `sectors[i]` is the
/// angle from `edges[i]` to `edges[i + 1]`. Interior stars wrap around and
/// have as many sectors as edges; boundary stars start just inside the
/// paper and have one sector fewer.
struct VertexStar {
    std::size_t vertex = 0;
    bool interior = false;
    std::vector<StarEdge> edges;
    std::vector<double> sectors;
};

/// Planar arrangement of creases on a square sheet, kept in FOLD layout.
///
/// Vertex and edge indices are stable under insertion: new vertices are
/// appended in (x, y) order and split edges keep their index for the piece
/// nearest their first vertex. Faces are re-extracted after every change and
/// stored counter-clockwise, rotated to start at their smallest vertex, and
/// sorted.
class CreasePattern {
public:
    static constexpr double default_size = 10.0;
    static constexpr double default_epsilon = 1e-6;

    static CreasePattern blank(double size = default_size, double epsilon = default_epsilon) {
        CreasePattern cp;
        cp.size_ = size;
        cp.eps_ = epsilon;
        cp.vertices_ = {{0.0, 0.0}, {size, 0.0}, {size, size}, {0.0, size}};
        for (std::size_t i = 0; i < 4; ++i) cp.edges_.push_back({{i, (i + 1) % 4}, Assignment::Boundary});
        cp.rebuild_faces();
        return cp;
    }

    /// Adopts the vertices and edges of a FOLD file (faces are re-derived).
    /// Throws CpError when the graph leaves the sheet or is not planar.
    static CreasePattern from_fold(const FoldFile& f, double size = default_size, double epsilon = default_epsilon) {
        validate(f);
        CreasePattern cp;
        cp.size_ = size;
        cp.eps_ = epsilon;
        cp.vertices_ = f.vertices_coords;
        for (const Vec2& p : cp.vertices_)
            if (!cp.in_bounds(p)) throw CpError(CpErrc::OutOfBounds, "vertex outside the sheet");
        for (std::size_t e = 0; e < f.edges_vertices.size(); ++e)
            cp.edges_.push_back({f.edges_vertices[e], f.edges_assignment[e]});
        if (const auto bad = cp.find_crossing())
            throw CpError(CpErrc::NonPlanar, "edges " + std::to_string(bad->first) + " and " +
                                                 std::to_string(bad->second) + " intersect");
        cp.extras_ = f.extra_fields;
        cp.rebuild_faces();
        return cp;
    }

    [[nodiscard]] FoldFile to_fold() const {
        FoldFile f;
        f.vertices_coords = vertices_;
        for (const Edge& e : edges_) {
            f.edges_vertices.push_back(e.v);
            f.edges_assignment.push_back(e.assignment);
        }
        f.faces_vertices = faces_;
        f.extra_fields = extras_;
        return f;
    }

    [[nodiscard]] const std::vector<Vec2>& vertices() const noexcept { return vertices_; }
    [[nodiscard]] const std::vector<Edge>& edges() const noexcept { return edges_; }
    [[nodiscard]] const std::vector<std::vector<std::size_t>>& faces() const noexcept { return faces_; }
    /// Faces on either side of each edge: [left of v0->v1, left of v1->v0].
    [[nodiscard]] const std::vector<std::array<std::size_t, 2>>& edge_faces() const noexcept { return edge_faces_; }
    [[nodiscard]] double size() const noexcept { return size_; }
    [[nodiscard]] double epsilon() const noexcept { return eps_; }
    [[nodiscard]] bool connected() const noexcept { return components_ == 1; }

    [[nodiscard]] Polygon face_polygon(std::size_t f) const {
        Polygon poly;
        for (std::size_t v : faces_.at(f)) poly.push_back(vertices_[v]);
        return poly;
    }

    [[nodiscard]] double face_area(std::size_t f) const { return signed_area(face_polygon(f)); }

    [[nodiscard]] bool on_boundary(Vec2 p) const noexcept {
        return std::abs(p.x) <= eps_ || std::abs(p.y) <= eps_ || std::abs(p.x - size_) <= eps_ ||
               std::abs(p.y - size_) <= eps_;
    }

    [[nodiscard]] bool in_bounds(Vec2 p) const noexcept {
        return p.x >= -eps_ && p.y >= -eps_ && p.x <= size_ + eps_ && p.y <= size_ + eps_;
    }

    [[nodiscard]] std::size_t crease_count() const noexcept {
        return static_cast<std::size_t>(
            std::count_if(edges_.begin(), edges_.end(), [](const Edge& e) { return is_crease(e.assignment); }));
    }

    /// First pair of edges that meet anywhere other than a shared endpoint.
    [[nodiscard]] std::optional<std::pair<std::size_t, std::size_t>> find_crossing() const {
        for (std::size_t i = 0; i < edges_.size(); ++i) {
            for (std::size_t j = i + 1; j < edges_.size(); ++j) {
                if (edges_meet_improperly(i, j)) return std::pair{i, j};
            }
        }
        return std::nullopt;
    }

    [[nodiscard]] VertexStar vertex_star(std::size_t v) const {
        if (v >= vertices_.size()) throw CpError(CpErrc::UnknownVertex, "vertex " + std::to_string(v));
        VertexStar star;
        star.vertex = v;
        star.interior = !on_boundary(vertices_[v]);
        for (std::size_t e = 0; e < edges_.size(); ++e) {
            const auto [a, b] = edges_[e].v;
            if (a != v && b != v) continue;
            const std::size_t other = a == v ? b : a;
            const Vec2 d = vertices_[other] - vertices_[v];
            star.edges.push_back({e, other, std::atan2(d.y, d.x), edges_[e].assignment});
        }
        std::sort(star.edges.begin(), star.edges.end(),
                  [](const StarEdge& l, const StarEdge& r) { return l.angle < r.angle || (l.angle == r.angle && l.edge < r.edge); });
        const std::size_t n = star.edges.size();
        if (n == 0) return star;
        std::vector<double> gaps(n);
        for (std::size_t i = 0; i < n; ++i) {
            double g = star.edges[(i + 1) % n].angle - star.edges[i].angle;
            if (g <= 0.0) g += 2.0 * pi;
            gaps[i] = g;
        }
        if (star.interior) {
            star.sectors = std::move(gaps);
            return star;
        }
        // drop the gap that opens onto the outside of the sheet
        std::size_t outside = 0;
        for (std::size_t i = 0; i < n; ++i) {
            const double mid = star.edges[i].angle + 0.5 * gaps[i];
            const Vec2 probe = vertices_[v] + 1e-3 * Vec2{std::cos(mid), std::sin(mid)};
            if (probe.x < 0.0 || probe.y < 0.0 || probe.x > size_ || probe.y > size_) {
                outside = i;
                break;
            }
        }
        std::rotate(star.edges.begin(), star.edges.begin() + static_cast<std::ptrdiff_t>((outside + 1) % n),
                    star.edges.end());
        std::rotate(gaps.begin(), gaps.begin() + static_cast<std::ptrdiff_t>((outside + 1) % n), gaps.end());
        gaps.pop_back();
        star.sectors = std::move(gaps);
        return star;
    }

    /// Adds a mountain or valley crease, splitting it at every crossing with
    /// the existing arrangement. Throws CpError; *this is unchanged on error.
    void insert_crease(Segment s, Assignment a) {
        if (!is_crease(a)) throw CpError(CpErrc::InvalidAssignment, "creases must be M or V");
        for (Vec2 p : {s.p1, s.p2}) {
            if (!std::isfinite(p.x) || !std::isfinite(p.y) || !in_bounds(p))
                throw CpError(CpErrc::OutOfBounds, "crease endpoint outside the sheet");
        }
        Vec2 p = clamp_to_sheet(snap(clamp_to_sheet(s.p1)));
        Vec2 q = clamp_to_sheet(snap(clamp_to_sheet(s.p2)));
        if (distance(p, q) <= eps_) throw CpError(CpErrc::DegenerateSegment, "crease has no length");
        if (lex_less(q, p)) std::swap(p, q);
        const double len = distance(p, q);

        check_overlap(p, q, a);

        // Points along the crease: parameter, existing vertex (if any), position.
        struct Stop {
            double t;
            std::size_t vertex;
            Vec2 pos;
        };
        std::vector<Stop> stops;
        // Edge splits: edge index -> new points in its interior.
        std::vector<std::pair<std::size_t, Vec2>> splits;

        for (std::size_t v = 0; v < vertices_.size(); ++v) {
            if (segment_distance(vertices_[v], p, q) <= eps_)
                stops.push_back({project_length(vertices_[v], p, q), v, vertices_[v]});
        }
        const Vec2 dir = q - p;
        for (std::size_t e = 0; e < edges_.size(); ++e) {
            const Vec2 a0 = vertices_[edges_[e].v[0]], a1 = vertices_[edges_[e].v[1]];
            if (segment_distance(a0, p, q) <= eps_ || segment_distance(a1, p, q) <= eps_) continue;
            const double elen = distance(a0, a1);
            Vec2 hit;
            if (segment_distance(p, a0, a1) <= eps_) {
                hit = p;
            } else if (segment_distance(q, a0, a1) <= eps_) {
                hit = q;
            } else {
                const auto tu = line_intersection(p, dir, a0, a1 - a0);
                if (!tu) continue;
                const auto [t, u] = *tu;
                if (t * len <= eps_ || (1.0 - t) * len <= eps_ || u * elen <= eps_ || (1.0 - u) * elen <= eps_) continue;
                hit = p + t * dir;
            }
            splits.emplace_back(e, hit);
            stops.push_back({project_length(hit, p, q), no_vertex, hit});
        }
        const auto has_stop_near = [&](double t) {
            return std::any_of(stops.begin(), stops.end(), [&](const Stop& st) { return std::abs(st.t - t) <= eps_; });
        };
        if (!has_stop_near(0.0)) stops.push_back({0.0, no_vertex, p});
        if (!has_stop_near(len)) stops.push_back({len, no_vertex, q});

        std::sort(stops.begin(), stops.end(), [](const Stop& l, const Stop& r) {
            if (l.t != r.t) return l.t < r.t;
            return l.vertex < r.vertex;
        });
        // merge stops closer than epsilon, preferring existing vertices
        std::vector<Stop> merged;
        for (const Stop& st : stops) {
            if (!merged.empty() && st.t - merged.back().t <= eps_) {
                if (merged.back().vertex == no_vertex && st.vertex != no_vertex) merged.back() = st;
                continue;
            }
            merged.push_back(st);
        }

        // new vertices in canonical (x, y) order
        std::vector<std::size_t> fresh;
        for (std::size_t i = 0; i < merged.size(); ++i)
            if (merged[i].vertex == no_vertex) fresh.push_back(i);
        std::sort(fresh.begin(), fresh.end(),
                  [&](std::size_t l, std::size_t r) { return lex_less(merged[l].pos, merged[r].pos); });
        std::vector<Vec2> vertices = vertices_;
        for (std::size_t i : fresh) {
            merged[i].vertex = vertices.size();
            vertices.push_back(merged[i].pos);
        }
        const auto vertex_at = [&](Vec2 pos) {
            const double t = project_length(pos, p, q);
            const auto it = std::min_element(merged.begin(), merged.end(), [&](const Stop& l, const Stop& r) {
                return std::abs(l.t - t) < std::abs(r.t - t);
            });
            return it->vertex;
        };

        std::vector<Edge> edges = edges_;
        // split crossed edges; pieces inherit the assignment
        std::sort(splits.begin(), splits.end(), [&](const auto& l, const auto& r) {
            if (l.first != r.first) return l.first < r.first;
            const Vec2 a0 = vertices_[edges_[l.first].v[0]];
            return distance(a0, l.second) < distance(a0, r.second);
        });
        for (std::size_t i = 0; i < splits.size();) {
            const std::size_t e = splits[i].first;
            std::vector<std::size_t> chain{edges_[e].v[0]};
            for (; i < splits.size() && splits[i].first == e; ++i) {
                const std::size_t m = vertex_at(splits[i].second);
                if (chain.back() != m) chain.push_back(m);
            }
            chain.push_back(edges_[e].v[1]);
            edges[e].v = {chain[0], chain[1]};
            for (std::size_t k = 1; k + 1 < chain.size(); ++k) edges.push_back({{chain[k], chain[k + 1]}, edges_[e].assignment});
        }
        for (std::size_t i = 0; i + 1 < merged.size(); ++i) {
            if (merged[i].vertex == merged[i + 1].vertex) continue;
            edges.push_back({{merged[i].vertex, merged[i + 1].vertex}, a});
        }

        vertices_ = std::move(vertices);
        edges_ = std::move(edges);
        rebuild_faces();
    }

    friend bool operator==(const CreasePattern& l, const CreasePattern& r) {
        return l.vertices_ == r.vertices_ && l.edges_ == r.edges_ && l.faces_ == r.faces_ && l.extras_ == r.extras_;
    }

private:
    static constexpr std::size_t no_vertex = std::numeric_limits<std::size_t>::max();

    [[nodiscard]] Vec2 clamp_to_sheet(Vec2 p) const noexcept {
        return {std::clamp(p.x, 0.0, size_), std::clamp(p.y, 0.0, size_)};
    }

    /// Moves p onto an existing vertex or edge closer than epsilon.
    [[nodiscard]] Vec2 snap(Vec2 p) const noexcept {
        for (const Vec2& v : vertices_)
            if (distance(v, p) <= eps_) return v;
        for (const Edge& e : edges_) {
            const Vec2 a = vertices_[e.v[0]], b = vertices_[e.v[1]];
            if (segment_distance(p, a, b) <= eps_) {
                const Vec2 d = b - a;
                const double t = std::clamp(dot(p - a, d) / dot(d, d), 0.0, 1.0);
                return a + t * d;
            }
        }
        return p;
    }

    void check_overlap(Vec2 p, Vec2 q, Assignment a) const {
        const double len = distance(p, q);
        std::vector<std::pair<double, double>> covered;
        bool same_assignment = true;
        for (const Edge& e : edges_) {
            const Vec2 a0 = vertices_[e.v[0]], a1 = vertices_[e.v[1]];
            if (line_distance(a0, p, q) > eps_ || line_distance(a1, p, q) > eps_) continue;
            double t0 = project_length(a0, p, q), t1 = project_length(a1, p, q);
            if (t0 > t1) std::swap(t0, t1);
            const double lo = std::max(t0, 0.0), hi = std::min(t1, len);
            if (hi - lo <= eps_) continue;
            covered.emplace_back(lo, hi);
            same_assignment = same_assignment && e.assignment == a;
        }
        if (covered.empty()) return;
        std::sort(covered.begin(), covered.end());
        double reach = 0.0;
        for (const auto& [lo, hi] : covered) {
            if (lo > reach + eps_) break;
            reach = std::max(reach, hi);
        }
        if (same_assignment && reach >= len - eps_)
            throw CpError(CpErrc::DuplicateCrease, "crease already present");
        throw CpError(CpErrc::CollinearOverlap, "crease overlaps an existing edge");
    }

    [[nodiscard]] bool edges_meet_improperly(std::size_t i, std::size_t j) const {
        const auto [a, b] = edges_[i].v;
        const auto [c, d] = edges_[j].v;
        const Vec2 pa = vertices_[a], pb = vertices_[b], pc = vertices_[c], pd = vertices_[d];
        const auto touches = [&](std::size_t v, Vec2 pv, std::size_t s0, std::size_t s1, Vec2 q0, Vec2 q1) {
            return v != s0 && v != s1 && segment_distance(pv, q0, q1) <= eps_;
        };
        if (touches(a, pa, c, d, pc, pd) || touches(b, pb, c, d, pc, pd) || touches(c, pc, a, b, pa, pb) ||
            touches(d, pd, a, b, pa, pb))
            return true;
        if (a == c || a == d || b == c || b == d) return false;
        const auto tu = line_intersection(pa, pb - pa, pc, pd - pc);
        if (!tu) return false;
        const auto [t, u] = *tu;
        return t > 0.0 && t < 1.0 && u > 0.0 && u < 1.0;
    }

    void rebuild_faces() {
        const std::size_t nv = vertices_.size();
        // outgoing half-edges per vertex sorted by angle; half-edge h = 2e (+1 reversed)
        std::vector<std::vector<std::size_t>> out(nv);
        const auto from = [&](std::size_t h) { return edges_[h / 2].v[h % 2]; };
        const auto to = [&](std::size_t h) { return edges_[h / 2].v[1 - h % 2]; };
        const auto angle = [&](std::size_t h) {
            const Vec2 d = vertices_[to(h)] - vertices_[from(h)];
            return std::atan2(d.y, d.x);
        };
        for (std::size_t h = 0; h < 2 * edges_.size(); ++h) out[from(h)].push_back(h);
        std::vector<std::size_t> slot(2 * edges_.size());
        for (auto& hs : out) {
            std::sort(hs.begin(), hs.end(), [&](std::size_t l, std::size_t r) { return angle(l) < angle(r); });
            for (std::size_t k = 0; k < hs.size(); ++k) slot[hs[k]] = k;
        }
        // next half-edge keeping the face on the left: at the head, turn to the
        // outgoing edge just clockwise of the reversed edge
        const auto next = [&](std::size_t h) {
            const std::size_t twin = h ^ 1U;
            const auto& hs = out[from(twin)];
            return hs[(slot[twin] + hs.size() - 1) % hs.size()];
        };

        std::vector<std::size_t> cycle_of(2 * edges_.size(), no_face);
        std::vector<std::vector<std::size_t>> cycles;
        std::vector<std::vector<std::size_t>> cycle_halfedges;
        for (std::size_t h0 = 0; h0 < 2 * edges_.size(); ++h0) {
            if (cycle_of[h0] != no_face) continue;
            std::vector<std::size_t> verts, hs;
            for (std::size_t h = h0; cycle_of[h] == no_face; h = next(h)) {
                cycle_of[h] = cycles.size();
                verts.push_back(from(h));
                hs.push_back(h);
            }
            cycles.push_back(std::move(verts));
            cycle_halfedges.push_back(std::move(hs));
        }

        // bounded faces are the counter-clockwise cycles with area
        std::vector<std::pair<std::vector<std::size_t>, std::size_t>> faces;
        for (std::size_t c = 0; c < cycles.size(); ++c) {
            Polygon poly;
            for (std::size_t v : cycles[c]) poly.push_back(vertices_[v]);
            if (signed_area(poly) <= eps_ * eps_) continue;
            auto cyc = cycles[c];
            std::rotate(cyc.begin(), std::min_element(cyc.begin(), cyc.end()), cyc.end());
            faces.emplace_back(std::move(cyc), c);
        }
        std::sort(faces.begin(), faces.end());
        std::vector<std::size_t> face_of_cycle(cycles.size(), no_face);
        faces_.clear();
        for (std::size_t f = 0; f < faces.size(); ++f) {
            face_of_cycle[faces[f].second] = f;
            faces_.push_back(std::move(faces[f].first));
        }
        edge_faces_.assign(edges_.size(), {no_face, no_face});
        for (std::size_t h = 0; h < 2 * edges_.size(); ++h) edge_faces_[h / 2][h % 2] = face_of_cycle[cycle_of[h]];

        // connected components of the edge graph
        std::vector<std::size_t> parent(nv);
        std::iota(parent.begin(), parent.end(), 0);
        const auto find = [&](std::size_t x) {
            while (parent[x] != x) x = parent[x] = parent[parent[x]];
            return x;
        };
        for (const Edge& e : edges_) parent[find(e.v[0])] = find(e.v[1]);
        components_ = 0;
        for (std::size_t v = 0; v < nv; ++v) components_ += find(v) == v ? 1 : 0;
    }

    double size_ = default_size;
    double eps_ = default_epsilon;
    std::vector<Vec2> vertices_;
    std::vector<Edge> edges_;
    std::vector<std::vector<std::size_t>> faces_;
    std::vector<std::array<std::size_t, 2>> edge_faces_;
    std::map<std::string, std::string> extras_;
    std::size_t components_ = 0;
};

/// Pure form of CreasePattern::insert_crease.
inline CreasePattern insert_crease(CreasePattern cp, Segment s, Assignment a) {
    cp.insert_crease(s, a);
    return cp;
}

} // namespace forge
