#pragma once

#include "forge/crease_pattern.hpp"
#include "forge/error.hpp"
#include "forge/geometry.hpp"

#include <algorithm>
#include <array>
#include <chrono>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <map>
#include <numeric>
#include <optional>
#include <queue>
#include <span>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

namespace forge {

enum class FlatErrc { BoundaryVertex, OddDegree, DisconnectedFaces };
using FlatError = CodedError<FlatErrc>;

// ---------------------------------------------------------------------------
// Local vertex conditions

/// Number of mountain and valley creases around a star (F and B excluded).
inline std::pair<std::size_t, std::size_t> crease_counts(const VertexStar& star) noexcept {
    std::size_t m = 0, v = 0;
    for (const StarEdge& e : star.edges) {
        if (e.assignment == Assignment::Mountain) ++m;
        if (e.assignment == Assignment::Valley) ++v;
    }
    return {m, v};
}

/// Sector angles between consecutive M/V creases; sectors split only by
/// flat (F) edges are merged. Requires an interior star.
inline std::vector<double> crease_sectors(const VertexStar& star) {
    std::vector<double> out;
    const std::size_t n = star.edges.size();
    std::size_t first = n;
    for (std::size_t i = 0; i < n; ++i) {
        if (is_crease(star.edges[i].assignment)) {
            first = i;
            break;
        }
    }
    if (first == n) return out;
    double acc = 0.0;
    for (std::size_t k = 0; k < n; ++k) {
        const std::size_t i = (first + k) % n;
        acc += star.sectors[i];
        if (is_crease(star.edges[(i + 1) % n].assignment)) {
            out.push_back(acc);
            acc = 0.0;
        }
    }
    return out;
}

inline bool maekawa_holds(std::size_t mountains, std::size_t valleys) noexcept {
    const auto diff = mountains > valleys ? mountains - valleys : valleys - mountains;
    return diff == 2;
}

/// Alternating sector sums must each equal pi.
inline bool kawasaki_holds(std::span<const double> sectors, double tol = 1e-9) noexcept {
    if (sectors.empty() || sectors.size() % 2 != 0) return false;
    double even = 0.0, odd = 0.0;
    for (std::size_t i = 0; i < sectors.size(); ++i) (i % 2 == 0 ? even : odd) += sectors[i];
    return std::abs(even - pi) <= tol && std::abs(odd - pi) <= tol;
}

inline bool check_maekawa(const VertexStar& star) {
    if (!star.interior) throw FlatError(FlatErrc::BoundaryVertex, "Maekawa applies to interior vertices only");
    const auto [m, v] = crease_counts(star);
    return maekawa_holds(m, v);
}

inline bool check_kawasaki(const VertexStar& star, double tol = 1e-9) {
    if (!star.interior) throw FlatError(FlatErrc::BoundaryVertex, "Kawasaki applies to interior vertices only");
    const auto [m, v] = crease_counts(star);
    if ((m + v) % 2 != 0) throw FlatError(FlatErrc::OddDegree, "Kawasaki needs an even number of creases");
    const auto sectors = crease_sectors(star);
    return kawasaki_holds(sectors, tol);
}

// ---------------------------------------------------------------------------
// Folded geometry

struct FoldedGeometry {
    std::size_t root = 0;
    std::vector<Isometry> transforms;
    std::vector<bool> flipped;
};

/// The root face is the one touching the bottom edge at the origin corner.
inline std::size_t root_face(const CreasePattern& cp) {
    const auto& vs = cp.vertices();
    for (std::size_t e = 0; e < cp.edges().size(); ++e) {
        const auto [a, b] = cp.edges()[e].v;
        for (int side = 0; side < 2; ++side) {
            const Vec2 from = vs[side == 0 ? a : b], to = vs[side == 0 ? b : a];
            if (distance(from, {0.0, 0.0}) <= cp.epsilon() && std::abs(to.y) <= cp.epsilon() && to.x > from.x) {
                const std::size_t f = cp.edge_faces()[e][static_cast<std::size_t>(side)];
                if (f != no_face) return f;
            }
        }
    }
    return 0;
}

/// Breadth-first unfolding from the root face: crossing a crease composes a
/// reflection across it, crossing a flat edge keeps the transform.
inline FoldedGeometry compute_folded_geometry(const CreasePattern& cp) {
    const std::size_t nf = cp.faces().size();
    FoldedGeometry g;
    g.transforms.assign(nf, Isometry{});
    g.flipped.assign(nf, false);
    if (nf == 0) return g;
    g.root = root_face(cp);

    std::vector<std::vector<std::pair<std::size_t, std::size_t>>> adj(nf); // (edge, neighbour)
    for (std::size_t e = 0; e < cp.edges().size(); ++e) {
        if (cp.edges()[e].assignment == Assignment::Boundary) continue;
        const auto [l, r] = cp.edge_faces()[e];
        if (l == no_face || r == no_face || l == r) continue;
        adj[l].emplace_back(e, r);
        adj[r].emplace_back(e, l);
    }
    std::vector<bool> seen(nf, false);
    std::queue<std::size_t> todo;
    todo.push(g.root);
    seen[g.root] = true;
    while (!todo.empty()) {
        const std::size_t f = todo.front();
        todo.pop();
        for (const auto& [e, nb] : adj[f]) {
            if (seen[nb]) continue;
            seen[nb] = true;
            const Edge& edge = cp.edges()[e];
            if (is_crease(edge.assignment)) {
                const auto refl = Isometry::reflection(cp.vertices()[edge.v[0]], cp.vertices()[edge.v[1]]);
                g.transforms[nb] = g.transforms[f].compose(refl);
            } else {
                g.transforms[nb] = g.transforms[f];
            }
            g.flipped[nb] = g.transforms[nb].reflects();
            todo.push(nb);
        }
    }
    if (!std::all_of(seen.begin(), seen.end(), [](bool s) { return s; }))
        throw FlatError(FlatErrc::DisconnectedFaces, "face adjacency graph is disconnected");
    return g;
}

/// Face polygon in folded coordinates, counter-clockwise.
inline Polygon folded_polygon(const CreasePattern& cp, const FoldedGeometry& g, std::size_t f) {
    Polygon poly;
    for (std::size_t v : cp.faces()[f]) poly.push_back(g.transforms[f](cp.vertices()[v]));
    if (g.flipped[f]) std::reverse(poly.begin(), poly.end());
    return poly;
}

/// Largest disagreement between the two faces of an edge about where the
/// edge lands; zero for a consistent folding.
inline double max_hinge_mismatch(const CreasePattern& cp, const FoldedGeometry& g) {
    double worst = 0.0;
    for (std::size_t e = 0; e < cp.edges().size(); ++e) {
        const auto [l, r] = cp.edge_faces()[e];
        if (l == no_face || r == no_face) continue;
        for (std::size_t v : cp.edges()[e].v) {
            const Vec2 p = cp.vertices()[v];
            worst = std::max(worst, distance(g.transforms[l](p), g.transforms[r](p)));
        }
    }
    return worst;
}

// ---------------------------------------------------------------------------
// Layer order

/// Relative stacking of overlapping faces. `above` maps (f, g), f < g, to
/// true when f lies above g (closer to a viewer facing the front of the
/// unfolded sheet). `stacking` lists every face bottom to top.
struct LayerOrder {
    std::map<std::pair<std::size_t, std::size_t>, bool> above;
    std::vector<std::size_t> stacking;

    [[nodiscard]] std::optional<bool> is_above(std::size_t f, std::size_t g) const {
        if (f == g) return std::nullopt;
        const auto it = above.find({std::min(f, g), std::max(f, g)});
        if (it == above.end()) return std::nullopt;
        return f < g ? it->second : !it->second;
    }
};

struct FoldedState {
    FoldedGeometry geometry;
    std::vector<Polygon> faces;
    LayerOrder layers;
};

enum class FoldStatus { Valid, LocallyInvalid, GloballyInvalid, Unknown };

constexpr std::string_view to_string(FoldStatus s) noexcept {
    switch (s) {
    case FoldStatus::Valid: return "Valid";
    case FoldStatus::LocallyInvalid: return "LocallyInvalid";
    case FoldStatus::GloballyInvalid: return "GloballyInvalid";
    case FoldStatus::Unknown: return "Unknown";
    }
    return "?";
}

struct Violation {
    enum class Subject { Pattern, Vertex, Face, FacePair };
    Subject subject = Subject::Pattern;
    std::size_t first = 0;
    std::size_t second = 0;
    std::string rule;
};

struct FoldabilityVerdict {
    FoldStatus status = FoldStatus::Unknown;
    std::optional<FoldedState> witness;
    std::vector<Violation> violations;
    std::size_t nodes = 0;

    [[nodiscard]] bool valid() const noexcept { return status == FoldStatus::Valid; }
};

struct SearchBudget {
    std::size_t max_nodes = 200000;
    std::chrono::milliseconds max_time{5000};
};

namespace detail {

using Clock = std::chrono::steady_clock;

struct BudgetExhausted {};

struct Literal {
    std::uint32_t var = 0;
    bool negated = false;
};

/// parity: xor of the literals equals `parity`; not_all_equal: three
/// literals may not share one value (forbids a cyclic triple).
struct Constraint {
    enum class Kind : std::uint8_t { Parity, NotAllEqual };
    Kind kind = Kind::Parity;
    std::uint8_t size = 0;
    bool parity = false;
    std::array<Literal, 4> lits{};
};

class LayerProblem {
public:
    explicit LayerProblem(std::size_t faces) : faces_(faces) {}

    Literal above(std::size_t f, std::size_t g) {
        const auto key = pair_key(std::min(f, g), std::max(f, g));
        auto [it, inserted] = index_.try_emplace(key, static_cast<std::uint32_t>(pairs_.size()));
        if (inserted) pairs_.emplace_back(std::min(f, g), std::max(f, g));
        return {it->second, f > g};
    }

    [[nodiscard]] bool has(std::size_t f, std::size_t g) const {
        return index_.count(pair_key(std::min(f, g), std::max(f, g))) != 0;
    }

    void require(Literal l) { units_.push_back(l); }

    void equal(Literal a, Literal b) { add({Constraint::Kind::Parity, 2, false, {a, b, {}, {}}}); }

    void even_parity(Literal a, Literal b, Literal c, Literal d) {
        add({Constraint::Kind::Parity, 4, false, {a, b, c, d}});
    }

    void not_all_equal(Literal a, Literal b, Literal c) {
        add({Constraint::Kind::NotAllEqual, 3, false, {a, b, c, {}}});
    }

    /// Returns false when unsatisfiable; throws BudgetExhausted.
    bool solve(std::size_t max_nodes, Clock::time_point deadline, std::size_t& nodes) {
        const std::size_t nv = pairs_.size();
        value_.assign(nv, -1);
        watch_.assign(nv, {});
        for (std::uint32_t c = 0; c < constraints_.size(); ++c)
            for (std::uint8_t k = 0; k < constraints_[c].size; ++k) watch_[constraints_[c].lits[k].var].push_back(c);
        trail_.clear();
        head_ = 0;

        for (const Literal& l : units_) {
            const int want = l.negated ? 0 : 1;
            if (value_[l.var] == -1) {
                assign(l.var, want);
            } else if (value_[l.var] != want) {
                return false;
            }
        }
        if (!propagate()) return false;

        // independent sub-problems are searched separately
        std::vector<std::uint32_t> parent(nv);
        std::iota(parent.begin(), parent.end(), 0U);
        const auto find = [&](std::uint32_t x) {
            while (parent[x] != x) x = parent[x] = parent[parent[x]];
            return x;
        };
        for (const Constraint& c : constraints_)
            for (std::uint8_t k = 1; k < c.size; ++k) parent[find(c.lits[k].var)] = find(c.lits[0].var);
        std::map<std::uint32_t, std::vector<std::uint32_t>> groups;
        for (std::uint32_t v = 0; v < nv; ++v)
            if (value_[v] == -1) groups[find(v)].push_back(v);
        std::vector<std::vector<std::uint32_t>> components;
        for (auto& [root, vars] : groups) components.push_back(std::move(vars));
        std::sort(components.begin(), components.end());

        for (const auto& vars : components)
            if (!search(vars, max_nodes, deadline, nodes)) return false;
        return true;
    }

    [[nodiscard]] const std::vector<std::pair<std::size_t, std::size_t>>& pairs() const noexcept { return pairs_; }
    [[nodiscard]] bool value(std::size_t var) const noexcept { return value_[var] == 1; }
    [[nodiscard]] std::size_t constraint_count() const noexcept { return constraints_.size(); }

private:
    static std::uint64_t pair_key(std::size_t f, std::size_t g) noexcept {
        return (static_cast<std::uint64_t>(f) << 32U) | static_cast<std::uint64_t>(g);
    }

    void add(const Constraint& c) { constraints_.push_back(c); }

    [[nodiscard]] int lit_value(const Literal& l) const noexcept {
        const int v = value_[l.var];
        return v < 0 ? -1 : (l.negated ? 1 - v : v);
    }

    void assign(std::uint32_t var, int v) {
        value_[var] = static_cast<std::int8_t>(v);
        trail_.push_back(var);
    }

    void assign_literal(const Literal& l, int v) { assign(l.var, l.negated ? 1 - v : v); }

    bool propagate() {
        while (head_ < trail_.size()) {
            const std::uint32_t var = trail_[head_++];
            for (const std::uint32_t ci : watch_[var]) {
                const Constraint& c = constraints_[ci];
                int unknown = -1, unknown_count = 0, sum = 0;
                std::array<int, 4> vals{};
                for (std::uint8_t k = 0; k < c.size; ++k) {
                    vals[k] = lit_value(c.lits[k]);
                    if (vals[k] < 0) {
                        ++unknown_count;
                        unknown = k;
                    } else {
                        sum ^= vals[k];
                    }
                }
                if (c.kind == Constraint::Kind::Parity) {
                    if (unknown_count == 0 && sum != static_cast<int>(c.parity)) return false;
                    if (unknown_count == 1) assign_literal(c.lits[unknown], sum ^ static_cast<int>(c.parity));
                } else {
                    if (unknown_count == 0 && vals[0] == vals[1] && vals[1] == vals[2]) return false;
                    if (unknown_count == 1) {
                        const int a = vals[(unknown + 1) % 3], b = vals[(unknown + 2) % 3];
                        if (a == b) assign_literal(c.lits[unknown], 1 - a);
                    }
                }
            }
        }
        return true;
    }

    void undo(std::size_t size) {
        while (trail_.size() > size) {
            value_[trail_.back()] = -1;
            trail_.pop_back();
        }
        head_ = size;
    }

    /// Depth-first search over one component, lowest variable first, "above" first.
    bool search(const std::vector<std::uint32_t>& vars, std::size_t max_nodes, Clock::time_point deadline,
                std::size_t& nodes) {
        struct Frame {
            std::uint32_t var;
            std::size_t trail_size;
            bool second;
        };
        std::vector<Frame> frames;
        for (;;) {
            const auto it = std::find_if(vars.begin(), vars.end(), [&](std::uint32_t v) { return value_[v] == -1; });
            if (it == vars.end()) return true;
            ++nodes;
            if (nodes > max_nodes || ((nodes & 255U) == 0 && Clock::now() > deadline)) throw BudgetExhausted{};
            frames.push_back({*it, trail_.size(), false});
            assign(*it, 1);
            bool ok = propagate();
            while (!ok) {
                if (frames.empty()) return false;
                Frame& f = frames.back();
                undo(f.trail_size);
                if (f.second) {
                    frames.pop_back();
                    continue;
                }
                f.second = true;
                assign(f.var, 0);
                ok = propagate();
            }
        }
    }

    std::size_t faces_;
    std::unordered_map<std::uint64_t, std::uint32_t> index_;
    std::vector<std::pair<std::size_t, std::size_t>> pairs_;
    std::vector<Literal> units_;
    std::vector<Constraint> constraints_;
    std::vector<std::int8_t> value_;
    std::vector<std::vector<std::uint32_t>> watch_;
    std::vector<std::uint32_t> trail_;
    std::size_t head_ = 0;
};

inline void check_deadline(Clock::time_point deadline) {
    if (Clock::now() > deadline) throw BudgetExhausted{};
}

/// Bottom-to-top linear extension of the pairwise order, lowest index first
/// among ties. A cycle (possible only among faces without a common region)
/// is broken at its lowest index.
inline std::vector<std::size_t> linear_stacking(std::size_t nf, const LayerOrder& order) {
    std::vector<std::vector<std::size_t>> ups(nf);
    std::vector<std::size_t> below_count(nf, 0);
    for (const auto& [pair, f_above] : order.above) {
        const auto [f, g] = pair;
        const std::size_t lo = f_above ? g : f, hi = f_above ? f : g;
        ups[lo].push_back(hi);
        ++below_count[hi];
    }
    std::vector<std::size_t> out;
    std::vector<bool> placed(nf, false);
    std::priority_queue<std::size_t, std::vector<std::size_t>, std::greater<>> ready;
    for (std::size_t f = 0; f < nf; ++f)
        if (below_count[f] == 0) ready.push(f);
    while (out.size() < nf) {
        if (ready.empty()) {
            for (std::size_t f = 0; f < nf; ++f) {
                if (!placed[f]) {
                    below_count[f] = 0;
                    ready.push(f);
                    break;
                }
            }
        }
        const std::size_t f = ready.top();
        ready.pop();
        if (placed[f]) continue;
        placed[f] = true;
        out.push_back(f);
        for (std::size_t h : ups[f])
            if (!placed[h] && --below_count[h] == 0) ready.push(h);
    }
    return out;
}

struct Connector {
    std::size_t edge = 0;
    std::array<std::size_t, 2> faces{};
    Vec2 a, b;
    bool taco = true;
};

} // namespace detail

struct SolverTolerance {
    double length = 1e-9;
    double area = 1e-9;
};

/// Searches for a layer order of the folded faces. Constraint families:
/// crease direction (a valley puts the face that flips above the face that
/// does not, a mountain the reverse), no face may sit between the two sides
/// of a crease it covers, creases folded onto one line may not interleave
/// (folds opening to opposite sides may not overlap in height at all), flat
/// joins may not cross, and order is transitive wherever three faces share
/// a region or a folded line.
inline FoldabilityVerdict solve_layer_order(const CreasePattern& cp, const FoldedGeometry& geom,
                                            const SearchBudget& budget = {},
                                            std::optional<detail::Clock::time_point> deadline_at = std::nullopt,
                                            SolverTolerance tol = {}) {
    using detail::Literal;
    const auto deadline = deadline_at.value_or(detail::Clock::now() + budget.max_time);
    const std::size_t nf = cp.faces().size();
    FoldabilityVerdict verdict;

    FoldedState state;
    state.geometry = geom;
    for (std::size_t f = 0; f < nf; ++f) state.faces.push_back(folded_polygon(cp, geom, f));
    std::vector<Box> boxes;
    for (const auto& p : state.faces) boxes.push_back(bounds(p));

    try {
        detail::LayerProblem problem(nf);

        // pairwise overlaps
        std::vector<std::vector<std::size_t>> overlapping(nf);
        std::map<std::pair<std::size_t, std::size_t>, Polygon> overlap_region;
        for (std::size_t f = 0; f < nf; ++f) {
            detail::check_deadline(deadline);
            for (std::size_t g = f + 1; g < nf; ++g) {
                if (!boxes[f].overlaps(boxes[g], tol.length)) continue;
                Polygon common = clip_convex(state.faces[f], state.faces[g]);
                if (common.size() < 3 || signed_area(common) <= tol.area) continue;
                problem.above(f, g);
                overlapping[f].push_back(g);
                overlapping[g].push_back(f);
                overlap_region.emplace(std::pair{f, g}, std::move(common));
            }
        }
        for (auto& list : overlapping) std::sort(list.begin(), list.end());

        // hinges
        std::vector<detail::Connector> connectors;
        for (std::size_t e = 0; e < cp.edges().size(); ++e) {
            const Edge& edge = cp.edges()[e];
            if (edge.assignment == Assignment::Boundary) continue;
            const auto [l, r] = cp.edge_faces()[e];
            if (l == no_face || r == no_face || l == r) continue;
            detail::Connector c;
            c.edge = e;
            c.faces = {l, r};
            c.a = geom.transforms[l](cp.vertices()[edge.v[0]]);
            c.b = geom.transforms[l](cp.vertices()[edge.v[1]]);
            c.taco = is_crease(edge.assignment);
            connectors.push_back(c);
            if (c.taco) {
                const std::size_t flipped = geom.flipped[l] ? l : r;
                const std::size_t upright = flipped == l ? r : l;
                if (edge.assignment == Assignment::Valley) problem.require(problem.above(flipped, upright));
                else problem.require(problem.above(upright, flipped));
            }
        }

        const auto side_of = [&](const detail::Connector& c, std::size_t face) {
            return cross(c.b - c.a, centroid(state.faces[face]) - c.a) > 0.0 ? 1 : -1;
        };

        // faces covering a hinge
        for (const auto& c : connectors) {
            detail::check_deadline(deadline);
            Box sb;
            sb.expand(c.a);
            sb.expand(c.b);
            for (std::size_t h = 0; h < nf; ++h) {
                if (h == c.faces[0] || h == c.faces[1] || !boxes[h].overlaps(sb, tol.length)) continue;
                if (interior_overlap_length(c.a, c.b, state.faces[h], tol.length) <= tol.length) continue;
                problem.equal(problem.above(h, c.faces[0]), problem.above(h, c.faces[1]));
            }
        }

        // hinges folded onto a common line
        struct SharedLine {
            Vec2 a, b;
            std::array<std::size_t, 4> faces;
        };
        std::vector<SharedLine> shared_lines;
        for (std::size_t i = 0; i < connectors.size(); ++i) {
            detail::check_deadline(deadline);
            const auto& c = connectors[i];
            const double len = distance(c.a, c.b);
            for (std::size_t j = i + 1; j < connectors.size(); ++j) {
                const auto& d = connectors[j];
                if (line_distance(d.a, c.a, c.b) > tol.length || line_distance(d.b, c.a, c.b) > tol.length) continue;
                double t0 = project_length(d.a, c.a, c.b), t1 = project_length(d.b, c.a, c.b);
                if (t0 > t1) std::swap(t0, t1);
                if (std::min(t1, len) - std::max(t0, 0.0) <= tol.length) continue;
                const auto [f1, f2] = c.faces;
                const auto [g1, g2] = d.faces;
                if (f1 == g1 || f1 == g2 || f2 == g1 || f2 == g2) continue;
                const int sf1 = side_of(c, f1);
                const int sg1 = side_of(c, g1);
                if (c.taco && d.taco && sf1 != sg1) {
                    // folds opening to opposite sides: one pair lies wholly
                    // above the other, otherwise the bends collide
                    const Literal x = problem.above(f1, g1);
                    problem.equal(x, problem.above(f1, g2));
                    problem.equal(x, problem.above(f2, g1));
                    problem.equal(x, problem.above(f2, g2));
                    const Vec2 dir = (c.b - c.a) * (1.0 / len);
                    shared_lines.push_back({c.a + dir * std::max(t0, 0.0), c.a + dir * std::min(t1, len), {f1, f2, g1, g2}});
                } else if (c.taco && d.taco) {
                    problem.even_parity(problem.above(f1, g1), problem.above(f2, g1), problem.above(f1, g2),
                                        problem.above(f2, g2));
                } else if (c.taco) {
                    const std::size_t u = sg1 == sf1 ? g1 : g2;
                    problem.equal(problem.above(u, f1), problem.above(u, f2));
                } else if (d.taco) {
                    const std::size_t u = sf1 == sg1 ? f1 : f2;
                    problem.equal(problem.above(u, g1), problem.above(u, g2));
                } else {
                    const std::size_t g_same1 = sg1 == sf1 ? g1 : g2;
                    const std::size_t g_same2 = g_same1 == g1 ? g2 : g1;
                    problem.equal(problem.above(f1, g_same1), problem.above(f2, g_same2));
                }
            }
        }

        // transitivity where three faces share a region
        for (const auto& [key, region] : overlap_region) {
            detail::check_deadline(deadline);
            const auto [a, b] = key;
            const auto& na = overlapping[a];
            const auto& nb = overlapping[b];
            std::vector<std::size_t> common;
            std::set_intersection(na.begin(), na.end(), nb.begin(), nb.end(), std::back_inserter(common));
            for (std::size_t c : common) {
                if (c <= b) continue;
                const double area = convex_overlap_area(region, state.faces[c]);
                if (area <= tol.area) continue;
                problem.not_all_equal(problem.above(a, b), problem.above(b, c), problem.above(c, a));
            }
        }

        // faces meeting only along such a line are ordered there too
        for (const auto& line : shared_lines) {
            detail::check_deadline(deadline);
            std::vector<std::size_t> present(line.faces.begin(), line.faces.end());
            Box lb;
            lb.expand(line.a);
            lb.expand(line.b);
            for (std::size_t h = 0; h < nf; ++h) {
                if (std::find(present.begin(), present.end(), h) != present.end()) continue;
                if (!boxes[h].overlaps(lb, tol.length)) continue;
                if (interior_overlap_length(line.a, line.b, state.faces[h], tol.length) > tol.length) present.push_back(h);
            }
            for (std::size_t i = 0; i < present.size(); ++i)
                for (std::size_t j = i + 1; j < present.size(); ++j)
                    for (std::size_t k = j + 1; k < present.size(); ++k) {
                        const std::size_t a = present[i], b = present[j], c = present[k];
                        if (!problem.has(a, b) || !problem.has(b, c) || !problem.has(a, c)) continue;
                        problem.not_all_equal(problem.above(a, b), problem.above(b, c), problem.above(c, a));
                    }
        }

        if (!problem.solve(budget.max_nodes, deadline, verdict.nodes)) {
            verdict.status = FoldStatus::GloballyInvalid;
            verdict.violations.push_back({Violation::Subject::Pattern, 0, 0, "no-layer-order"});
            return verdict;
        }
        // faces that only touch along a folded line carry an order too, but
        // painting needs only the pairs that share area
        LayerOrder painted;
        for (std::size_t v = 0; v < problem.pairs().size(); ++v) {
            state.layers.above.emplace(problem.pairs()[v], problem.value(v));
            if (overlap_region.count(problem.pairs()[v]) != 0) painted.above.emplace(problem.pairs()[v], problem.value(v));
        }
        state.layers.stacking = detail::linear_stacking(nf, painted);
    } catch (const detail::BudgetExhausted&) {
        verdict.status = FoldStatus::Unknown;
        verdict.violations.push_back({Violation::Subject::Pattern, 0, 0, "budget-exhausted"});
        return verdict;
    }
    verdict.status = FoldStatus::Valid;
    verdict.witness = std::move(state);
    return verdict;
}

/// Local checks on every interior vertex carrying creases, then the layer
/// search. Anything other than Valid means the pattern cannot be accepted.
inline FoldabilityVerdict is_foldable(const CreasePattern& cp, const SearchBudget& budget = {}) {
    const auto deadline = detail::Clock::now() + budget.max_time;
    FoldabilityVerdict verdict;
    if (!cp.connected()) {
        verdict.status = FoldStatus::LocallyInvalid;
        verdict.violations.push_back({Violation::Subject::Pattern, 0, 0, "disconnected"});
        return verdict;
    }
    for (std::size_t v = 0; v < cp.vertices().size(); ++v) {
        if (cp.on_boundary(cp.vertices()[v])) continue;
        const VertexStar star = cp.vertex_star(v);
        const auto [m, val] = crease_counts(star);
        if (m + val == 0) continue;
        if (!check_maekawa(star)) {
            verdict.violations.push_back({Violation::Subject::Vertex, v, 0, "maekawa"});
            continue;
        }
        if (!check_kawasaki(star)) verdict.violations.push_back({Violation::Subject::Vertex, v, 0, "kawasaki"});
    }
    for (std::size_t f = 0; f < cp.faces().size(); ++f) {
        if (!is_convex_ccw(cp.face_polygon(f), 1e-12))
            verdict.violations.push_back({Violation::Subject::Face, f, 0, "non-convex-face"});
    }
    if (!verdict.violations.empty()) {
        verdict.status = FoldStatus::LocallyInvalid;
        return verdict;
    }

    FoldedGeometry geom;
    try {
        geom = compute_folded_geometry(cp);
    } catch (const FlatError&) {
        verdict.status = FoldStatus::LocallyInvalid;
        verdict.violations.push_back({Violation::Subject::Pattern, 0, 0, "disconnected"});
        return verdict;
    }
    if (max_hinge_mismatch(cp, geom) > 1e-7) {
        verdict.status = FoldStatus::GloballyInvalid;
        verdict.violations.push_back({Violation::Subject::Pattern, 0, 0, "isometry-mismatch"});
        return verdict;
    }
    return solve_layer_order(cp, geom, budget, deadline);
}

} // namespace forge
