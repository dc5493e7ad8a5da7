#pragma once

#include <algorithm>
#include <cmath>
#include <compare>
#include <cstddef>
#include <optional>
#include <span>
#include <utility>
#include <vector>

namespace forge {

inline constexpr double pi = 3.14159265358979323846;

struct Vec2 {
    double x = 0.0;
    double y = 0.0;

    friend constexpr Vec2 operator+(Vec2 a, Vec2 b) noexcept { return {a.x + b.x, a.y + b.y}; }
    friend constexpr Vec2 operator-(Vec2 a, Vec2 b) noexcept { return {a.x - b.x, a.y - b.y}; }
    friend constexpr Vec2 operator*(double s, Vec2 a) noexcept { return {s * a.x, s * a.y}; }
    friend constexpr Vec2 operator*(Vec2 a, double s) noexcept { return {s * a.x, s * a.y}; }
    friend constexpr bool operator==(Vec2, Vec2) noexcept = default;
    friend constexpr auto operator<=>(Vec2, Vec2) noexcept = default;
};

constexpr double dot(Vec2 a, Vec2 b) noexcept { return a.x * b.x + a.y * b.y; }
constexpr double cross(Vec2 a, Vec2 b) noexcept { return a.x * b.y - a.y * b.x; }
inline double norm(Vec2 a) noexcept { return std::hypot(a.x, a.y); }
inline double distance(Vec2 a, Vec2 b) noexcept { return norm(b - a); }

inline Vec2 normalized(Vec2 a) noexcept {
    const double n = norm(a);
    return n > 0.0 ? Vec2{a.x / n, a.y / n} : Vec2{};
}

/// Lexicographic (x, y) ordering used for canonical vertex numbering.
constexpr bool lex_less(Vec2 a, Vec2 b) noexcept {
    return a.x < b.x || (a.x == b.x && a.y < b.y);
}

/// Distance from p to the infinite line through a and b.
inline double line_distance(Vec2 p, Vec2 a, Vec2 b) noexcept {
    const Vec2 d = b - a;
    const double len = norm(d);
    if (len == 0.0) return distance(p, a);
    return std::abs(cross(d, p - a)) / len;
}

/// Projection parameter of p onto segment ab, in length units from a.
inline double project_length(Vec2 p, Vec2 a, Vec2 b) noexcept {
    const Vec2 d = b - a;
    const double len = norm(d);
    if (len == 0.0) return 0.0;
    return dot(p - a, d) / len;
}

/// Distance from p to the closed segment ab.
inline double segment_distance(Vec2 p, Vec2 a, Vec2 b) noexcept {
    const Vec2 d = b - a;
    const double len2 = dot(d, d);
    if (len2 == 0.0) return distance(p, a);
    const double t = std::clamp(dot(p - a, d) / len2, 0.0, 1.0);
    return distance(p, a + t * d);
}

/// Intersection of the lines through (p, p + r) and (q, q + s); returns the
/// parameters (t, u) with p + t r = q + u s, or nothing when parallel.
inline std::optional<std::pair<double, double>> line_intersection(Vec2 p, Vec2 r, Vec2 q, Vec2 s) noexcept {
    const double denom = cross(r, s);
    if (std::abs(denom) <= 1e-15 * norm(r) * norm(s)) return std::nullopt;
    const Vec2 qp = q - p;
    return std::pair{cross(qp, s) / denom, cross(qp, r) / denom};
}

using Polygon = std::vector<Vec2>;

/// Signed shoelace area; positive for counter-clockwise rings.
inline double signed_area(std::span<const Vec2> ring) noexcept {
    double twice = 0.0;
    const std::size_t n = ring.size();
    for (std::size_t i = 0; i < n; ++i) twice += cross(ring[i], ring[(i + 1) % n]);
    return 0.5 * twice;
}

inline Vec2 centroid(std::span<const Vec2> ring) noexcept {
    const std::size_t n = ring.size();
    const double a = signed_area(ring);
    if (n == 0) return {};
    if (std::abs(a) < 1e-300) {
        Vec2 c{};
        for (const Vec2& p : ring) c = c + p;
        return (1.0 / static_cast<double>(n)) * c;
    }
    double cx = 0.0, cy = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const Vec2 p = ring[i], q = ring[(i + 1) % n];
        const double w = cross(p, q);
        cx += (p.x + q.x) * w;
        cy += (p.y + q.y) * w;
    }
    return {cx / (6.0 * a), cy / (6.0 * a)};
}

/// True when every turn of the counter-clockwise ring is a left turn (collinear allowed).
inline bool is_convex_ccw(std::span<const Vec2> ring, double tol) noexcept {
    const std::size_t n = ring.size();
    if (n < 3) return false;
    for (std::size_t i = 0; i < n; ++i) {
        const Vec2 a = ring[i], b = ring[(i + 1) % n], c = ring[(i + 2) % n];
        const Vec2 ab = b - a, bc = c - b;
        const double len = norm(ab) * norm(bc);
        if (len == 0.0) continue;
        if (cross(ab, bc) < -tol * len) return false;
    }
    return true;
}

/// Even-odd point-in-polygon test.
inline bool contains(std::span<const Vec2> ring, Vec2 p) noexcept {
    bool inside = false;
    const std::size_t n = ring.size();
    for (std::size_t i = 0, j = n - 1; i < n; j = i++) {
        const Vec2 a = ring[i], b = ring[j];
        if ((a.y > p.y) != (b.y > p.y)) {
            const double x = a.x + (p.y - a.y) * (b.x - a.x) / (b.y - a.y);
            if (p.x < x) inside = !inside;
        }
    }
    return inside;
}

/// Sutherland-Hodgman clip of `subject` by the convex counter-clockwise ring `clip`.
inline Polygon clip_convex(std::span<const Vec2> subject, std::span<const Vec2> clip) {
    Polygon out(subject.begin(), subject.end());
    const std::size_t m = clip.size();
    for (std::size_t i = 0; i < m && !out.empty(); ++i) {
        const Vec2 a = clip[i], b = clip[(i + 1) % m];
        const Vec2 d = b - a;
        Polygon in;
        in.swap(out);
        const std::size_t n = in.size();
        for (std::size_t k = 0; k < n; ++k) {
            const Vec2 cur = in[k], nxt = in[(k + 1) % n];
            const double sc = cross(d, cur - a), sn = cross(d, nxt - a);
            if (sc >= 0.0) out.push_back(cur);
            if ((sc >= 0.0) != (sn >= 0.0)) {
                const double t = sc / (sc - sn);
                out.push_back(cur + t * (nxt - cur));
            }
        }
    }
    return out;
}

/// Area of the intersection of two convex counter-clockwise rings.
inline double convex_overlap_area(std::span<const Vec2> a, std::span<const Vec2> b) {
    const Polygon c = clip_convex(a, b);
    return c.size() < 3 ? 0.0 : std::max(0.0, signed_area(c));
}

/// Length of the portion of segment pq lying strictly inside the convex
/// counter-clockwise ring (at least `tol` away from every edge line).
inline double interior_overlap_length(Vec2 p, Vec2 q, std::span<const Vec2> ring, double tol) noexcept {
    double t0 = 0.0, t1 = 1.0;
    const Vec2 d = q - p;
    const std::size_t n = ring.size();
    for (std::size_t i = 0; i < n; ++i) {
        const Vec2 a = ring[i], b = ring[(i + 1) % n];
        const Vec2 e = b - a;
        const double len = norm(e);
        if (len == 0.0) continue;
        // signed inward distance of p + t d from edge line, minus tol, must stay > 0
        const double f0 = cross(e, p - a) / len - tol;
        const double df = cross(e, d) / len;
        if (std::abs(df) < 1e-300) {
            if (f0 <= 0.0) return 0.0;
            continue;
        }
        const double t = -f0 / df;
        if (df > 0.0) t0 = std::max(t0, t);
        else t1 = std::min(t1, t);
        if (t0 >= t1) return 0.0;
    }
    return (t1 - t0) * norm(d);
}

struct Box {
    Vec2 lo{1e300, 1e300};
    Vec2 hi{-1e300, -1e300};

    void expand(Vec2 p) noexcept {
        lo = {std::min(lo.x, p.x), std::min(lo.y, p.y)};
        hi = {std::max(hi.x, p.x), std::max(hi.y, p.y)};
    }
    [[nodiscard]] bool empty() const noexcept { return lo.x > hi.x || lo.y > hi.y; }
    [[nodiscard]] double width() const noexcept { return empty() ? 0.0 : hi.x - lo.x; }
    [[nodiscard]] double height() const noexcept { return empty() ? 0.0 : hi.y - lo.y; }
    [[nodiscard]] bool overlaps(const Box& o, double tol) const noexcept {
        return lo.x <= o.hi.x + tol && o.lo.x <= hi.x + tol && lo.y <= o.hi.y + tol && o.lo.y <= hi.y + tol;
    }
};

inline Box bounds(std::span<const Vec2> pts) noexcept {
    Box b;
    for (const Vec2& p : pts) b.expand(p);
    return b;
}

/// Planar isometry x -> M x + t, M orthogonal.
struct Isometry {
    double a = 1.0, b = 0.0, c = 0.0, d = 1.0;
    double tx = 0.0, ty = 0.0;

    [[nodiscard]] constexpr Vec2 operator()(Vec2 p) const noexcept {
        return {a * p.x + b * p.y + tx, c * p.x + d * p.y + ty};
    }
    [[nodiscard]] constexpr double det() const noexcept { return a * d - b * c; }
    [[nodiscard]] constexpr bool reflects() const noexcept { return det() < 0.0; }

    /// (*this) after `inner`: x -> this(inner(x)).
    [[nodiscard]] constexpr Isometry compose(const Isometry& inner) const noexcept {
        Isometry r;
        r.a = a * inner.a + b * inner.c;
        r.b = a * inner.b + b * inner.d;
        r.c = c * inner.a + d * inner.c;
        r.d = c * inner.b + d * inner.d;
        r.tx = a * inner.tx + b * inner.ty + tx;
        r.ty = c * inner.tx + d * inner.ty + ty;
        return r;
    }

    /// Reflection across the line through p and q.
    static Isometry reflection(Vec2 p, Vec2 q) noexcept {
        const Vec2 u = normalized(q - p);
        Isometry r;
        r.a = 2.0 * u.x * u.x - 1.0;
        r.b = 2.0 * u.x * u.y;
        r.c = r.b;
        r.d = 2.0 * u.y * u.y - 1.0;
        // x' = p + R (x - p)
        r.tx = p.x - (r.a * p.x + r.b * p.y);
        r.ty = p.y - (r.c * p.x + r.d * p.y);
        return r;
    }

    [[nodiscard]] double max_difference(const Isometry& o) const noexcept {
        return std::max({std::abs(a - o.a), std::abs(b - o.b), std::abs(c - o.c), std::abs(d - o.d),
                         std::abs(tx - o.tx), std::abs(ty - o.ty)});
    }
};

} // namespace forge
