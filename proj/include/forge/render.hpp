#pragma once

#include "forge/crease_pattern.hpp"
#include "forge/error.hpp"
#include "forge/flat_fold.hpp"
#include "forge/fold.hpp"
#include "forge/geometry.hpp"
#include "forge/raster.hpp"

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdio>
#include <string>
#include <variant>
#include <vector>

namespace forge {

enum class RenderErrc { MissingLayerOrder };
using RenderError = CodedError<RenderErrc>;

enum class Side { Front, Back };

struct RenderStyle {
    Rgb mountain_color{0, 0, 255};
    Rgb valley_color{255, 0, 0};
    Rgb boundary_color{0, 0, 0};
    Rgb flat_color{160, 160, 160};
    Rgb background = white;
    Rgb front_face_color{250, 205, 120};
    Rgb back_face_color{110, 160, 220};
    Rgb face_outline_color{60, 60, 60};
    double stroke_width = 2.0;
    double face_outline_width = 1.0;
    double margin = 16.0;
};

/// Grayscale in thousandths: 299 R + 587 G + 114 B.
constexpr unsigned luma_milli(Rgb c) noexcept { return 299U * c.r + 587U * c.g + 114U * c.b; }

struct FilledPolygon {
    Polygon points;
    Rgb fill;
};

struct Stroke {
    Vec2 a, b;
    Rgb color;
    double width = 1.0;
};

using Element = std::variant<FilledPolygon, Stroke>;

/// Drawing in sheet units (y up). `frame` is the region fitted to the canvas.
struct VectorDocument {
    Box frame;
    Rgb background = white;
    std::vector<Element> elements;
};

inline Rgb assignment_color(Assignment a, const RenderStyle& style) noexcept {
    switch (a) {
    case Assignment::Mountain: return style.mountain_color;
    case Assignment::Valley: return style.valley_color;
    case Assignment::Boundary: return style.boundary_color;
    case Assignment::Flat: return style.flat_color;
    }
    return style.boundary_color;
}

/// One stroke per edge, in edge index order.
inline VectorDocument render_crease_pattern(const CreasePattern& cp, const RenderStyle& style = {}) {
    VectorDocument doc;
    doc.background = style.background;
    doc.frame.expand({0.0, 0.0});
    doc.frame.expand({cp.size(), cp.size()});
    for (const Edge& e : cp.edges()) {
        doc.elements.emplace_back(
            Stroke{cp.vertices()[e.v[0]], cp.vertices()[e.v[1]], assignment_color(e.assignment, style), style.stroke_width});
    }
    return doc;
}

/// Faces painted bottom to top. The back view is the front view turned over
/// left-to-right: x mirrored and the stacking reversed.
inline VectorDocument render_folded(const CreasePattern& cp, const FoldedState& folded, Side side,
                                    const RenderStyle& style = {}) {
    const std::size_t nf = folded.faces.size();
    if (nf != cp.faces().size() || folded.layers.stacking.size() != nf)
        throw RenderError(RenderErrc::MissingLayerOrder, "folded state has no complete stacking");
    VectorDocument doc;
    doc.background = style.background;
    std::vector<std::size_t> order = folded.layers.stacking;
    if (side == Side::Back) std::reverse(order.begin(), order.end());
    for (std::size_t f : order) {
        Polygon poly = folded.faces[f];
        if (side == Side::Back) {
            for (Vec2& p : poly) p.x = -p.x;
            std::reverse(poly.begin(), poly.end());
        }
        for (const Vec2& p : poly) doc.frame.expand(p);
        const bool shows_front = folded.geometry.flipped[f] == (side == Side::Back);
        doc.elements.emplace_back(FilledPolygon{poly, shows_front ? style.front_face_color : style.back_face_color});
        if (style.face_outline_width > 0.0) {
            for (std::size_t i = 0; i < poly.size(); ++i)
                doc.elements.emplace_back(
                    Stroke{poly[i], poly[(i + 1) % poly.size()], style.face_outline_color, style.face_outline_width});
        }
    }
    return doc;
}

/// Maps sheet coordinates to pixel coordinates: fit inside a fixed margin,
/// aspect preserved, centred, y flipped.
struct CanvasTransform {
    double scale = 1.0;
    double ox = 0.0;
    double oy = 0.0;
    double frame_lo_x = 0.0;
    double frame_hi_y = 0.0;

    CanvasTransform(const Box& frame, std::size_t w, std::size_t h, double margin) {
        const double bw = frame.width(), bh = frame.height();
        const double avail_w = static_cast<double>(w) - 2.0 * margin;
        const double avail_h = static_cast<double>(h) - 2.0 * margin;
        if (bw > 0.0 && bh > 0.0) scale = std::min(avail_w / bw, avail_h / bh);
        else if (bw > 0.0) scale = avail_w / bw;
        else if (bh > 0.0) scale = avail_h / bh;
        ox = 0.5 * (static_cast<double>(w) - scale * bw);
        oy = 0.5 * (static_cast<double>(h) - scale * bh);
        frame_lo_x = frame.empty() ? 0.0 : frame.lo.x;
        frame_hi_y = frame.empty() ? 0.0 : frame.hi.y;
    }

    [[nodiscard]] Vec2 operator()(Vec2 p) const noexcept {
        return {ox + scale * (p.x - frame_lo_x), oy + scale * (frame_hi_y - p.y)};
    }
};

namespace detail {

inline void fill_polygon(RasterImage& img, const std::vector<Vec2>& px, Rgb color) {
    if (px.size() < 3) return;
    const Box b = bounds(px);
    const auto h = static_cast<long>(img.height());
    const auto w = static_cast<long>(img.width());
    const long y0 = std::max(0L, static_cast<long>(std::floor(b.lo.y - 0.5)));
    const long y1 = std::min(h - 1, static_cast<long>(std::ceil(b.hi.y + 0.5)));
    std::vector<double> xs;
    for (long y = y0; y <= y1; ++y) {
        const double cy = static_cast<double>(y) + 0.5;
        xs.clear();
        for (std::size_t i = 0, j = px.size() - 1; i < px.size(); j = i++) {
            const Vec2 a = px[i], c = px[j];
            if ((a.y > cy) != (c.y > cy)) xs.push_back(a.x + (cy - a.y) * (c.x - a.x) / (c.y - a.y));
        }
        std::sort(xs.begin(), xs.end());
        for (std::size_t k = 0; k + 1 < xs.size(); k += 2) {
            // pixel centres in [xs[k], xs[k+1])
            const long x0 = std::max(0L, static_cast<long>(std::ceil(xs[k] - 0.5)));
            const long x1 = std::min(w - 1, static_cast<long>(std::ceil(xs[k + 1] - 0.5)) - 1);
            for (long x = x0; x <= x1; ++x) img.set(static_cast<std::size_t>(x), static_cast<std::size_t>(y), color);
        }
    }
}

inline void draw_stroke(RasterImage& img, Vec2 a, Vec2 b, double width, Rgb color) {
    const double r = 0.5 * std::max(width, 1.0);
    const auto h = static_cast<long>(img.height());
    const auto w = static_cast<long>(img.width());
    const long x0 = std::max(0L, static_cast<long>(std::floor(std::min(a.x, b.x) - r)));
    const long x1 = std::min(w - 1, static_cast<long>(std::ceil(std::max(a.x, b.x) + r)));
    const long y0 = std::max(0L, static_cast<long>(std::floor(std::min(a.y, b.y) - r)));
    const long y1 = std::min(h - 1, static_cast<long>(std::ceil(std::max(a.y, b.y) + r)));
    for (long y = y0; y <= y1; ++y)
        for (long x = x0; x <= x1; ++x) {
            const Vec2 c{static_cast<double>(x) + 0.5, static_cast<double>(y) + 0.5};
            if (segment_distance(c, a, b) <= r) img.set(static_cast<std::size_t>(x), static_cast<std::size_t>(y), color);
        }
}

inline std::string svg_number(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.3f", std::abs(v) < 5e-4 ? 0.0 : v);
    return buf;
}

inline std::string svg_color(Rgb c) {
    char buf[8];
    std::snprintf(buf, sizeof buf, "#%02x%02x%02x", c.r, c.g, c.b);
    return buf;
}

} // namespace detail

/// Scanline even-odd fill without anti-aliasing; strokes are hard-edged
/// capsules. Elements are painted in document order.
inline RasterImage rasterize(const VectorDocument& doc, std::size_t w = 512, std::size_t h = 512, double margin = 16.0) {
    RasterImage img(w, h, doc.background);
    if (doc.frame.empty()) return img;
    const CanvasTransform to_px(doc.frame, w, h, margin);
    for (const Element& el : doc.elements) {
        if (const auto* poly = std::get_if<FilledPolygon>(&el)) {
            std::vector<Vec2> px;
            px.reserve(poly->points.size());
            for (const Vec2& p : poly->points) px.push_back(to_px(p));
            detail::fill_polygon(img, px, poly->fill);
        } else {
            const auto& s = std::get<Stroke>(el);
            detail::draw_stroke(img, to_px(s.a), to_px(s.b), s.width, s.color);
        }
    }
    return img;
}

/// SVG text using the same canvas framing as rasterize().
inline std::string to_svg(const VectorDocument& doc, std::size_t w = 512, std::size_t h = 512, double margin = 16.0) {
    const CanvasTransform to_px(doc.frame, w, h, margin);
    std::string out = "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + std::to_string(w) + "\" height=\"" +
                      std::to_string(h) + "\" viewBox=\"0 0 " + std::to_string(w) + " " + std::to_string(h) + "\">\n";
    out += "<rect width=\"100%\" height=\"100%\" fill=\"" + detail::svg_color(doc.background) + "\"/>\n";
    if (!doc.frame.empty()) {
        for (const Element& el : doc.elements) {
            if (const auto* poly = std::get_if<FilledPolygon>(&el)) {
                out += "<polygon fill-rule=\"evenodd\" fill=\"" + detail::svg_color(poly->fill) + "\" points=\"";
                for (std::size_t i = 0; i < poly->points.size(); ++i) {
                    const Vec2 p = to_px(poly->points[i]);
                    if (i) out += ' ';
                    out += detail::svg_number(p.x) + ',' + detail::svg_number(p.y);
                }
                out += "\"/>\n";
            } else {
                const auto& s = std::get<Stroke>(el);
                const Vec2 a = to_px(s.a), b = to_px(s.b);
                out += "<line x1=\"" + detail::svg_number(a.x) + "\" y1=\"" + detail::svg_number(a.y) + "\" x2=\"" +
                       detail::svg_number(b.x) + "\" y2=\"" + detail::svg_number(b.y) + "\" stroke=\"" +
                       detail::svg_color(s.color) + "\" stroke-width=\"" + detail::svg_number(s.width) +
                       "\" stroke-linecap=\"round\"/>\n";
            }
        }
    }
    out += "</svg>\n";
    return out;
}

} // namespace forge
