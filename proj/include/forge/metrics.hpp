#pragma once

#include "forge/crease_pattern.hpp"
#include "forge/error.hpp"
#include "forge/flat_fold.hpp"
#include "forge/fold.hpp"
#include "forge/raster.hpp"
#include "forge/render.hpp"
#include "forge/scorer.hpp"

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <utility>
#include <vector>

namespace forge {

enum class MetricsErrc { EmptyMask, EmptyUnion, DimensionMismatch, NotFoldable };
using MetricsError = CodedError<MetricsErrc>;

/// Row-major 0/1 silhouette.
struct BinaryMask {
    std::size_t width = 0;
    std::size_t height = 0;
    std::vector<std::uint8_t> bits;

    BinaryMask() = default;
    BinaryMask(std::size_t w, std::size_t h) : width(w), height(h), bits(w * h, 0) {}

    [[nodiscard]] bool at(std::size_t x, std::size_t y) const noexcept { return bits[y * width + x] != 0; }
    void set(std::size_t x, std::size_t y, bool v = true) noexcept { bits[y * width + x] = v ? 1 : 0; }
    [[nodiscard]] std::size_t count() const noexcept {
        return static_cast<std::size_t>(std::count(bits.begin(), bits.end(), std::uint8_t{1}));
    }

    friend bool operator==(const BinaryMask&, const BinaryMask&) = default;
};

/// Foreground test: 0.299 R + 0.587 G + 0.114 B < 250, evaluated exactly in
/// integer thousandths.
constexpr bool is_foreground(Rgb c) noexcept { return luma_milli(c) < 250000U; }

namespace detail {

struct Component {
    std::size_t x0, y0, x1, y1; // inclusive bounding box
    std::size_t pixels = 0;
};

/// Pixels of the component plus everything it encloses: the complement of
/// the 4-connected region reachable from outside its bounding box.
inline std::vector<std::uint8_t> fill_component(const std::vector<std::uint32_t>& label, std::size_t width,
                                                std::uint32_t id, const Component& c, std::size_t& filled) {
    const std::size_t bw = c.x1 - c.x0 + 3, bh = c.y1 - c.y0 + 3;
    std::vector<std::uint8_t> state(bw * bh, 0); // 0 open, 1 wall, 2 reached
    for (std::size_t y = c.y0; y <= c.y1; ++y)
        for (std::size_t x = c.x0; x <= c.x1; ++x)
            if (label[y * width + x] == id) state[(y - c.y0 + 1) * bw + (x - c.x0 + 1)] = 1;
    std::vector<std::size_t> stack{0};
    state[0] = 2;
    while (!stack.empty()) {
        const std::size_t i = stack.back();
        stack.pop_back();
        const std::size_t x = i % bw, y = i / bw;
        const auto visit = [&](std::size_t j) {
            if (state[j] == 0) {
                state[j] = 2;
                stack.push_back(j);
            }
        };
        if (x > 0) visit(i - 1);
        if (x + 1 < bw) visit(i + 1);
        if (y > 0) visit(i - bw);
        if (y + 1 < bh) visit(i + bw);
    }
    filled = static_cast<std::size_t>(std::count_if(state.begin(), state.end(), [](std::uint8_t s) { return s != 2; }));
    return state;
}

} // namespace detail

/// Silhouette of the largest foreground shape: threshold, 8-connected
/// components, keep the one enclosing the most pixels, fill its interior.
inline BinaryMask extract_mask(const RasterImage& img) {
    const std::size_t w = img.width(), h = img.height();
    std::vector<std::uint32_t> label(w * h, 0);
    std::vector<detail::Component> comps;
    std::vector<std::size_t> stack;
    for (std::size_t y = 0; y < h; ++y) {
        for (std::size_t x = 0; x < w; ++x) {
            if (label[y * w + x] != 0 || !is_foreground(img.at(x, y))) continue;
            const auto id = static_cast<std::uint32_t>(comps.size() + 1);
            detail::Component c{x, y, x, y, 0};
            label[y * w + x] = id;
            stack.assign(1, y * w + x);
            while (!stack.empty()) {
                const std::size_t i = stack.back();
                stack.pop_back();
                const std::size_t px = i % w, py = i / w;
                ++c.pixels;
                c.x0 = std::min(c.x0, px);
                c.x1 = std::max(c.x1, px);
                c.y0 = std::min(c.y0, py);
                c.y1 = std::max(c.y1, py);
                for (int dy = -1; dy <= 1; ++dy) {
                    for (int dx = -1; dx <= 1; ++dx) {
                        if (dx == 0 && dy == 0) continue;
                        const auto nx = static_cast<long>(px) + dx, ny = static_cast<long>(py) + dy;
                        if (nx < 0 || ny < 0 || nx >= static_cast<long>(w) || ny >= static_cast<long>(h)) continue;
                        const std::size_t j = static_cast<std::size_t>(ny) * w + static_cast<std::size_t>(nx);
                        if (label[j] != 0 || !is_foreground(img.at(static_cast<std::size_t>(nx), static_cast<std::size_t>(ny))))
                            continue;
                        label[j] = id;
                        stack.push_back(j);
                    }
                }
            }
            comps.push_back(c);
        }
    }
    if (comps.empty()) throw MetricsError(MetricsErrc::EmptyMask, "image has no foreground pixel");

    std::size_t best = 0, best_filled = 0;
    std::vector<std::uint8_t> best_state;
    for (std::size_t k = 0; k < comps.size(); ++k) {
        const auto& c = comps[k];
        const std::size_t box_area = (c.x1 - c.x0 + 1) * (c.y1 - c.y0 + 1);
        if (box_area <= best_filled) continue;
        std::size_t filled = 0;
        auto state = detail::fill_component(label, w, static_cast<std::uint32_t>(k + 1), c, filled);
        if (filled > best_filled) {
            best = k;
            best_filled = filled;
            best_state = std::move(state);
        }
    }
    const auto& c = comps[best];
    const std::size_t bw = c.x1 - c.x0 + 3;
    BinaryMask mask(w, h);
    for (std::size_t y = c.y0; y <= c.y1; ++y)
        for (std::size_t x = c.x0; x <= c.x1; ++x)
            if (best_state[(y - c.y0 + 1) * bw + (x - c.x0 + 1)] != 2) mask.set(x, y);
    return mask;
}

/// |a AND b| / |a OR b| over pixels.
inline double iou(const BinaryMask& a, const BinaryMask& b) {
    if (a.width != b.width || a.height != b.height)
        throw MetricsError(MetricsErrc::DimensionMismatch, "masks differ in size");
    std::size_t inter = 0, uni = 0;
    for (std::size_t i = 0; i < a.bits.size(); ++i) {
        inter += (a.bits[i] & b.bits[i]) != 0 ? 1U : 0U;
        uni += (a.bits[i] | b.bits[i]) != 0 ? 1U : 0U;
    }
    if (uni == 0) throw MetricsError(MetricsErrc::EmptyUnion, "both masks are empty");
    return static_cast<double>(inter) / static_cast<double>(uni);
}

struct EpisodeScore {
    double qe = 0.0;
    double gs = 0.0;
    std::optional<double> ss;
    std::size_t steps_attempted = 0;
    std::size_t steps_valid = 0;
    /// Accepted steps that changed the front silhouette.
    std::size_t steps_reshaping = 0;
};

/// Fraction of attempted steps the validator accepted; 0 with no attempts.
constexpr double query_efficiency(std::size_t steps_valid, std::size_t steps_attempted) noexcept {
    return steps_attempted == 0 ? 0.0 : static_cast<double>(steps_valid) / static_cast<double>(steps_attempted);
}

struct ImageOptions {
    std::size_t width = 512;
    std::size_t height = 512;
    RenderStyle style{};
    SearchBudget budget{};
};

/// Folds a pattern and renders one side of it.
inline RasterImage folded_image(const CreasePattern& cp, Side side, const ImageOptions& opt = {}) {
    const auto verdict = is_foldable(cp, opt.budget);
    if (!verdict.valid())
        throw MetricsError(MetricsErrc::NotFoldable, std::string("pattern is not foldable: ") +
                                                         std::string(to_string(verdict.status)));
    return rasterize(render_folded(cp, *verdict.witness, side, opt.style), opt.width, opt.height, opt.style.margin);
}

/// IoU of the front-view silhouettes of two FOLD files rendered identically.
inline double geometric_similarity(const FoldFile& result, const FoldFile& target, const ImageOptions& opt = {}) {
    const auto a = extract_mask(folded_image(CreasePattern::from_fold(result), Side::Front, opt));
    const auto b = extract_mask(folded_image(CreasePattern::from_fold(target), Side::Front, opt));
    return iou(a, b);
}

/// Dot product of the L2-normalised embeddings of two images, or nothing
/// when the scorer cannot be reached.
inline std::optional<double> semantic_similarity(const RasterImage& result, const RasterImage& target,
                                                 EmbeddingScorer& scorer) {
    try {
        auto za = scorer.embed(encode_png(result));
        auto zb = scorer.embed(encode_png(target));
        const auto normalise = [](std::vector<double>& z) {
            double n = 0.0;
            for (double v : z) n += v * v;
            n = std::sqrt(n);
            if (n == 0.0) throw ScorerError(ScorerErrc::Protocol, "zero embedding");
            for (double& v : z) v /= n;
        };
        normalise(za);
        normalise(zb);
        if (za.size() != zb.size()) throw ScorerError(ScorerErrc::Protocol, "embedding sizes differ");
        double s = 0.0;
        for (std::size_t i = 0; i < za.size(); ++i) s += za[i] * zb[i];
        return std::clamp(s, -1.0, 1.0);
    } catch (const ScorerError&) {
        return std::nullopt;
    }
}

} // namespace forge
