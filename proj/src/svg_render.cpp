#include "xcity/svg_render.hpp"

#include <algorithm>
#include <cstdio>
#include <limits>
#include <sstream>

namespace xcity {

namespace {

constexpr double kCanvasWidth = 800.0;
constexpr double kMarginPx = 24.0;

const char* const kPalette[] = {
    "#c0392b", "#27ae60", "#8e44ad", "#d35400", "#16a085",
    "#7f8c8d", "#2c3e50", "#b7950b", "#a04000", "#1e8449",
};

std::string fmt(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.2f", v);
    return buf;
}

struct Mapper {
    double scale = 1.0;
    double min_x = 0.0, max_y = 0.0;
    double width = kCanvasWidth, height = kCanvasWidth;

    // World y grows upward, SVG y grows downward.
    double sx(double x) const { return kMarginPx + (x - min_x) * scale; }
    double sy(double y) const { return kMarginPx + (max_y - y) * scale; }
};

Mapper fit_canvas(const LoadedResult& result) {
    double min_x = std::numeric_limits<double>::infinity();
    double min_y = std::numeric_limits<double>::infinity();
    double max_x = -min_x, max_y = -min_y;
    auto grow = [&](const Point2& p) {
        min_x = std::min(min_x, p.x);
        min_y = std::min(min_y, p.y);
        max_x = std::max(max_x, p.x);
        max_y = std::max(max_y, p.y);
    };
    for (const Point2& v : result.space.vertices) grow(v);
    for (const auto& [id, world] : result.placement.world_nodes) {
        for (const Point2& p : world) grow(p);
    }
    for (const auto& t : result.transitions) {
        grow(t.from_xy);
        grow(t.to_xy);
    }

    Mapper m;
    const double span_x = std::max(max_x - min_x, 1e-9);
    const double span_y = std::max(max_y - min_y, 1e-9);
    m.scale = (kCanvasWidth - 2.0 * kMarginPx) / span_x;
    m.min_x = min_x;
    m.max_y = max_y;
    m.width = kCanvasWidth;
    m.height = span_y * m.scale + 2.0 * kMarginPx;
    return m;
}

}  // namespace

std::string render_svg(const LoadedResult& result) {
    const Mapper m = fit_canvas(result);
    std::ostringstream svg;
    svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << fmt(m.width) << "\" height=\""
        << fmt(m.height) << "\" viewBox=\"0 0 " << fmt(m.width) << " " << fmt(m.height)
        << "\">\n";
    svg << "<rect width=\"100%\" height=\"100%\" fill=\"#ffffff\"/>\n";

    svg << "<polygon points=\"";
    for (std::size_t i = 0; i < result.space.vertices.size(); ++i) {
        const Point2& v = result.space.vertices[i];
        if (i) svg << " ";
        svg << fmt(m.sx(v.x)) << "," << fmt(m.sy(v.y));
    }
    svg << "\" fill=\"#f4f6f8\" stroke=\"#444444\" stroke-width=\"1.5\"/>\n";

    // Colors follow sorted id order so the same design always paints the same.
    std::vector<std::string> ids;
    for (const RoadAsset& a : result.assets) ids.push_back(a.id);
    std::sort(ids.begin(), ids.end());
    auto color_of = [&](const std::string& id) {
        const auto it = std::find(ids.begin(), ids.end(), id);
        const auto idx = static_cast<std::size_t>(it - ids.begin());
        return kPalette[idx % (sizeof(kPalette) / sizeof(kPalette[0]))];
    };

    for (const RoadAsset& asset : result.assets) {
        const auto world_it = result.placement.world_nodes.find(asset.id);
        if (world_it == result.placement.world_nodes.end()) continue;
        const std::vector<Point2>& world = world_it->second;
        const char* color = color_of(asset.id);
        svg << "<g stroke=\"" << color << "\" stroke-width=\"2.5\" fill=\"" << color << "\">\n";
        for (const auto& [a, b] : asset.segments) {
            svg << "<line x1=\"" << fmt(m.sx(world[a].x)) << "\" y1=\"" << fmt(m.sy(world[a].y))
                << "\" x2=\"" << fmt(m.sx(world[b].x)) << "\" y2=\"" << fmt(m.sy(world[b].y))
                << "\"/>\n";
        }
        for (const Point2& p : world) {
            svg << "<circle cx=\"" << fmt(m.sx(p.x)) << "\" cy=\"" << fmt(m.sy(p.y))
                << "\" r=\"3\" stroke=\"none\"/>\n";
        }
        svg << "</g>\n";
        if (!world.empty()) {
            svg << "<text x=\"" << fmt(m.sx(world[0].x) + 6.0) << "\" y=\""
                << fmt(m.sy(world[0].y) - 6.0) << "\" font-family=\"sans-serif\" font-size=\"13\" fill=\""
                << color << "\">" << asset.id << "</text>\n";
        }
    }

    for (const auto& t : result.transitions) {
        svg << "<line x1=\"" << fmt(m.sx(t.from_xy.x)) << "\" y1=\"" << fmt(m.sy(t.from_xy.y))
            << "\" x2=\"" << fmt(m.sx(t.to_xy.x)) << "\" y2=\"" << fmt(m.sy(t.to_xy.y))
            << "\" stroke=\"#1f6fd6\" stroke-width=\"2\" stroke-dasharray=\"6 4\"/>\n";
    }

    svg << "</svg>\n";
    return svg.str();
}

}  // namespace xcity
