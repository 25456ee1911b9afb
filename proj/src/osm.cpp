#include "xcity/osm.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <numbers>
#include <set>

namespace xcity {

namespace {

// Minimal forward-only XML reader for the OSM subset. Tracks byte offsets so
// parse failures point at the offending input.
class XmlReader {
public:
    explicit XmlReader(std::string_view text) : text_(text) {}

    struct Tag {
        std::string name;
        std::map<std::string, std::string> attrs;
        bool closing = false;      // </name>
        bool self_closing = false; // <name/>
        std::size_t offset = 0;
    };

    // Advances to the next element tag; false at end of input.
    bool next(Tag& out) {
        while (pos_ < text_.size()) {
            if (text_[pos_] != '<') {
                ++pos_;  // character data is ignored
                continue;
            }
            if (starts_with("<?")) {
                skip_until("?>", "unterminated processing instruction");
                continue;
            }
            if (starts_with("<!--")) {
                skip_until("-->", "unterminated comment");
                continue;
            }
            if (starts_with("<!")) {
                skip_until(">", "unterminated declaration");
                continue;
            }
            read_tag(out);
            return true;
        }
        return false;
    }

private:
    bool starts_with(std::string_view prefix) const {
        return text_.substr(pos_, prefix.size()) == prefix;
    }

    void skip_until(std::string_view closer, const char* what) {
        const std::size_t found = text_.find(closer, pos_);
        if (found == std::string_view::npos) throw OsmParseError(pos_, what);
        pos_ = found + closer.size();
    }

    static bool name_char(char c) {
        return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '-' || c == ':' ||
               c == '.';
    }

    void skip_ws() {
        while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_]))) ++pos_;
    }

    std::string decode_entities(std::string_view raw, std::size_t at) const {
        std::string out;
        out.reserve(raw.size());
        for (std::size_t i = 0; i < raw.size(); ++i) {
            if (raw[i] != '&') {
                out.push_back(raw[i]);
                continue;
            }
            const std::size_t semi = raw.find(';', i);
            if (semi == std::string_view::npos) throw OsmParseError(at + i, "unterminated entity");
            const std::string_view ent = raw.substr(i + 1, semi - i - 1);
            if (ent == "amp") out.push_back('&');
            else if (ent == "lt") out.push_back('<');
            else if (ent == "gt") out.push_back('>');
            else if (ent == "quot") out.push_back('"');
            else if (ent == "apos") out.push_back('\'');
            else if (!ent.empty() && ent[0] == '#') {
                int code = 0;
                const bool hex = ent.size() > 1 && (ent[1] == 'x' || ent[1] == 'X');
                const auto digits = ent.substr(hex ? 2 : 1);
                const auto [p, ec] = std::from_chars(digits.data(), digits.data() + digits.size(),
                                                     code, hex ? 16 : 10);
                if (ec != std::errc() || p != digits.data() + digits.size() || code <= 0 || code > 127) {
                    throw OsmParseError(at + i, "unsupported character reference");
                }
                out.push_back(static_cast<char>(code));
            } else {
                throw OsmParseError(at + i, "unknown entity '&" + std::string(ent) + ";'");
            }
            i = semi;
        }
        return out;
    }

    void read_tag(Tag& out) {
        out = Tag{};
        out.offset = pos_;
        ++pos_;  // consume '<'
        if (pos_ < text_.size() && text_[pos_] == '/') {
            out.closing = true;
            ++pos_;
        }
        const std::size_t name_start = pos_;
        while (pos_ < text_.size() && name_char(text_[pos_])) ++pos_;
        if (pos_ == name_start) throw OsmParseError(out.offset, "expected element name");
        out.name.assign(text_.substr(name_start, pos_ - name_start));

        for (;;) {
            skip_ws();
            if (pos_ >= text_.size()) throw OsmParseError(out.offset, "unterminated tag");
            if (text_[pos_] == '>') {
                ++pos_;
                return;
            }
            if (text_[pos_] == '/') {
                ++pos_;
                if (pos_ >= text_.size() || text_[pos_] != '>') {
                    throw OsmParseError(pos_, "expected '>' after '/'");
                }
                ++pos_;
                out.self_closing = true;
                return;
            }
            if (out.closing) throw OsmParseError(pos_, "attributes not allowed in closing tag");

            const std::size_t attr_start = pos_;
            while (pos_ < text_.size() && name_char(text_[pos_])) ++pos_;
            if (pos_ == attr_start) throw OsmParseError(pos_, "expected attribute name");
            std::string key(text_.substr(attr_start, pos_ - attr_start));
            skip_ws();
            if (pos_ >= text_.size() || text_[pos_] != '=') {
                throw OsmParseError(pos_, "expected '=' after attribute name");
            }
            ++pos_;
            skip_ws();
            if (pos_ >= text_.size() || (text_[pos_] != '"' && text_[pos_] != '\'')) {
                throw OsmParseError(pos_, "expected quoted attribute value");
            }
            const char quote = text_[pos_++];
            const std::size_t val_start = pos_;
            const std::size_t val_end = text_.find(quote, pos_);
            if (val_end == std::string_view::npos) {
                throw OsmParseError(val_start, "unterminated attribute value");
            }
            out.attrs[key] = decode_entities(text_.substr(val_start, val_end - val_start), val_start);
            pos_ = val_end + 1;
        }
    }

    std::string_view text_;
    std::size_t pos_ = 0;
};

double parse_double_attr(const XmlReader::Tag& tag, const std::string& key) {
    auto it = tag.attrs.find(key);
    if (it == tag.attrs.end()) {
        throw OsmParseError(tag.offset, "<" + tag.name + "> missing attribute '" + key + "'");
    }
    try {
        std::size_t used = 0;
        const double v = std::stod(it->second, &used);
        if (used != it->second.size() || !std::isfinite(v)) throw std::invalid_argument("trailing");
        return v;
    } catch (const std::exception&) {
        throw OsmParseError(tag.offset, "attribute '" + key + "' is not a number");
    }
}

std::int64_t parse_int_attr(const XmlReader::Tag& tag, const std::string& key) {
    auto it = tag.attrs.find(key);
    if (it == tag.attrs.end()) {
        throw OsmParseError(tag.offset, "<" + tag.name + "> missing attribute '" + key + "'");
    }
    std::int64_t v = 0;
    const std::string& s = it->second;
    const auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || p != s.data() + s.size()) {
        throw OsmParseError(tag.offset, "attribute '" + key + "' is not an integer");
    }
    return v;
}

std::string escape_xml(const std::string& raw) {
    std::string out;
    out.reserve(raw.size());
    for (char c : raw) {
        switch (c) {
            case '&': out += "&amp;"; break;
            case '<': out += "&lt;"; break;
            case '>': out += "&gt;"; break;
            case '"': out += "&quot;"; break;
            case '\'': out += "&apos;"; break;
            default: out.push_back(c);
        }
    }
    return out;
}

std::string format_coord(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

}  // namespace

RawOsmGraph parse_osm(std::string_view xml) {
    RawOsmGraph graph;
    XmlReader reader(xml);
    XmlReader::Tag tag;
    bool in_way = false;
    OsmWay current;

    while (reader.next(tag)) {
        if (tag.closing) {
            if (tag.name == "way") {
                if (!in_way) throw OsmParseError(tag.offset, "</way> without <way>");
                graph.ways.push_back(current);
                in_way = false;
            }
            continue;
        }
        if (tag.name == "node") {
            const std::int64_t id = parse_int_attr(tag, "id");
            LatLon ll{parse_double_attr(tag, "lat"), parse_double_attr(tag, "lon")};
            if (ll.lat < -90.0 || ll.lat > 90.0) throw OsmParseError(tag.offset, "lat out of range");
            if (ll.lon < -180.0 || ll.lon > 180.0) throw OsmParseError(tag.offset, "lon out of range");
            graph.nodes[id] = ll;
        } else if (tag.name == "way") {
            if (in_way) throw OsmParseError(tag.offset, "nested <way>");
            current = OsmWay{};
            current.id = parse_int_attr(tag, "id");
            if (tag.self_closing) graph.ways.push_back(current);
            else in_way = true;
        } else if (tag.name == "nd") {
            if (in_way) current.refs.push_back(parse_int_attr(tag, "ref"));
        } else if (tag.name == "tag") {
            if (in_way) {
                auto k = tag.attrs.find("k");
                auto v = tag.attrs.find("v");
                if (k == tag.attrs.end() || v == tag.attrs.end()) {
                    throw OsmParseError(tag.offset, "<tag> needs k and v attributes");
                }
                current.tags[k->second] = v->second;
            }
        }
        // anything else (osm, bounds, relation, ...) is ignored
    }
    if (in_way) throw OsmParseError(xml.size(), "unterminated <way>");

    for (const OsmWay& way : graph.ways) {
        for (std::int64_t ref : way.refs) {
            if (!graph.nodes.count(ref)) throw OsmReferenceError(way.id, ref);
        }
    }
    return graph;
}

std::string serialize_osm(const RawOsmGraph& graph) {
    std::string out = "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n<osm version=\"0.6\">\n";
    for (const auto& [id, ll] : graph.nodes) {
        out += "  <node id=\"" + std::to_string(id) + "\" lat=\"" + format_coord(ll.lat) +
               "\" lon=\"" + format_coord(ll.lon) + "\"/>\n";
    }
    for (const OsmWay& way : graph.ways) {
        out += "  <way id=\"" + std::to_string(way.id) + "\">\n";
        for (std::int64_t ref : way.refs) {
            out += "    <nd ref=\"" + std::to_string(ref) + "\"/>\n";
        }
        for (const auto& [k, v] : way.tags) {
            out += "    <tag k=\"" + escape_xml(k) + "\" v=\"" + escape_xml(v) + "\"/>\n";
        }
        out += "  </way>\n";
    }
    out += "</osm>\n";
    return out;
}

std::map<std::int64_t, Point2> project_local(const RawOsmGraph& graph) {
    std::map<std::int64_t, Point2> out;
    if (graph.nodes.empty()) return out;

    double lat0 = 0.0;
    double lon0 = 0.0;
    for (const auto& [id, ll] : graph.nodes) {
        lat0 += ll.lat;
        lon0 += ll.lon;
    }
    lat0 /= static_cast<double>(graph.nodes.size());
    lon0 /= static_cast<double>(graph.nodes.size());

    const double deg = std::numbers::pi / 180.0;
    const double cos_lat0 = std::cos(lat0 * deg);
    for (const auto& [id, ll] : graph.nodes) {
        out[id] = {kEarthRadiusM * cos_lat0 * (ll.lon - lon0) * deg,
                   kEarthRadiusM * (ll.lat - lat0) * deg};
    }
    return out;
}

RoadAsset extract_asset(const RawOsmGraph& graph, std::span<const std::int64_t> way_ids,
                        double simplify_tol, const std::string& id, double value) {
    if (way_ids.empty()) throw AssetExtractionError("extract_asset: empty way set");

    std::vector<const OsmWay*> ways;
    for (std::int64_t wid : way_ids) {
        auto it = std::find_if(graph.ways.begin(), graph.ways.end(),
                               [wid](const OsmWay& w) { return w.id == wid; });
        if (it == graph.ways.end()) {
            throw AssetExtractionError("extract_asset: way " + std::to_string(wid) + " not in graph");
        }
        ways.push_back(&*it);
    }

    // Nodes referenced by more than one way (or twice within one) are
    // junctions; down-sampling must not drop them.
    std::map<std::int64_t, int> ref_count;
    for (const OsmWay* w : ways) {
        for (std::int64_t r : w->refs) ++ref_count[r];
    }

    const auto projected = project_local(graph);

    std::vector<Point2> nodes;
    std::map<std::int64_t, std::size_t> node_index;
    std::set<std::pair<std::size_t, std::size_t>> segment_set;
    std::vector<std::pair<std::size_t, std::size_t>> segments;

    auto intern = [&](std::int64_t osm_id) {
        auto it = node_index.find(osm_id);
        if (it != node_index.end()) return it->second;
        const std::size_t idx = nodes.size();
        nodes.push_back(projected.at(osm_id));
        node_index[osm_id] = idx;
        return idx;
    };

    auto add_segment = [&](std::size_t a, std::size_t b) {
        if (a == b) return;
        const auto key = std::minmax(a, b);
        if (segment_set.insert(key).second) segments.push_back(key);
    };

    for (const OsmWay* w : ways) {
        if (w->refs.size() < 2) {
            throw AssetExtractionError("extract_asset: way " + std::to_string(w->id) +
                                       " has fewer than 2 node refs");
        }
        // Split the way at protected junction refs and simplify each run.
        std::vector<std::size_t> cut_points{0};
        for (std::size_t k = 1; k + 1 < w->refs.size(); ++k) {
            if (ref_count[w->refs[k]] > 1) cut_points.push_back(k);
        }
        cut_points.push_back(w->refs.size() - 1);

        for (std::size_t c = 0; c + 1 < cut_points.size(); ++c) {
            const std::size_t lo = cut_points[c];
            const std::size_t hi = cut_points[c + 1];
            std::vector<Point2> run;
            std::vector<std::int64_t> run_ids;
            for (std::size_t k = lo; k <= hi; ++k) {
                run.push_back(projected.at(w->refs[k]));
                run_ids.push_back(w->refs[k]);
            }
            const std::vector<std::size_t> kept = simplify_node_indices(run, simplify_tol);
            for (std::size_t k = 0; k + 1 < kept.size(); ++k) {
                add_segment(intern(run_ids[kept[k]]), intern(run_ids[kept[k + 1]]));
            }
        }
    }

    RoadAsset asset;
    asset.id = id;
    asset.nodes = std::move(nodes);
    asset.segments = std::move(segments);
    asset.value = value;

    const Point2 centroid = polygon_vertex_mean(asset.nodes);
    for (Point2& p : asset.nodes) p = p - centroid;

    auto violations = validate_asset(asset);
    if (!violations.empty()) {
        std::string what = "extract_asset: '" + id + "' failed validation:";
        for (const auto& v : violations) what += " [" + v.detail + "]";
        throw AssetExtractionError(what, std::move(violations));
    }
    return asset;
}

}  // namespace xcity
