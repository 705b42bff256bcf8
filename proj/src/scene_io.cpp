#include "labelkit/scene_io.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

namespace labelkit {

using nlohmann::json;

namespace {

template <typename T>
T get_or(const json& j, const char* key, T fallback)
{
    auto it = j.find(key);
    if (it == j.end() || it->is_null()) return fallback;
    return it->get<T>();
}

Extent extent_from_json(const json& j) { return {j.at("width").get<double>(), j.at("height").get<double>()}; }
json extent_to_json(const Extent& e) { return {{"width", e.width}, {"height", e.height}}; }

} // namespace

Rgb parse_hex_color(const std::string& text)
{
    if (text.size() != 7 || text[0] != '#') throw FormatError("color must look like #RRGGBB: '" + text + "'");
    unsigned value = 0;
    for (std::size_t k = 1; k < 7; ++k) {
        const char c = text[k];
        unsigned digit;
        if (c >= '0' && c <= '9') digit = c - '0';
        else if (c >= 'a' && c <= 'f') digit = 10 + c - 'a';
        else if (c >= 'A' && c <= 'F') digit = 10 + c - 'A';
        else throw FormatError("color must look like #RRGGBB: '" + text + "'");
        value = value * 16 + digit;
    }
    return {double((value >> 16) & 0xFF), double((value >> 8) & 0xFF), double(value & 0xFF)};
}

std::string to_hex_color(const Rgb& color)
{
    auto channel = [](double v) {
        const long r = std::lround(v);
        return static_cast<unsigned>(r < 0 ? 0 : (r > 255 ? 255 : r));
    };
    char buf[8];
    std::snprintf(buf, sizeof buf, "#%02X%02X%02X", channel(color.r), channel(color.g), channel(color.b));
    return buf;
}

json position_to_json(const WorldPosition& p) { return {{"x", p.x}, {"y", p.y}, {"z", p.z}}; }

WorldPosition position_from_json(const json& j)
{
    return {j.at("x").get<double>(), get_or(j, "y", 0.0), j.at("z").get<double>()};
}

json pose_to_json(const DevicePose& pose)
{
    json j{{"position", position_to_json(pose.position)}, {"yaw_deg", pose.yaw_deg}, {"pitch_deg", pose.pitch_deg}};
    if (pose.geo) j["geo"] = {{"lat", pose.geo->latitude_deg}, {"lon", pose.geo->longitude_deg}};
    if (pose.compass_deg) j["compass_deg"] = *pose.compass_deg;
    return j;
}

DevicePose pose_from_json(const json& j)
{
    DevicePose pose;
    pose.position = position_from_json(j.at("position"));
    pose.yaw_deg = get_or(j, "yaw_deg", 0.0);
    pose.pitch_deg = get_or(j, "pitch_deg", 0.0);
    if (j.contains("geo")) pose.geo = GeoCoordinate{j["geo"].at("lat").get<double>(), j["geo"].at("lon").get<double>()};
    if (j.contains("compass_deg")) pose.compass_deg = j["compass_deg"].get<double>();
    if (!pose.finite()) throw FormatError("pose contains non-finite values");
    pose.yaw_deg = normalize_yaw(pose.yaw_deg);
    return pose;
}

Scene scene_from_json(const json& doc)
{
    try {
        if (!doc.is_object()) throw FormatError("scene must be a JSON object");
        if (!doc.contains("schema")) throw FormatError("missing \"schema\" field");
        if (doc.at("schema").get<int>() != kSchemaVersion)
            throw FormatError("unsupported schema version " + doc.at("schema").dump());

        Scene scene;
        if (doc.contains("origin")) {
            const json& o = doc["origin"];
            scene.geo_origin = GeoOrigin{{o.at("lat").get<double>(), o.at("lon").get<double>()}, get_or(o, "compass_deg", 0.0)};
        }
        if (doc.contains("thresholds")) {
            const json& t = doc["thresholds"];
            scene.thresholds = {get_or(t, "t_deg", 45.0), get_or(t, "m1_deg", 20.0), get_or(t, "m2_deg", 30.0)};
        }
        if (doc.contains("color_scale")) {
            scene.color_scale.stops.clear();
            for (const json& s : doc["color_scale"].at("stops"))
                scene.color_scale.stops.push_back({s.at("value").get<double>(), parse_hex_color(s.at("color").get<std::string>())});
        }
        if (doc.contains("label_extents")) {
            const json& e = doc["label_extents"];
            scene.label_extents = {extent_from_json(e.at("lowest")), extent_from_json(e.at("middle")),
                                   extent_from_json(e.at("highest"))};
        }
        scene.transition_duration_s = get_or(doc, "transition_duration_s", scene.transition_duration_s);
        scene.easing = get_or(doc, "easing", scene.easing);
        scene.group_margin = get_or(doc, "group_margin", scene.group_margin);
        if (doc.contains("occlusion")) {
            const json& o = doc["occlusion"];
            scene.occlusion.margin_fraction = get_or(o, "margin_fraction", scene.occlusion.margin_fraction);
            scene.occlusion.strict = get_or(o, "strict", scene.occlusion.strict);
        }
        if (doc.contains("default_pose")) {
            const DevicePose pose = pose_from_json(doc["default_pose"]);
            scene.default_position = pose.position;
            scene.default_yaw_deg = pose.yaw_deg;
            scene.default_pitch_deg = pose.pitch_deg;
        }

        for (const json& g : get_or(doc, "groups", json::array())) {
            LabelGroup group;
            group.group_id = g.at("id").get<std::string>();
            group.name = get_or<std::string>(g, "name", group.group_id);
            group.member_ids = g.at("members").get<std::vector<std::string>>();
            scene.groups.push_back(std::move(group));
        }

        for (const json& p : doc.at("pois")) {
            Poi poi;
            poi.id = p.at("id").get<std::string>();
            poi.name = get_or<std::string>(p, "name", poi.id);
            const json& pos = p.at("position");
            if (pos.contains("lat") || pos.contains("lon")) {
                const GeoCoordinate geo{pos.at("lat").get<double>(), pos.at("lon").get<double>()};
                if (!scene.geo_origin) throw FormatError("POI '" + poi.id + "' uses lat/lon but the scene has no origin");
                poi.geo = geo;
                if (geo.valid()) poi.position = geodetic_to_local(*scene.geo_origin, geo);
                poi.position.y = get_or(pos, "y", 0.0);
            } else {
                poi.position = position_from_json(pos);
            }
            poi.category = get_or<std::string>(p, "category", "");
            poi.image_ref = get_or<std::string>(p, "image", "");
            if (p.contains("scalar")) {
                poi.scalar.value = p["scalar"].at("value").get<double>();
                poi.scalar.unit = get_or<std::string>(p["scalar"], "unit", "");
            }
            if (p.contains("group") && !p["group"].is_null()) poi.group_id = p["group"].get<std::string>();
            scene.pois.push_back(std::move(poi));
        }

        // Group membership can be given from either side; fill in the POI side.
        for (const LabelGroup& g : scene.groups) {
            for (const std::string& m : g.member_ids) {
                for (Poi& poi : scene.pois)
                    if (poi.id == m && !poi.group_id) poi.group_id = g.group_id;
            }
        }
        return scene;
    } catch (const json::exception& e) {
        throw FormatError(std::string("malformed scene: ") + e.what());
    } catch (const LabelError& e) {
        if (dynamic_cast<const FormatError*>(&e)) throw;
        throw FormatError(e.what());
    }
}

json scene_to_json(const Scene& scene)
{
    json doc;
    doc["schema"] = kSchemaVersion;
    if (scene.geo_origin)
        doc["origin"] = {{"lat", scene.geo_origin->coordinate.latitude_deg},
                         {"lon", scene.geo_origin->coordinate.longitude_deg},
                         {"compass_deg", scene.geo_origin->compass_deg}};
    doc["thresholds"] = {{"t_deg", scene.thresholds.t_deg}, {"m1_deg", scene.thresholds.m1_deg}, {"m2_deg", scene.thresholds.m2_deg}};
    json stops = json::array();
    for (const ColorStop& s : scene.color_scale.stops) stops.push_back({{"value", s.value}, {"color", to_hex_color(s.color)}});
    doc["color_scale"] = {{"stops", stops}};
    doc["label_extents"] = {{"lowest", extent_to_json(scene.label_extents.lowest)},
                            {"middle", extent_to_json(scene.label_extents.middle)},
                            {"highest", extent_to_json(scene.label_extents.highest)}};
    doc["transition_duration_s"] = scene.transition_duration_s;
    doc["easing"] = scene.easing;
    doc["group_margin"] = scene.group_margin;
    doc["occlusion"] = {{"margin_fraction", scene.occlusion.margin_fraction}, {"strict", scene.occlusion.strict}};
    DevicePose pose;
    pose.position = scene.default_position;
    pose.yaw_deg = scene.default_yaw_deg;
    pose.pitch_deg = scene.default_pitch_deg;
    doc["default_pose"] = pose_to_json(pose);

    json groups = json::array();
    for (const LabelGroup& g : scene.groups) groups.push_back({{"id", g.group_id}, {"name", g.name}, {"members", g.member_ids}});
    doc["groups"] = groups;

    json pois = json::array();
    for (const Poi& p : scene.pois) {
        json j{{"id", p.id}, {"name", p.name}, {"category", p.category}, {"image", p.image_ref},
               {"scalar", {{"value", p.scalar.value}, {"unit", p.scalar.unit}}}};
        if (p.geo) j["position"] = {{"lat", p.geo->latitude_deg}, {"lon", p.geo->longitude_deg}, {"y", p.position.y}};
        else j["position"] = position_to_json(p.position);
        if (p.group_id) j["group"] = *p.group_id;
        pois.push_back(std::move(j));
    }
    doc["pois"] = pois;
    return doc;
}

Scene load_scene(const std::filesystem::path& path)
{
    std::ifstream in(path);
    if (!in) throw FormatError("cannot open scene file '" + path.string() + "'");
    json doc;
    try {
        doc = json::parse(in);
    } catch (const json::exception& e) {
        throw FormatError("'" + path.string() + "' is not valid JSON: " + e.what());
    }
    return scene_from_json(doc);
}

} // namespace labelkit
