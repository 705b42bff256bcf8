#pragma once

#include "labelkit/geo.hpp"
#include "labelkit/scene.hpp"

#include <json.hpp>

#include <filesystem>
#include <string>

namespace labelkit {

inline constexpr int kSchemaVersion = 1;

// Malformed or unreadable input, as opposed to a well-formed scene that
// breaks an invariant (see validate_scene).
class FormatError : public LabelError {
public:
    using LabelError::LabelError;
};

Scene scene_from_json(const nlohmann::json& doc);
nlohmann::json scene_to_json(const Scene& scene);
Scene load_scene(const std::filesystem::path& path);

// "#RRGGBB"
Rgb parse_hex_color(const std::string& text);
std::string to_hex_color(const Rgb& color);

nlohmann::json position_to_json(const WorldPosition& p);
WorldPosition position_from_json(const nlohmann::json& j);

nlohmann::json pose_to_json(const DevicePose& pose);
DevicePose pose_from_json(const nlohmann::json& j);

} // namespace labelkit
