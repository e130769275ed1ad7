#pragma once

#include <string>

#include <json.hpp>

#include "moranifs/attractor.hpp"
#include "moranifs/families.hpp"
#include "moranifs/separation.hpp"
#include "moranifs/system.hpp"

namespace moran::io {

using json = nlohmann::ordered_json;

inline constexpr int kSchemaVersion = 1;

// System declaration document (see docs/schema.md). Throws ValidationError
// with a JSON pointer to the offending field.
struct Declaration {
  LayerSystem system;
  WeightSequence weights;
};

Declaration parse_system(const json& doc);
Declaration load_system_file(const std::string& path);

// Box-sequence declaration (same dialect): {"kind": "constant"|"periodic"|
// "family", "boxes": [...], "prefix": [...], "cycle": [...]}.
BoxSequence parse_box_sequence(const json& doc);
BoxSequence load_box_sequence_file(const std::string& path);

json system_info_json(const LayerSystem& sys, const AmbientCheck& check);

// Point cloud writers. CSV: one point per line, %.17g fields, LF line ends.
// Binary: little-endian float64, row-major. PPM: P6 maxval 255.
void write_csv(const PointCloud& pc, const std::string& path);
void write_binary(const PointCloud& pc, const std::string& path);
PointCloud read_csv(const std::string& path);

struct RenderOptions {
  int width = 800;
  int height = 600;
  double gamma = 2.2;
};

void render_ppm(const PointCloud& pc, const std::string& path,
                const RenderOptions& opt);
void render_svg(const PointCloud& pc, const std::string& path,
                const RenderOptions& opt);

void write_text_file(const std::string& path, const std::string& content);
std::string format_double(double v);  // shortest round-trip decimal

}  // namespace moran::io
