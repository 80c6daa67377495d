#pragma once

#include <array>
#include <string>
#include <vector>

#include <Eigen/Core>
#include <json.hpp>

namespace aniso {

// Write to a sibling temp file and rename over the target.
void write_file_atomic(const std::string& path, const std::string& contents);
std::string read_file(const std::string& path);

// 17 significant digits, round-trip exact
std::string fmt17(double x);

// Pretty JSON with sorted keys and every float printed by fmt17, so identical
// values always produce identical bytes.
std::string dump_json(const nlohmann::json& j);

std::string obj_string(const std::vector<Eigen::Vector3d>& vertices,
                       const std::vector<std::array<int, 3>>& faces);

struct ObjData {
    std::vector<Eigen::Vector3d> vertices;
    std::vector<std::array<int, 3>> faces;
};
// v/f records only; polygons are fan-triangulated, texture/normal indices ignored
ObjData parse_obj(const std::string& text);

} // namespace aniso
