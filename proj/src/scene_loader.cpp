#include <charconv>
#include <fstream>
#include <map>
#include <sstream>

#include <nlohmann/json.hpp>

#include "dhr/error.hpp"
#include "dhr/scene.hpp"

namespace dhr {

namespace {

using nlohmann::json;

[[noreturn]] void fail(const std::filesystem::path& path, std::size_t line, const std::string& what)
{
    throw LoadError(path.string() + ":" + std::to_string(line) + ": " + what);
}

double parse_double(std::string_view token, const std::filesystem::path& path, std::size_t line)
{
    double value = 0.0;
    const auto [ptr, ec] = std::from_chars(token.data(), token.data() + token.size(), value);
    if (ec != std::errc{} || ptr != token.data() + token.size()) fail(path, line, "bad number '" + std::string(token) + "'");
    return value;
}

long parse_index(std::string_view token, const std::filesystem::path& path, std::size_t line)
{
    long value = 0;
    const auto [ptr, ec] = std::from_chars(token.data(), token.data() + token.size(), value);
    if (ec != std::errc{} || ptr != token.data() + token.size() || value == 0) {
        fail(path, line, "bad index '" + std::string(token) + "'");
    }
    return value;
}

// OBJ indices are 1-based; negative values count back from the end.
std::size_t resolve(long idx, std::size_t count, const std::filesystem::path& path, std::size_t line)
{
    const long resolved = idx > 0 ? idx - 1 : static_cast<long>(count) + idx;
    if (resolved < 0 || static_cast<std::size_t>(resolved) >= count) fail(path, line, "index out of range");
    return static_cast<std::size_t>(resolved);
}

struct FaceVertex {
    std::size_t v = 0;
    std::optional<std::size_t> vn;
};

Vec3 read_vec3(const json& j, const std::string& key, const std::filesystem::path& path)
{
    if (!j.is_array() || j.size() != 3) throw LoadError(path.string() + ": '" + key + "' must be a 3-element array");
    return {j[0].get<double>(), j[1].get<double>(), j[2].get<double>()};
}

Rgb read_rgb(const json& j, const std::string& key, const std::filesystem::path& path)
{
    const Vec3 v = read_vec3(j, key, path);
    return {v.x, v.y, v.z};
}

} // namespace

Scene load_scene(const std::filesystem::path& mesh_path, const std::filesystem::path& lights_path,
                 SceneLoadOptions options)
{
    // Lights, materials and lens first so usemtl names can be resolved while reading the mesh.
    std::ifstream cfg_in(lights_path);
    if (!cfg_in) throw LoadError(lights_path.string() + ": cannot open");
    json cfg;
    try {
        cfg = json::parse(cfg_in);
    } catch (const json::exception& e) {
        throw LoadError(lights_path.string() + ": " + e.what());
    }

    std::vector<Rgb> materials;
    std::map<std::string, std::uint32_t> material_ids;
    std::vector<PointLight> lights;
    Rgb background{0.0, 0.0, 0.0};
    Lens lens;
    try {
        materials.push_back(cfg.contains("default_albedo") ? read_rgb(cfg["default_albedo"], "default_albedo", lights_path)
                                                           : Rgb{0.8, 0.8, 0.8});
        if (cfg.contains("materials")) {
            for (const auto& [name, value] : cfg["materials"].items()) {
                material_ids[name] = static_cast<std::uint32_t>(materials.size());
                materials.push_back(read_rgb(value, "materials." + name, lights_path));
            }
        }
        if (cfg.contains("background")) background = read_rgb(cfg["background"], "background", lights_path);
        if (cfg.contains("lights")) {
            for (const auto& l : cfg["lights"]) {
                lights.push_back({read_vec3(l.at("position"), "position", lights_path),
                                  read_rgb(l.at("intensity"), "intensity", lights_path)});
            }
        }
        if (cfg.contains("camera")) {
            const auto& cam = cfg["camera"];
            if (cam.contains("vertical_fov_deg")) {
                lens.vertical_fov = cam["vertical_fov_deg"].get<double>() * 3.14159265358979323846 / 180.0;
            }
            lens.near_plane = cam.value("near", lens.near_plane);
            lens.far_plane = cam.value("far", lens.far_plane);
        }
    } catch (const json::exception& e) {
        throw LoadError(lights_path.string() + ": " + e.what());
    }
    if (lights.size() > options.max_lights) {
        throw ConfigError(lights_path.string() + ": " + std::to_string(lights.size()) + " lights exceed the limit of " +
                          std::to_string(options.max_lights));
    }

    std::ifstream in(mesh_path);
    if (!in) throw LoadError(mesh_path.string() + ": cannot open");

    std::vector<Vec3> positions;
    std::vector<Vec3> normals;
    std::vector<Triangle> triangles;
    std::uint32_t current_material = 0;
    std::string raw;
    std::size_t line_no = 0;
    while (std::getline(in, raw)) {
        ++line_no;
        if (const auto hash = raw.find('#'); hash != std::string::npos) raw.erase(hash);
        std::istringstream ls(raw);
        std::string tag;
        if (!(ls >> tag)) continue;
        std::vector<std::string> tokens;
        for (std::string t; ls >> t;) tokens.push_back(t);

        if (tag == "v" || tag == "vn") {
            if (tokens.size() < 3) fail(mesh_path, line_no, tag + " needs three components");
            const Vec3 p{parse_double(tokens[0], mesh_path, line_no), parse_double(tokens[1], mesh_path, line_no),
                         parse_double(tokens[2], mesh_path, line_no)};
            if (tag == "v") {
                positions.push_back(p);
            } else {
                const double len = length(p);
                if (!(len > 0.0)) fail(mesh_path, line_no, "zero-length normal");
                normals.push_back(p / len);
            }
        } else if (tag == "f") {
            if (tokens.size() < 3) fail(mesh_path, line_no, "face needs at least three vertices");
            std::vector<FaceVertex> face;
            for (const auto& tok : tokens) {
                FaceVertex fv;
                const auto s1 = tok.find('/');
                fv.v = resolve(parse_index(std::string_view(tok).substr(0, s1), mesh_path, line_no), positions.size(),
                               mesh_path, line_no);
                if (s1 != std::string::npos) {
                    const auto s2 = tok.find('/', s1 + 1);
                    if (s2 != std::string::npos && s2 + 1 < tok.size()) {
                        fv.vn = resolve(parse_index(std::string_view(tok).substr(s2 + 1), mesh_path, line_no),
                                        normals.size(), mesh_path, line_no);
                    }
                }
                face.push_back(fv);
            }
            // fan triangulation
            for (std::size_t k = 1; k + 1 < face.size(); ++k) {
                Triangle t;
                t.v0 = positions[face[0].v];
                t.v1 = positions[face[k].v];
                t.v2 = positions[face[k + 1].v];
                t.material = current_material;
                const Vec3 n = cross(t.v1 - t.v0, t.v2 - t.v0);
                const double area2 = length(n);
                // zero-area triangles can never be hit
                if (!(area2 > 0.0)) continue;
                const Vec3 face_n = n / area2;
                t.n0 = face[0].vn ? normals[*face[0].vn] : face_n;
                t.n1 = face[k].vn ? normals[*face[k].vn] : face_n;
                t.n2 = face[k + 1].vn ? normals[*face[k + 1].vn] : face_n;
                triangles.push_back(t);
            }
        } else if (tag == "usemtl") {
            if (tokens.empty()) fail(mesh_path, line_no, "usemtl needs a name");
            const auto it = material_ids.find(tokens[0]);
            current_material = it == material_ids.end() ? 0u : it->second;
        }
        // o, g, s, vt, mtllib and anything else carry nothing this renderer uses
    }

    return Scene(std::move(triangles), std::move(materials), std::move(lights), background, lens, options);
}

} // namespace dhr
