#include "noisepair/scene.hpp"

#include <fstream>
#include <set>
#include <string>

#include "json.hpp"

#include "noisepair/codec.hpp"
#include "noisepair/errors.hpp"
#include "noisepair/image_ops.hpp"

namespace noisepair {

namespace {

using nlohmann::json;

std::vector<std::filesystem::path> parse_paths(const json& scene, const char* role,
                                               const std::filesystem::path& base, bool required) {
    std::vector<std::filesystem::path> paths;
    if (!scene.contains(role)) {
        if (required) {
            throw InvalidParameterError("manifest scene missing required role '" + std::string(role) + "'");
        }
        return paths;
    }
    for (const json& entry : scene.at(role)) {
        std::filesystem::path p = entry.get<std::string>();
        if (p.is_relative()) {
            p = base / p;
        }
        paths.push_back(std::move(p));
    }
    if (required && paths.empty()) {
        throw InvalidParameterError("manifest scene has empty role '" + std::string(role) + "'");
    }
    return paths;
}

}  // namespace

std::vector<SceneManifest> load_manifest(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) {
        throw IoError("cannot open manifest " + path.string());
    }
    json doc;
    try {
        in >> doc;
    } catch (const json::exception& e) {
        throw InvalidParameterError("manifest " + path.string() + " is not valid JSON: " + e.what());
    }
    if (!doc.contains("schema_version") || doc.at("schema_version").get<int>() != kManifestSchemaVersion) {
        throw InvalidParameterError("manifest " + path.string() + " must declare schema_version " +
                                    std::to_string(kManifestSchemaVersion));
    }
    const std::filesystem::path base = path.parent_path();

    std::vector<SceneManifest> scenes;
    for (const json& entry : doc.value("scenes", json::array())) {
        SceneManifest scene;
        scene.scene_id = entry.value("scene_id", "");
        if (scene.scene_id.empty()) {
            throw InvalidParameterError("manifest scene missing scene_id");
        }
        scene.camera_tag = entry.value("camera_tag", "");
        scene.reference = parse_paths(entry, "reference", base, true);
        scene.clean = parse_paths(entry, "clean", base, true);
        scene.noisy = parse_paths(entry, "noisy", base, false);

        std::set<std::string> seen;
        for (const auto* group : {&scene.reference, &scene.clean, &scene.noisy}) {
            for (const std::filesystem::path& p : *group) {
                if (!seen.insert(p.string()).second) {
                    throw InvalidParameterError("scene " + scene.scene_id + ": duplicate path " + p.string());
                }
            }
        }

        if (entry.contains("crop")) {
            const json& crop = entry.at("crop");
            CropRect rect;
            rect.x = crop.at("x").get<int>();
            rect.y = crop.at("y").get<int>();
            rect.w = crop.at("w").get<int>();
            rect.h = crop.at("h").get<int>();
            if (rect.w < 1 || rect.h < 1 || rect.x < 0 || rect.y < 0) {
                throw InvalidParameterError("scene " + scene.scene_id + ": malformed crop rectangle");
            }
            scene.crop = rect;
        }
        if (entry.contains("alignment")) {
            const json& al = entry.at("alignment");
            if (al.contains("anchor_percentile")) {
                scene.alignment.anchor_percentile = al.at("anchor_percentile").get<double>();
            }
            if (al.contains("anchor_value")) {
                scene.alignment.anchor_value = al.at("anchor_value").get<double>();
            }
            if (al.contains("per_channel_alpha")) {
                scene.alignment.per_channel_alpha = al.at("per_channel_alpha").get<bool>();
            }
        }
        scenes.push_back(std::move(scene));
    }
    return scenes;
}

SceneBundle load_bundle(const SceneManifest& manifest) {
    SceneBundle bundle;
    bundle.scene_id = manifest.scene_id;
    bundle.camera_tag = manifest.camera_tag;
    bundle.crop = manifest.crop;
    bundle.alignment = manifest.alignment;

    const auto load_group = [&manifest](const std::vector<std::filesystem::path>& paths) {
        std::vector<MultiImage> images;
        images.reserve(paths.size());
        for (const std::filesystem::path& p : paths) {
            MultiImage image = read_pnm(p);
            if (manifest.crop) {
                image = crop_image(image, *manifest.crop);
            }
            images.push_back(std::move(image));
        }
        return images;
    };
    bundle.reference = load_group(manifest.reference);
    bundle.clean = load_group(manifest.clean);
    bundle.noisy = load_group(manifest.noisy);

    const MultiImage& first = bundle.reference.front();
    for (const auto* group : {&bundle.reference, &bundle.clean, &bundle.noisy}) {
        for (const MultiImage& image : *group) {
            if (image.width() != first.width() || image.height() != first.height()) {
                throw InvalidParameterError("scene " + manifest.scene_id +
                                            ": images disagree on dimensions");
            }
        }
    }
    return bundle;
}

}  // namespace noisepair
