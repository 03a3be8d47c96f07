#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "noisepair/raster.hpp"

namespace noisepair {

// Per-scene alignment overrides carried by the manifest.
struct AlignmentOverrides {
    std::optional<double> anchor_percentile;
    std::optional<double> anchor_value;
    std::optional<bool> per_channel_alpha;
};

// One scene entry of a batch manifest: file paths per role plus options.
struct SceneManifest {
    std::string scene_id;
    std::string camera_tag;
    std::vector<std::filesystem::path> reference;
    std::vector<std::filesystem::path> clean;
    std::vector<std::filesystem::path> noisy;
    std::optional<CropRect> crop;
    AlignmentOverrides alignment;
};

// Loaded images of one scene. Groups are kept separate so averaging happens
// in the raw domain, before any gamma or alpha estimation.
struct SceneBundle {
    std::string scene_id;
    std::string camera_tag;
    std::vector<MultiImage> reference;
    std::vector<MultiImage> clean;
    std::vector<MultiImage> noisy;  // may be empty for gate-only use
    std::optional<CropRect> crop;
    AlignmentOverrides alignment;
};

inline constexpr int kManifestSchemaVersion = 1;

// Parses a batch manifest (JSON, documented in the README). Validates the
// schema version, role counts, path distinctness and crop sanity.
std::vector<SceneManifest> load_manifest(const std::filesystem::path& path);

// Reads every image of a scene, checks dimension consistency and applies the
// crop rectangle.
SceneBundle load_bundle(const SceneManifest& manifest);

}  // namespace noisepair
