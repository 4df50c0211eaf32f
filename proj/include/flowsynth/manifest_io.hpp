#pragma once

#include <filesystem>
#include <string>

#include "flowsynth/dataset.hpp"

namespace flowsynth {

// Manifests are JSON lines, one record per line in sample_id order:
//   {"sample_id", "image", "depth", "flow_flo", "flow_png", "mask", "source",
//    "context_id", "params": {r_x, s_x, alpha_x, r_y, s_y, alpha_y} | null,
//    "sample_seed": uint64 | null}
// Paths are written relative to the manifest's directory. Run metadata
// (global seed, creation time, tool version) lives in a sidecar
// "<stem>.meta.json" so the record file stays byte-reproducible.

std::string manifest_to_jsonl(const Manifest &manifest, const std::filesystem::path &root);
Manifest manifest_from_jsonl(const std::string &text, const std::filesystem::path &root, ManifestMeta meta = {});

std::filesystem::path manifest_meta_path(const std::filesystem::path &manifest_path);

void write_manifest(const Manifest &manifest, const std::filesystem::path &path);
Manifest read_manifest(const std::filesystem::path &path);

} // namespace flowsynth
