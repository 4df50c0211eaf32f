#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

namespace flowsynth::cli {

/// Environment variable consulted for the default --seed.
inline constexpr const char *kSeedEnvVar = "FLOWSYNTH_SEED";

/// Effective settings of one CLI run. Precedence when assembling it:
/// command-line flags, then --config file, then defaults (the seed default
/// may come from FLOWSYNTH_SEED).
struct RunConfig {
    std::string subcommand;

    std::string images;
    std::string depth;
    std::string masks;
    std::string video_root;
    std::string root;
    std::string manifest;
    std::vector<std::string> manifests;
    std::string real;
    std::string synthetic;
    std::string predictions;
    std::string out;

    std::uint64_t seed = 0;
    float alpha_min = 0.0f;
    unsigned workers = 0; ///< 0 = available parallelism
    std::string ratio = "1:3";
    std::string format = "both";       ///< flo | png | both
    std::string depth_format = "detect"; ///< detect | pfm | png8 | png16
    std::size_t length = 0;             ///< sample stream length, 0 = combined record count
    std::vector<std::string> ids;
    std::size_t count = 1;
    bool merge_objects = false;
    bool csv = false;
    bool json = false;

    bool operator==(const RunConfig &) const = default;
};

/// Defaults, with the seed taken from FLOWSYNTH_SEED when it is set.
RunConfig default_config();

nlohmann::ordered_json to_json(const RunConfig &config);
/// Keys absent from `j` keep the value already in `base`; unknown keys are rejected.
RunConfig apply_json(RunConfig base, const nlohmann::json &j);
RunConfig load_config_file(RunConfig base, const std::filesystem::path &path);

} // namespace flowsynth::cli
