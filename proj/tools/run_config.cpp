#include "run_config.hpp"

#include <cstdlib>
#include <fstream>

#include "flowsynth/errors.hpp"

namespace flowsynth::cli {

RunConfig default_config() {
    RunConfig config;
    if (const char *env = std::getenv(kSeedEnvVar); env && *env) {
        char *end = nullptr;
        const unsigned long long v = std::strtoull(env, &end, 10);
        if (end == env || *end != '\0') {
            throw InputError(std::string(kSeedEnvVar) + " must be an unsigned integer, got '" + env + "'");
        }
        config.seed = v;
    }
    return config;
}

nlohmann::ordered_json to_json(const RunConfig &c) {
    return {{"subcommand", c.subcommand},
            {"images", c.images},
            {"depth", c.depth},
            {"masks", c.masks},
            {"video_root", c.video_root},
            {"root", c.root},
            {"manifest", c.manifest},
            {"manifests", c.manifests},
            {"real", c.real},
            {"synthetic", c.synthetic},
            {"predictions", c.predictions},
            {"out", c.out},
            {"seed", c.seed},
            {"alpha_min", c.alpha_min},
            {"workers", c.workers},
            {"ratio", c.ratio},
            {"format", c.format},
            {"depth_format", c.depth_format},
            {"length", c.length},
            {"ids", c.ids},
            {"count", c.count},
            {"merge_objects", c.merge_objects},
            {"csv", c.csv},
            {"json", c.json}};
}

namespace {

template <typename T>
void take(const nlohmann::json &j, const char *key, T &field) {
    if (j.contains(key)) field = j.at(key).get<T>();
}

} // namespace

RunConfig apply_json(RunConfig c, const nlohmann::json &j) {
    if (!j.is_object()) throw InputError("config must be a JSON object");
    const auto known = to_json(c);
    for (const auto &[key, value] : j.items()) {
        if (!known.contains(key)) throw InputError("unknown config key '" + key + "'");
    }
    try {
        take(j, "subcommand", c.subcommand);
        take(j, "images", c.images);
        take(j, "depth", c.depth);
        take(j, "masks", c.masks);
        take(j, "video_root", c.video_root);
        take(j, "root", c.root);
        take(j, "manifest", c.manifest);
        take(j, "manifests", c.manifests);
        take(j, "real", c.real);
        take(j, "synthetic", c.synthetic);
        take(j, "predictions", c.predictions);
        take(j, "out", c.out);
        take(j, "seed", c.seed);
        take(j, "alpha_min", c.alpha_min);
        take(j, "workers", c.workers);
        take(j, "ratio", c.ratio);
        take(j, "format", c.format);
        take(j, "depth_format", c.depth_format);
        take(j, "length", c.length);
        take(j, "ids", c.ids);
        take(j, "count", c.count);
        take(j, "merge_objects", c.merge_objects);
        take(j, "csv", c.csv);
        take(j, "json", c.json);
    } catch (const nlohmann::json::exception &e) {
        throw InputError(std::string("bad config value: ") + e.what());
    }
    return c;
}

RunConfig load_config_file(RunConfig base, const std::filesystem::path &path) {
    std::ifstream in(path);
    if (!in) throw InputError("cannot read config file " + path.string());
    try {
        return apply_json(std::move(base), nlohmann::json::parse(in));
    } catch (const nlohmann::json::parse_error &e) {
        throw InputError(path.string() + ": " + e.what());
    }
}

} // namespace flowsynth::cli
