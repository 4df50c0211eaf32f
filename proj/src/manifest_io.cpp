#include "flowsynth/manifest_io.hpp"

#include <fstream>
#include <sstream>

#include <json.hpp>

namespace flowsynth {
namespace fs = std::filesystem;
using json = nlohmann::ordered_json;

namespace {

std::string relative_to(const fs::path &p, const fs::path &root) {
    const fs::path rel = p.lexically_relative(root);
    return rel.empty() ? p.generic_string() : rel.generic_string();
}

fs::path resolve(const std::string &stored, const fs::path &root) {
    const fs::path p(stored);
    return (p.is_absolute() ? p : root / p).lexically_normal();
}

json optional_path(const std::optional<fs::path> &p, const fs::path &root) {
    return p ? json(relative_to(*p, root)) : json(nullptr);
}

json record_to_json(const SampleRecord &r, const fs::path &root) {
    json j;
    j["sample_id"] = r.sample_id();
    j["image"] = relative_to(r.image(), root);
    j["depth"] = optional_path(r.depth(), root);
    j["flow_flo"] = optional_path(r.flow_flo(), root);
    j["flow_png"] = optional_path(r.flow_png(), root);
    j["mask"] = relative_to(r.mask(), root);
    j["source"] = to_string(r.source());
    j["context_id"] = r.context_id();
    if (const auto &p = r.params()) {
        j["params"] = {{"r_x", p->x().reverse ? 1 : 0}, {"s_x", p->x().shift}, {"alpha_x", p->x().scale},
                       {"r_y", p->y().reverse ? 1 : 0}, {"s_y", p->y().shift}, {"alpha_y", p->y().scale}};
        j["sample_seed"] = p->sample_seed();
    } else {
        j["params"] = nullptr;
        j["sample_seed"] = nullptr;
    }
    return j;
}

std::optional<fs::path> optional_path_from(const json &j, const char *key, const fs::path &root) {
    if (!j.contains(key) || j.at(key).is_null()) return std::nullopt;
    return resolve(j.at(key).get<std::string>(), root);
}

SampleRecord record_from_json(const json &j, const fs::path &root) {
    SampleRecordFields f;
    f.sample_id = j.at("sample_id").get<std::string>();
    f.image = resolve(j.at("image").get<std::string>(), root);
    f.depth = optional_path_from(j, "depth", root);
    f.flow_flo = optional_path_from(j, "flow_flo", root);
    f.flow_png = optional_path_from(j, "flow_png", root);
    f.mask = resolve(j.at("mask").get<std::string>(), root);
    f.source = sample_source_from_string(j.at("source").get<std::string>());
    f.context_id = j.at("context_id").get<std::string>();
    if (j.contains("params") && !j.at("params").is_null()) {
        const json &p = j.at("params");
        auto bit = [&](const char *key) {
            const int v = p.at(key).get<int>();
            if (v != 0 && v != 1) throw FormatError(std::string(key) + " must be 0 or 1");
            return v == 1;
        };
        const AxisParams x{bit("r_x"), p.at("s_x").get<float>(), p.at("alpha_x").get<float>()};
        const AxisParams y{bit("r_y"), p.at("s_y").get<float>(), p.at("alpha_y").get<float>()};
        f.params = SynthParams(x, y, j.at("sample_seed").get<std::uint64_t>());
    }
    return SampleRecord(std::move(f));
}

} // namespace

std::string manifest_to_jsonl(const Manifest &manifest, const fs::path &root) {
    const fs::path base = fs::absolute(root).lexically_normal();
    std::string out;
    for (const auto &r : manifest.records()) {
        out += record_to_json(r, base).dump();
        out += '\n';
    }
    return out;
}

Manifest manifest_from_jsonl(const std::string &text, const fs::path &root, ManifestMeta meta) {
    const fs::path base = fs::absolute(root).lexically_normal();
    std::vector<SampleRecord> records;
    std::istringstream in(text);
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        try {
            records.push_back(record_from_json(json::parse(line), base));
        } catch (const json::exception &e) {
            throw FormatError("manifest line " + std::to_string(line_no) + ": " + e.what());
        } catch (const InvariantError &e) {
            throw FormatError("manifest line " + std::to_string(line_no) + ": " + e.what());
        }
    }
    return Manifest(std::move(records), std::move(meta));
}

fs::path manifest_meta_path(const fs::path &manifest_path) {
    fs::path meta = manifest_path;
    meta.replace_extension(".meta.json");
    return meta;
}

void write_manifest(const Manifest &manifest, const fs::path &path) {
    const fs::path abs = fs::absolute(path).lexically_normal();
    {
        std::ofstream out(abs, std::ios::binary | std::ios::trunc);
        if (!out) throw IoError("cannot write manifest " + abs.string());
        out << manifest_to_jsonl(manifest, abs.parent_path());
        if (!out) throw IoError("short write on " + abs.string());
    }
    json meta;
    meta["global_seed"] = manifest.meta().global_seed;
    meta["created_at"] = manifest.meta().created_at;
    meta["tool_version"] = manifest.meta().tool_version;
    meta["record_count"] = manifest.size();
    std::ofstream out(manifest_meta_path(abs), std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot write manifest metadata next to " + abs.string());
    out << meta.dump(2) << '\n';
}

Manifest read_manifest(const fs::path &path) {
    const fs::path abs = fs::absolute(path).lexically_normal();
    std::ifstream in(abs, std::ios::binary);
    if (!in) throw IoError("cannot read manifest " + abs.string());
    std::ostringstream text;
    text << in.rdbuf();

    ManifestMeta meta;
    meta.tool_version.clear();
    if (std::ifstream meta_in(manifest_meta_path(abs)); meta_in) {
        try {
            const json j = json::parse(meta_in);
            meta.global_seed = j.value("global_seed", std::uint64_t{0});
            meta.created_at = j.value("created_at", std::string{});
            meta.tool_version = j.value("tool_version", std::string{});
        } catch (const json::exception &e) {
            throw FormatError(manifest_meta_path(abs).string() + ": " + e.what());
        }
    }
    return manifest_from_jsonl(text.str(), abs.parent_path(), std::move(meta));
}

} // namespace flowsynth
