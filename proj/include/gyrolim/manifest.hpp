#pragma once

#include <chrono>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

namespace gyrolim {

inline constexpr const char* kVersion = "gyrolim 0.1.0";

// FNV-1a 64-bit over the file bytes, hex-encoded
inline std::string file_digest(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot digest missing file: " + path.string());
    std::uint64_t h = 0xcbf29ce484222325ull;
    char buf[65536];
    while (in.read(buf, sizeof buf) || in.gcount() > 0) {
        const std::streamsize n = in.gcount();
        for (std::streamsize i = 0; i < n; ++i) {
            h ^= static_cast<unsigned char>(buf[i]);
            h *= 0x100000001b3ull;
        }
    }
    char out[17];
    std::snprintf(out, sizeof out, "%016llx", static_cast<unsigned long long>(h));
    return out;
}

struct RunManifest {
    std::map<std::string, std::string> config;
    std::string version = kVersion;
    std::string started;
    std::string finished;
    std::string status; // ok | failed | collision | ...
    std::vector<std::pair<std::string, std::string>> files; // name -> digest

    static std::string now_iso() {
        const auto t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
        char buf[32];
        std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&t));
        return buf;
    }

    // collect digests for every regular file under dir (except the manifest
    // itself) and write run_manifest.json atomically
    void finalize(const std::filesystem::path& dir) {
        namespace fs = std::filesystem;
        files.clear();
        std::vector<fs::path> paths;
        for (const auto& entry : fs::recursive_directory_iterator(dir))
            if (entry.is_regular_file() && entry.path().filename() != "run_manifest.json" &&
                entry.path().extension() != ".tmp")
                paths.push_back(entry.path());
        std::sort(paths.begin(), paths.end());
        for (const auto& p : paths)
            files.emplace_back(fs::relative(p, dir).generic_string(), file_digest(p));
        finished = now_iso();

        nlohmann::json j;
        j["version"] = version;
        j["config"] = config;
        j["started"] = started;
        j["finished"] = finished;
        j["status"] = status;
        nlohmann::json jf = nlohmann::json::array();
        for (const auto& [name, digest] : files) jf.push_back({{"name", name}, {"digest", digest}});
        j["files"] = jf;

        const fs::path target = dir / "run_manifest.json";
        const fs::path tmp = dir / "run_manifest.json.tmp";
        {
            std::ofstream out(tmp);
            if (!out) throw std::runtime_error("cannot write manifest: " + tmp.string());
            out << j.dump(2) << "\n";
        }
        fs::rename(tmp, target);
    }
};

// true when every digest recorded in dir/run_manifest.json matches the files
inline bool verify_manifest(const std::filesystem::path& dir) {
    std::ifstream in(dir / "run_manifest.json");
    if (!in) return false;
    nlohmann::json j;
    in >> j;
    for (const auto& f : j.at("files")) {
        const std::string name = f.at("name");
        const std::string digest = f.at("digest");
        if (file_digest(dir / name) != digest) return false;
    }
    return true;
}

} // namespace gyrolim
