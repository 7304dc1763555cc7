// output.hpp: Run artifacts: buffered output files, atomic writes and the run manifest.

#pragma once

#include <json.hpp>

#include <filesystem>
#include <map>
#include <string>

namespace ringkam::cli {

using nlohmann::json;

std::string sha256_hex(const std::string& bytes);
std::string read_file(const std::filesystem::path& path);

// Writes to a sibling temporary file and renames it into place.
void atomic_write(const std::filesystem::path& path, const std::string& bytes);

// Products are held in memory and written only when the run succeeds.
class OutputSet {
public:
    void add(const std::string& name, std::string bytes) { files_[name] = std::move(bytes); }
    void add_json(const std::string& name, const json& j) { add(name, j.dump(2) + "\n"); }
    const std::map<std::string, std::string>& files() const noexcept { return files_; }

    // Writes every file, then manifest.json with their digests.
    void commit(const std::filesystem::path& dir, json manifest) const;

private:
    std::map<std::string, std::string> files_;
};

std::string utc_timestamp();

}  // namespace ringkam::cli
