#pragma once

#include "quadlattice/crystal.hpp"

#include <json.hpp>

#include <filesystem>
#include <string>
#include <vector>

namespace ql {

inline constexpr const char* version = "0.1.0";

// flat JSON object; unknown keys and wrong types throw ConfigError naming the key
CrystalConfig parse_config(const nlohmann::json& doc);
CrystalConfig load_config(const std::filesystem::path& path);
nlohmann::json config_json(const CrystalConfig& cfg);

// %.17g, so a double survives a text round trip
std::string fmt(double x);

class Csv {
public:
    explicit Csv(std::vector<std::string> columns);
    void comment(const std::string& line);  // "# ..." lines before the header
    Csv& row();
    Csv& operator<<(double x);
    Csv& operator<<(int x);
    Csv& operator<<(const std::string& s);
    std::string str() const;
    std::size_t rows() const { return rows_.size(); }

private:
    std::vector<std::string> columns_;
    std::vector<std::string> comments_;
    std::vector<std::vector<std::string>> rows_;
};

std::string sha256_hex(const std::string& bytes);

struct OutputFile {
    std::string name;
    std::string sha256;
    std::size_t bytes = 0;
};

// output directory plus the manifest.json index of everything written into it
class RunManifest {
public:
    RunManifest(std::filesystem::path dir, std::string command, const CrystalConfig& cfg);
    void write(const std::string& name, const std::string& content);
    void note(const std::string& key, nlohmann::json value) { extra_[key] = std::move(value); }
    const std::vector<OutputFile>& outputs() const { return outputs_; }
    const std::filesystem::path& dir() const { return dir_; }
    // writes manifest.json; call once at the end
    void finish(int exit_status);

private:
    std::filesystem::path dir_;
    std::string command_;
    nlohmann::json config_;
    nlohmann::json extra_ = nlohmann::json::object();
    std::string started_;
    std::vector<OutputFile> outputs_;
};

std::string utc_now();

}  // namespace ql
