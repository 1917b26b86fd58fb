#include "quadlattice/io.hpp"

#include <openssl/evp.h>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <ctime>
#include <fstream>
#include <sstream>

namespace ql {

namespace {

double number(const nlohmann::json& v, const std::string& key) {
    if (!v.is_number()) throw ConfigError(key, key + ": expected a number");
    return v.get<double>();
}

}  // namespace

CrystalConfig parse_config(const nlohmann::json& doc) {
    if (!doc.is_object()) throw ConfigError("<root>", "configuration must be a JSON object");
    CrystalConfig c;
    for (const auto& [key, v] : doc.items()) {
        if (key == "contrast") c.contrast = number(v, key);
        else if (key == "radius") c.radius = number(v, key);
        else if (key == "center_x") c.center[0] = number(v, key);
        else if (key == "center_y") c.center[1] = number(v, key);
        else if (key == "delta") c.delta = number(v, key);
        else if (key == "gap_fraction") c.gap_fraction = number(v, key);
        else if (key == "contour_offset") c.contour_offset = number(v, key);
        else if (key == "reg_epsilon") c.reg_epsilon = number(v, key);
        else if (key == "cutoff") {
            if (!v.is_number_integer()) throw ConfigError(key, "cutoff: expected an integer");
            c.cutoff = v.get<int>();
        } else {
            throw ConfigError(key, "unknown configuration key '" + key + "'");
        }
    }
    c.validate();
    return c;
}

CrystalConfig load_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("--config", "cannot open config file " + path.string());
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(in);
    } catch (const nlohmann::json::parse_error& e) {
        throw ConfigError("--config", path.string() + ": " + e.what());
    }
    return parse_config(doc);
}

nlohmann::json config_json(const CrystalConfig& c) {
    return {{"contrast", c.contrast},         {"radius", c.radius},
            {"center_x", c.center[0]},        {"center_y", c.center[1]},
            {"delta", c.delta},               {"cutoff", c.cutoff},
            {"gap_fraction", c.gap_fraction}, {"contour_offset", c.contour_offset},
            {"reg_epsilon", c.reg_epsilon}};
}

std::string fmt(double x) {
    if (std::isnan(x)) return "nan";
    if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

Csv::Csv(std::vector<std::string> columns) : columns_(std::move(columns)) {}

void Csv::comment(const std::string& line) { comments_.push_back(line); }

Csv& Csv::row() {
    rows_.emplace_back();
    return *this;
}

Csv& Csv::operator<<(double x) {
    rows_.back().push_back(fmt(x));
    return *this;
}

Csv& Csv::operator<<(int x) {
    rows_.back().push_back(std::to_string(x));
    return *this;
}

Csv& Csv::operator<<(const std::string& s) {
    rows_.back().push_back(s);
    return *this;
}

std::string Csv::str() const {
    std::ostringstream os;
    for (const auto& c : comments_) os << "# " << c << '\n';
    for (std::size_t i = 0; i < columns_.size(); ++i) os << (i ? "," : "") << columns_[i];
    os << '\n';
    for (const auto& r : rows_) {
        if (r.size() != columns_.size()) throw std::logic_error("csv row width does not match the header");
        for (std::size_t i = 0; i < r.size(); ++i) os << (i ? "," : "") << r[i];
        os << '\n';
    }
    return os.str();
}

std::string sha256_hex(const std::string& bytes) {
    unsigned char md[EVP_MAX_MD_SIZE];
    unsigned int len = 0;
    EVP_MD_CTX* ctx = EVP_MD_CTX_new();
    if (!ctx || EVP_DigestInit_ex(ctx, EVP_sha256(), nullptr) != 1 ||
        EVP_DigestUpdate(ctx, bytes.data(), bytes.size()) != 1 || EVP_DigestFinal_ex(ctx, md, &len) != 1) {
        EVP_MD_CTX_free(ctx);
        throw std::runtime_error("sha256 failed");
    }
    EVP_MD_CTX_free(ctx);
    static const char* hex = "0123456789abcdef";
    std::string out;
    for (unsigned i = 0; i < len; ++i) out += hex[md[i] >> 4], out += hex[md[i] & 15];
    return out;
}

std::string utc_now() {
    const std::time_t t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm tm{};
    gmtime_r(&t, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

RunManifest::RunManifest(std::filesystem::path dir, std::string command, const CrystalConfig& cfg)
    : dir_(std::move(dir)), command_(std::move(command)), config_(config_json(cfg)), started_(utc_now()) {
    std::filesystem::create_directories(dir_);
}

void RunManifest::write(const std::string& name, const std::string& content) {
    const auto path = dir_ / name;
    std::ofstream out(path, std::ios::binary);
    out << content;
    if (!out) throw std::runtime_error("cannot write " + path.string());
    outputs_.push_back({name, sha256_hex(content), content.size()});
}

void RunManifest::finish(int exit_status) {
    nlohmann::json files = nlohmann::json::array();
    for (const auto& f : outputs_) files.push_back({{"file", f.name}, {"sha256", f.sha256}, {"bytes", f.bytes}});
    nlohmann::json m = {{"command", command_},
                        {"config", config_},
                        {"versions", {{"quadlattice", version}, {"crystal-model", version}, {"bloch-solver", version},
                                      {"degeneracy-analysis", version}, {"perturbation", version}, {"greens", version},
                                      {"interface-solver", version}, {"cli-io", version}}},
                        {"started", started_},
                        {"finished", utc_now()},
                        {"exit_status", exit_status},
                        {"outputs", files}};
    if (!extra_.empty()) m["run"] = extra_;
    std::ofstream out(dir_ / "manifest.json");
    out << m.dump(2) << '\n';
}

}  // namespace ql
