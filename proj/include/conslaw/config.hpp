#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "conslaw/excursion.hpp"
#include "conslaw/hamiltonian.hpp"
#include "conslaw/paths.hpp"

namespace conslaw {

// FNV-1a, 64 bit.
std::uint64_t fnv1a64(std::string_view bytes);

// JSON configuration with dotted-path access. Every accessor throws
// ConfigError naming the full dotted field when it is missing or malformed.
class Config {
public:
    Config() = default;
    explicit Config(nlohmann::json doc) : doc_(std::move(doc)) {}

    // Parse errors are reported with line and column.
    static Config load(const std::filesystem::path& path);
    static Config parse(const std::string& text, const std::string& source = "config");

    // key=value with a dotted key; the value is read as JSON when it parses, as a string otherwise.
    void set(const std::string& assignment);

    bool has(const std::string& key) const;
    const nlohmann::json& at(const std::string& key) const;
    double number(const std::string& key) const;
    double positive(const std::string& key) const;
    std::size_t count(const std::string& key) const;  // integer >= 1
    bool flag(const std::string& key) const;
    std::string text(const std::string& key) const;
    std::uint64_t seed() const;
    ConvexFunction function(const std::string& key) const;
    LevySpec levy(const std::string& key) const;
    McParams mc(std::size_t samples, std::size_t steps, std::uint64_t seed) const;
    QuadParams quad() const;

    const nlohmann::json& doc() const { return doc_; }
    // Hash of the canonical (sorted-key, compact) dump.
    std::uint64_t hash() const { return fnv1a64(doc_.dump()); }

private:
    nlohmann::json doc_ = nlohmann::json::object();
};

}  // namespace conslaw
