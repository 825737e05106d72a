#include "conslaw/config.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include "conslaw/errors.hpp"

namespace conslaw {

std::uint64_t fnv1a64(std::string_view bytes) {
    std::uint64_t h = 14695981039346656037ull;
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 1099511628211ull;
    }
    return h;
}

namespace {

std::vector<std::string> split_key(const std::string& key) {
    std::vector<std::string> parts;
    std::string part;
    std::istringstream in(key);
    while (std::getline(in, part, '.')) {
        if (part.empty()) throw ConfigError(key, "empty path component");
        parts.push_back(part);
    }
    if (parts.empty()) throw ConfigError(key, "empty key");
    return parts;
}

std::string line_column(const std::string& text, std::size_t byte) {
    std::size_t line = 1, col = 1;
    for (std::size_t i = 0; i < byte && i < text.size(); ++i) {
        if (text[i] == '\n') {
            ++line;
            col = 1;
        } else {
            ++col;
        }
    }
    return "line " + std::to_string(line) + ", column " + std::to_string(col);
}

}  // namespace

Config Config::parse(const std::string& text, const std::string& source) {
    try {
        nlohmann::json doc = nlohmann::json::parse(text);
        if (!doc.is_object()) throw ConfigError("<root>", source + ": top level must be an object");
        return Config(std::move(doc));
    } catch (const nlohmann::json::parse_error& e) {
        // byte is one past the offending character
        const std::size_t at = e.byte > 0 ? e.byte - 1 : 0;
        throw ConfigError("<root>", source + ": syntax error at " + line_column(text, at));
    }
}

Config Config::load(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("<file>", "cannot open " + path.string());
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse(buf.str(), path.string());
}

void Config::set(const std::string& assignment) {
    const auto eq = assignment.find('=');
    if (eq == std::string::npos) throw ConfigError(assignment, "override must look like key=value");
    const std::string key = assignment.substr(0, eq), raw = assignment.substr(eq + 1);
    nlohmann::json value;
    try {
        value = nlohmann::json::parse(raw);
    } catch (const nlohmann::json::parse_error&) {
        value = raw;
    }
    nlohmann::json* node = &doc_;
    const auto parts = split_key(key);
    for (std::size_t i = 0; i + 1 < parts.size(); ++i) {
        nlohmann::json& next = (*node)[parts[i]];
        if (next.is_null()) next = nlohmann::json::object();
        if (!next.is_object()) throw ConfigError(key, "'" + parts[i] + "' is not an object");
        node = &next;
    }
    (*node)[parts.back()] = std::move(value);
}

bool Config::has(const std::string& key) const {
    const nlohmann::json* node = &doc_;
    for (const std::string& p : split_key(key)) {
        if (!node->is_object() || !node->contains(p)) return false;
        node = &(*node)[p];
    }
    return true;
}

const nlohmann::json& Config::at(const std::string& key) const {
    const nlohmann::json* node = &doc_;
    for (const std::string& p : split_key(key)) {
        if (!node->is_object() || !node->contains(p)) throw ConfigError(key, "missing");
        node = &(*node)[p];
    }
    return *node;
}

double Config::number(const std::string& key) const {
    const nlohmann::json& v = at(key);
    if (!v.is_number()) throw ConfigError(key, "must be a number");
    const double d = v.get<double>();
    if (!std::isfinite(d)) throw ConfigError(key, "must be finite");
    return d;
}

double Config::positive(const std::string& key) const {
    const double d = number(key);
    if (!(d > 0.0)) throw ConfigError(key, "must be positive");
    return d;
}

std::size_t Config::count(const std::string& key) const {
    const nlohmann::json& v = at(key);
    if (!v.is_number_integer() || v.get<long long>() < 1) throw ConfigError(key, "must be a positive integer");
    return v.get<std::size_t>();
}

bool Config::flag(const std::string& key) const {
    const nlohmann::json& v = at(key);
    if (!v.is_boolean()) throw ConfigError(key, "must be true or false");
    return v.get<bool>();
}

std::string Config::text(const std::string& key) const {
    const nlohmann::json& v = at(key);
    if (!v.is_string()) throw ConfigError(key, "must be a string");
    return v.get<std::string>();
}

std::uint64_t Config::seed() const {
    const nlohmann::json& v = at("seed");
    if (!v.is_number_integer() || (!v.is_number_unsigned() && v.get<std::int64_t>() < 0))
        throw ConfigError("seed", "must be a non-negative integer");
    return v.get<std::uint64_t>();
}

ConvexFunction Config::function(const std::string& key) const {
    try {
        return ConvexFunction::from_json(at(key));
    } catch (const ConfigError& e) {
        if (e.field().rfind(key, 0) == 0) throw;
        throw ConfigError(key + "." + e.field(), e.what());
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(key, e.what());
    } catch (const DomainError& e) {
        throw ConfigError(key, e.what());
    }
}

LevySpec Config::levy(const std::string& key) const {
    try {
        return LevySpec::from_json(at(key));
    } catch (const ConfigError& e) {
        if (e.field().rfind(key, 0) == 0) throw;
        throw ConfigError(key + "." + e.field(), e.what());
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(key, e.what());
    } catch (const DomainError& e) {
        throw ConfigError(key, e.what());
    }
}

McParams Config::mc(std::size_t samples, std::size_t steps, std::uint64_t seed) const {
    McParams p;
    p.n_samples = samples;
    p.n_steps = steps;
    p.seed = seed;
    return p;
}

QuadParams Config::quad() const {
    QuadParams q;
    q.panels = static_cast<int>(count("quad.panels"));
    q.order = static_cast<int>(count("quad.order"));
    q.log_cut = positive("quad.log_cut");
    q.rel_tol = positive("quad.rel_tol");
    q.control_variates = flag("quad.control_variates");
    return q;
}

}  // namespace conslaw
