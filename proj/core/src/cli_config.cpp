#include "spstgcn/cli_config.hpp"

#include <fstream>
#include <sstream>

#include "spstgcn/errors.hpp"

namespace spstgcn {

namespace {

std::string trim(const std::string& s) {
    const auto a = s.find_first_not_of(" \t");
    const auto b = s.find_last_not_of(" \t");
    return a == std::string::npos ? std::string() : s.substr(a, b - a + 1);
}

} // namespace

CliConfig CliConfig::from_text(const std::string& text, const std::set<std::string>& known_keys) {
    CliConfig cfg;
    std::istringstream is(text);
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(is, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        const std::string stripped = trim(line);
        if (stripped.empty() || stripped[0] == '#') continue;
        const std::size_t eq = stripped.find('=');
        if (eq == std::string::npos) {
            throw InvalidConfig("config line " + std::to_string(lineno) + ": expected key = value");
        }
        const std::string key = trim(stripped.substr(0, eq));
        const std::string value = trim(stripped.substr(eq + 1));
        if (key.empty()) {
            throw InvalidConfig("config line " + std::to_string(lineno) + ": empty key");
        }
        if (!known_keys.count(key)) {
            throw InvalidConfig("unknown config key '" + key + "'");
        }
        cfg.values_[key] = value;
    }
    return cfg;
}

CliConfig CliConfig::from_file(const std::filesystem::path& path,
                               const std::set<std::string>& known_keys) {
    std::ifstream is(path);
    if (!is) throw IoError("cannot open config file " + path.string());
    std::ostringstream buf;
    buf << is.rdbuf();
    try {
        return from_text(buf.str(), known_keys);
    } catch (const InvalidConfig& e) {
        throw InvalidConfig(path.string() + ": " + e.what());
    }
}

const std::string& CliConfig::get(const std::string& key) const {
    const auto it = values_.find(key);
    if (it == values_.end()) throw InvalidConfig("config key '" + key + "' not set");
    return it->second;
}

const std::set<std::string>& known_config_keys() {
    static const std::set<std::string> keys = {
        "seed",        "jobs",          "radius",      "normalize",     "per-branch",
        "epochs",      "batch-size",    "base-lr",     "warm-epochs",   "total-epochs",
        "dropout",     "target-frames", "classes",     "samples-per-class",
        "eval-samples-per-class",       "structural",  "plan",          "max-hop",
        "alpha",       "momentum",      "weight-decay"};
    return keys;
}

} // namespace spstgcn
