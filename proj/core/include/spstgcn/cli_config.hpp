#pragma once

#include <filesystem>
#include <map>
#include <set>
#include <string>

namespace spstgcn {

// Flat `key = value` configuration file. Keys must come from the registry of
// known option names; an unknown key is rejected with its name in the error.
// Command-line flags override file values.
class CliConfig {
public:
    CliConfig() = default;

    static CliConfig from_file(const std::filesystem::path& path,
                               const std::set<std::string>& known_keys);
    static CliConfig from_text(const std::string& text, const std::set<std::string>& known_keys);

    bool has(const std::string& key) const { return values_.count(key) != 0; }
    const std::string& get(const std::string& key) const;
    const std::map<std::string, std::string>& values() const { return values_; }

private:
    std::map<std::string, std::string> values_;
};

// The registry of every key any subcommand understands.
const std::set<std::string>& known_config_keys();

} // namespace spstgcn
