#pragma once

#include <cctype>
#include <cstdint>
#include <cstdlib>
#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace onet::harness {

// Raised for malformed configs and unknown experiments or keys; the CLI maps
// it to exit code 2.
struct ConfigError : std::runtime_error {
    explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

struct ExperimentConfig {
    std::string experiment;
    std::string output_dir = "out";
    std::vector<std::uint64_t> seeds;
    std::map<std::string, double> parameters;
};

namespace detail {

inline std::string strip(const std::string& s) {
    std::size_t b = 0, e = s.size();
    while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
    while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
    return s.substr(b, e - b);
}

inline double parse_scalar(const std::string& key, const std::string& value) {
    const char* begin = value.c_str();
    char* end = nullptr;
    const double v = std::strtod(begin, &end);
    if (end == begin || *end != '\0')
        throw ConfigError("config: value of '" + key + "' is not a number: '" + value + "'");
    return v;
}

}  // namespace detail

[[nodiscard]] inline ExperimentConfig parse_config_text(const std::string& text) {
    ExperimentConfig cfg;
    std::istringstream in(text);
    std::string line;
    int lineno = 0;
    bool have_experiment = false;
    std::map<std::string, bool> seen;
    while (std::getline(in, line)) {
        ++lineno;
        const std::size_t hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        line = detail::strip(line);
        if (line.empty()) continue;
        const std::size_t eq = line.find('=');
        if (eq == std::string::npos)
            throw ConfigError("config line " + std::to_string(lineno) + ": expected 'key = value'");
        const std::string key = detail::strip(line.substr(0, eq));
        const std::string value = detail::strip(line.substr(eq + 1));
        if (key.empty() || value.empty())
            throw ConfigError("config line " + std::to_string(lineno) + ": empty key or value");
        if (seen[key]) throw ConfigError("config: duplicate key '" + key + "'");
        seen[key] = true;

        if (key == "experiment") {
            cfg.experiment = value;
            have_experiment = true;
        } else if (key == "output_dir") {
            cfg.output_dir = value;
        } else if (key == "seeds") {
            std::istringstream items(value);
            std::string item;
            while (std::getline(items, item, ',')) {
                item = detail::strip(item);
                if (item.empty()) throw ConfigError("config: empty entry in 'seeds'");
                char* end = nullptr;
                const unsigned long long s = std::strtoull(item.c_str(), &end, 10);
                if (end == item.c_str() || *end != '\0')
                    throw ConfigError("config: seed entry is not an integer: '" + item + "'");
                cfg.seeds.push_back(static_cast<std::uint64_t>(s));
            }
            if (cfg.seeds.empty()) throw ConfigError("config: 'seeds' must list at least one seed");
        } else {
            cfg.parameters[key] = detail::parse_scalar(key, value);
        }
    }
    if (!have_experiment) throw ConfigError("config: missing required key 'experiment'");
    return cfg;
}

[[nodiscard]] inline ExperimentConfig parse_config_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("config: cannot open '" + path + "'");
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_config_text(buf.str());
}

}  // namespace onet::harness
