#ifndef EFRES_CONFIG_HPP
#define EFRES_CONFIG_HPP

#include <map>
#include <string>
#include <vector>

#include "efres/system_params.hpp"

namespace efres {

// One documented configuration key. The schema is the normative list of
// everything a config file may contain; unknown keys are rejected.
struct ConfigKey {
    std::string section;
    std::string name;
    std::string default_value;
    std::string description;
};

const std::vector<ConfigKey>& config_schema();

class RunConfig {
public:
    RunConfig(); // all defaults

    // strict parse: unknown section/key or malformed line throws
    // std::runtime_error with the offending location
    static RunConfig from_file(const std::string& path);
    void apply_line(const std::string& section, const std::string& key,
                    const std::string& value, const std::string& where);

    void apply_paper_preset();

    std::string get(const std::string& section, const std::string& key) const;
    double get_double(const std::string& section, const std::string& key) const;
    int get_int(const std::string& section, const std::string& key) const;
    bool get_bool(const std::string& section, const std::string& key) const;

    void set(const std::string& section, const std::string& key, const std::string& value);

    SystemParams system_params() const;

    const std::map<std::string, std::string>& entries() const { return values_; }

private:
    std::map<std::string, std::string> values_; // "section.key" -> value
};

// schema rendered for --help (every key with its default and description)
std::string config_help_text();

} // namespace efres

#endif
