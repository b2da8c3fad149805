#include "efres/config.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

#include "efres/csv.hpp"
#include <stdexcept>

namespace efres {

const std::vector<ConfigKey>& config_schema() {
    static const std::vector<ConfigKey> schema = {
        {"params", "nu_o_ghz", "6.4", "oscillator frequency (GHz)"},
        {"params", "nu_ge_ghz", "6.661", "transmon g-e frequency (GHz)"},
        {"params", "alpha_mhz", "-261", "anharmonicity nu_ef - nu_ge (MHz, signed)"},
        {"params", "g_o_mhz", "7.45", "transmon-oscillator coupling (MHz)"},
        {"params", "h_offset_mhz", "-848", "|h> energy offset from 3 nu_ge (MHz), 4-level model"},
        {"params", "levels", "3", "transmon levels kept, 3 or 4"},
        {"params", "n_max", "20", "photon truncation"},
        {"params", "t1_us", "1.9", "transmon relaxation time (us)"},
        {"params", "t2s_us", "2.4", "transmon Ramsey coherence time (us)"},
        {"params", "t_o_us", "54", "oscillator energy relaxation time (us)"},
        {"params", "n_thermal", "0", "oscillator bath thermal occupation"},

        {"spectrum", "method", "numeric", "ladder method: numeric, exact3 or series"},

        {"spectroscopy", "re_beta", "2.1213203435596424", "Re beta of the probe coherent state"},
        {"spectroscopy", "im_beta", "0", "Im beta of the probe coherent state"},
        {"spectroscopy", "nu_span_mhz", "160", "frequency window around nu_ge (MHz)"},
        {"spectroscopy", "nu_points", "1601", "trace sample count"},

        {"calibrate", "k_per_v", "2.29", "true filling rate for the synthetic dataset (1/V)"},
        {"calibrate", "sigma", "0.006", "additive Gaussian noise level"},

        {"tomo", "re_beta", "-2.236067977499790", "Re beta of the target state"},
        {"tomo", "im_beta", "1.4142135623730951", "Im beta of the target state"},
        {"tomo", "n_range", "7", "highest probed Fock index"},
        {"tomo", "n_trunc", "18", "reconstruction photon truncation"},
        {"tomo", "noise_mult", "0", "multiplicative noise on probabilities"},
        {"tomo", "noise_add", "0", "additive noise on probabilities"},
        {"tomo", "wigner_points", "41", "Wigner map points per side"},
        {"tomo", "wigner_halfwidth", "3", "Wigner map half width around the target"},

        {"sweep", "p1_start_dbm", "-135", "first input power (dBm)"},
        {"sweep", "p1_stop_dbm", "-126", "last input power (dBm)"},
        {"sweep", "p1_step_db", "3", "power step (dB)"},
        {"sweep", "nu_span_khz", "24", "frequency window around the dressed resonance (kHz)"},
        {"sweep", "nu_points", "21", "points per resonance curve"},
        {"sweep", "n_max_limit", "140", "hard cap on the adaptive photon truncation"},
        {"sweep", "refine_peak", "false", "resample at a finer step around each peak"},

        {"decay", "re_beta", "-2.236067977499790", "Re beta of the drive target"},
        {"decay", "im_beta", "1.4142135623730951", "Im beta of the drive target"},
        {"decay", "t_pulse_us", "0.3", "pulse length that reaches the target amplitude"},
        {"decay", "t_max_us", "3", "last sampled time"},
        {"decay", "t_points", "25", "number of samples"},
        {"decay", "include_steady", "false", "append the steady-state row"},

        {"compare", "alpha_mhz", "-261", "ef-resonant anharmonicity (MHz)"},
        {"compare", "g_o_mhz", "7.45", "ef-resonant coupling (MHz)"},
        {"compare", "alpha_pp_mhz", "-261", "far-dispersive transmon anharmonicity (MHz)"},
        {"compare", "delta_prime_min_ghz", "0.5", "two-level detuning curve start (GHz)"},
        {"compare", "delta_prime_max_ghz", "5", "two-level detuning curve end (GHz)"},
        {"compare", "delta_prime_points", "10", "two-level detuning curve samples"},
    };
    return schema;
}

RunConfig::RunConfig() {
    for (const auto& k : config_schema()) values_[k.section + "." + k.name] = k.default_value;
}

void RunConfig::apply_line(const std::string& section, const std::string& key,
                           const std::string& value, const std::string& where) {
    const std::string full = section + "." + key;
    if (!values_.count(full))
        throw std::runtime_error("unknown config key '" + full + "' at " + where);
    values_[full] = value;
}

RunConfig RunConfig::from_file(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw std::runtime_error("cannot open config file: " + path);
    RunConfig cfg;
    std::string line, section;
    int lineno = 0;
    while (std::getline(f, line)) {
        ++lineno;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        // trim
        const auto notspace = [](unsigned char c) { return !std::isspace(c); };
        line.erase(line.begin(), std::find_if(line.begin(), line.end(), notspace));
        line.erase(std::find_if(line.rbegin(), line.rend(), notspace).base(), line.end());
        if (line.empty()) continue;
        const std::string where = path + ":" + std::to_string(lineno);
        if (line.front() == '[') {
            if (line.back() != ']') throw std::runtime_error("malformed section at " + where);
            section = line.substr(1, line.size() - 2);
            continue;
        }
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw std::runtime_error("expected key = value at " + where);
        std::string key = line.substr(0, eq);
        std::string value = line.substr(eq + 1);
        key.erase(std::find_if(key.rbegin(), key.rend(), notspace).base(), key.end());
        value.erase(value.begin(), std::find_if(value.begin(), value.end(), notspace));
        if (section.empty()) throw std::runtime_error("key outside a section at " + where);
        cfg.apply_line(section, key, value, where);
    }
    return cfg;
}

void RunConfig::apply_paper_preset() {
    const SystemParams p = SystemParams::paper_preset();
    set("params", "nu_o_ghz", format_double(p.nu_o_ghz));
    set("params", "nu_ge_ghz", format_double(p.nu_ge_ghz));
    set("params", "alpha_mhz", format_double(p.alpha_mhz));
    set("params", "g_o_mhz", format_double(p.g_o_mhz));
    set("params", "h_offset_mhz", format_double(p.h_offset_mhz));
    set("params", "t1_us", format_double(p.t1_us));
    set("params", "t2s_us", format_double(p.t2s_us));
    set("params", "t_o_us", format_double(p.t_osc_us));
}

std::string RunConfig::get(const std::string& section, const std::string& key) const {
    const auto it = values_.find(section + "." + key);
    if (it == values_.end())
        throw std::runtime_error("internal: unknown config key " + section + "." + key);
    return it->second;
}

double RunConfig::get_double(const std::string& section, const std::string& key) const {
    const std::string v = get(section, key);
    try {
        std::size_t pos = 0;
        const double d = std::stod(v, &pos);
        if (pos != v.size()) throw std::invalid_argument(v);
        return d;
    } catch (const std::exception&) {
        throw std::runtime_error("config key " + section + "." + key + " is not a number: " + v);
    }
}

int RunConfig::get_int(const std::string& section, const std::string& key) const {
    const double d = get_double(section, key);
    const int i = static_cast<int>(d);
    if (d != i)
        throw std::runtime_error("config key " + section + "." + key + " is not an integer");
    return i;
}

bool RunConfig::get_bool(const std::string& section, const std::string& key) const {
    const std::string v = get(section, key);
    if (v == "true" || v == "1" || v == "yes") return true;
    if (v == "false" || v == "0" || v == "no") return false;
    throw std::runtime_error("config key " + section + "." + key + " is not a boolean: " + v);
}

void RunConfig::set(const std::string& section, const std::string& key, const std::string& value) {
    values_[section + "." + key] = value;
}

SystemParams RunConfig::system_params() const {
    SystemParams p;
    p.nu_o_ghz = get_double("params", "nu_o_ghz");
    p.nu_ge_ghz = get_double("params", "nu_ge_ghz");
    p.alpha_mhz = get_double("params", "alpha_mhz");
    p.g_o_mhz = get_double("params", "g_o_mhz");
    p.h_offset_mhz = get_double("params", "h_offset_mhz");
    p.levels = get_int("params", "levels");
    p.n_max = get_int("params", "n_max");
    p.t1_us = get_double("params", "t1_us");
    p.t2s_us = get_double("params", "t2s_us");
    p.t_osc_us = get_double("params", "t_o_us");
    p.n_thermal = get_double("params", "n_thermal");
    return p;
}

std::string config_help_text() {
    std::ostringstream os;
    os << "Config file keys (INI sections, strict schema, '#' comments):\n";
    std::string last_section;
    for (const auto& k : config_schema()) {
        if (k.section != last_section) {
            os << "  [" << k.section << "]\n";
            last_section = k.section;
        }
        os << "    " << k.name << " = " << k.default_value << "  # " << k.description << "\n";
    }
    return os.str();
}

} // namespace efres
