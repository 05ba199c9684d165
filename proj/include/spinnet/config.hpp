#pragma once

#include <stdexcept>
#include <string>
#include <vector>

#include "json.hpp"

#include "spinnet/bath.hpp"
#include "spinnet/engine.hpp"
#include "spinnet/transport.hpp"

namespace spinnet {

struct TimeGrid {
    double t0 = 1e-2, t1 = 600;
    int n = 400;
};

struct LandscapeSettings {
    int box_cells = 12;
    std::vector<double> c_nuc = {0.002, 0.004, 0.011, 0.03, 0.1, 0.2};
    std::vector<double> c_el_ppm = {2, 10, 30, 100, 300, 1000, 3000};
};

struct SliceSettings {
    int box_cells = 22;
    double c_el_ppm = 30;
    std::vector<double> c_nuc = {0.002, 0.005, 0.011, 0.02};
};

struct TransportSettings {
    TransportConfig run;
    std::vector<int> sizes = {12, 16, 20, 27};
    int runs = 5;
    int per_run = 20;
};

struct LaserSettings {
    std::vector<double> powers = {0, 1.5, 3, 4.5, 6, 7.5};
    int batches = 5;
    std::vector<double> inv_tau_c; // extrapolation grid; empty picks the default
};

struct OrderedSettings {
    int trials = 50;
    int per_trial = 1;
    int box_cells = 0; // 0: sized so eight electrons match c_el
};

struct EigenSettings {
    std::vector<double> c_el_ppm = {15, 30, 60};
    int realizations = 400;
    std::vector<double> spectrum_c_nuc = {0.002, 0.1};
    int spectrum_box_cells = 12;
};

struct BathSettings {
    PumpModel pump;
    std::vector<double> gamma_p = default_pump_grid();
};

struct OracleSettings {
    double A = 1.0;
    double density = 0.01; // per Å^3
    int samples = 4000;
    double power = 6;
    TimeGrid times{1e-4, 1e4, 161};
};

struct AppConfig {
    SimulationConfig sim;
    TimeGrid times;
    LandscapeSettings landscape;
    SliceSettings slice;
    TransportSettings transport;
    LaserSettings laser;
    OrderedSettings ordered;
    EigenSettings eigen;
    BathSettings bath;
    OracleSettings oracle;
};

struct ConfigReport {
    AppConfig config;
    nlohmann::json resolved; // every field, defaults filled, plus derived units
    std::vector<std::string> errors;
    std::vector<std::string> warnings;

    bool ok() const { return errors.empty(); }
};

class ConfigError : public std::runtime_error {
public:
    explicit ConfigError(const std::vector<std::string>& errors);
    std::vector<std::string> errors;
};

nlohmann::json default_config_json();

// Merges over defaults, then checks types, ranges and cross-field constraints; collects every violation.
ConfigReport validate_config(const nlohmann::json& user);
ConfigReport validate_config_file(const std::string& path);

// Throws ConfigError listing all violations.
AppConfig load_config(const nlohmann::json& user);

struct RunManifest {
    std::string command;
    nlohmann::json config;
    std::uint64_t seed = 0;
    std::string version;
    double wall_seconds = 0;
    std::vector<std::string> outputs;
    nlohmann::json digests; // section name -> hex digest of its canonical dump

    nlohmann::json to_json() const;
};

std::string artifact_version();
std::string digest_hex(const std::string& text);
nlohmann::json section_digests(const nlohmann::json& resolved);

} // namespace spinnet
