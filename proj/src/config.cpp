#include "spinnet/config.hpp"

#include "spinnet/io.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>

namespace spinnet {

using nlohmann::json;

namespace {

std::string join(const std::vector<std::string>& v)
{
    std::string s;
    for (const auto& e : v)
        s += (s.empty() ? "" : "; ") + e;
    return s;
}

json time_json(const TimeGrid& g) { return {{"t0", g.t0}, {"t1", g.t1}, {"n", g.n}}; }

void merge(json& base, const json& user, const std::string& path, std::vector<std::string>& errors)
{
    for (auto it = user.begin(); it != user.end(); ++it) {
        const std::string key = path.empty() ? it.key() : path + "." + it.key();
        if (!base.contains(it.key())) {
            errors.push_back("unknown key: " + key);
            continue;
        }
        json& b = base[it.key()];
        if (b.is_object()) {
            if (!it->is_object()) {
                errors.push_back(key + ": expected an object");
                continue;
            }
            merge(b, *it, key, errors);
        } else if (!b.is_null() && b.is_number() != it->is_number()) {
            errors.push_back(key + ": expected a number");
        } else if (!b.is_null() && !b.is_number() && b.type() != it->type()) {
            errors.push_back(key + ": wrong type");
        } else {
            b = *it;
        }
    }
}

class Reader {
public:
    Reader(const json& root, std::vector<std::string>& errors) : root_(root), errors_(errors) {}

    template <typename T>
    void get(const std::string& path, T& out) const
    {
        try {
            out = at(path).get<T>();
        } catch (const std::exception&) {
            errors_.push_back(path + ": wrong type");
        }
    }

    const json& at(const std::string& path) const
    {
        const json* j = &root_;
        std::size_t pos = 0;
        while (pos != std::string::npos) {
            const std::size_t dot = path.find('.', pos);
            j = &j->at(path.substr(pos, dot == std::string::npos ? std::string::npos : dot - pos));
            pos = dot == std::string::npos ? dot : dot + 1;
        }
        return *j;
    }

private:
    const json& root_;
    std::vector<std::string>& errors_;
};

void require(bool ok, const std::string& msg, std::vector<std::string>& errors)
{
    if (!ok)
        errors.push_back(msg);
}

void read_grid(const Reader& r, const std::string& p, TimeGrid& g, std::vector<std::string>& errors)
{
    r.get(p + ".t0", g.t0);
    r.get(p + ".t1", g.t1);
    r.get(p + ".n", g.n);
    require(g.t0 > 0 && g.t1 > g.t0, p + ": need 0 < t0 < t1", errors);
    require(g.n >= 2, p + ".n: must be >= 2", errors);
}

} // namespace

ConfigError::ConfigError(const std::vector<std::string>& errs)
    : std::runtime_error("invalid configuration: " + join(errs)), errors(errs)
{
}

json default_config_json()
{
    const AppConfig d;
    const TransportConfig& t = d.transport.run;
    const PumpModel& p = d.bath.pump;
    return {
        {"box_cells", 25},
        {"lattice_constant", diamond_lattice_constant},
        {"c_nuc", d.sim.conc.c_nuc},
        {"c_el_ppm", d.sim.conc.c_el * 1e6},
        {"frozen_core",
         {{"a", d.sim.core.a},
          {"B", d.sim.core.B},
          {"T", d.sim.core.T},
          {"cap_by_electron_spacing", d.sim.core.cap_by_electron_spacing},
          {"radius_override", d.sim.core.radius_override}}},
        {"b_axis", {0.0, 0.0, 1.0}},
        {"regime", "I"},
        {"sequence", nullptr},
        {"power", d.sim.power},
        {"inv_tau_c0", d.sim.inv_tau_c0},
        {"power_max", d.sim.power_max},
        {"T2_low", d.sim.T2_low},
        {"T2_high", d.sim.T2_high},
        {"eta", nullptr},
        {"times", time_json(d.times)},
        {"n_configs", d.sim.n_configs},
        {"seed", d.sim.seed},
        {"workers", d.sim.workers},
        {"hopping", true},
        {"relaxation", true},
        {"sidebands", d.sim.sidebands},
        {"quad_steps", d.sim.quad_steps},
        {"landscape",
         {{"box_cells", d.landscape.box_cells},
          {"c_nuc", d.landscape.c_nuc},
          {"c_el_ppm", d.landscape.c_el_ppm}}},
        {"slice",
         {{"box_cells", d.slice.box_cells}, {"c_el_ppm", d.slice.c_el_ppm}, {"c_nuc", d.slice.c_nuc}}},
        {"transport",
         {{"c_nuc", t.c_nuc},
          {"box_cells", 25},
          {"T2", t.T2},
          {"n_configs", t.n_configs},
          {"front_threshold", t.front_threshold},
          {"window_decades", t.window_decades},
          {"times", time_json({1e-4, 1e4, 161})},
          {"sizes", d.transport.sizes},
          {"runs", d.transport.runs},
          {"per_run", d.transport.per_run}}},
        {"laser",
         {{"powers", d.laser.powers}, {"batches", d.laser.batches}, {"inv_tau_c", d.laser.inv_tau_c}}},
        {"ordered",
         {{"trials", d.ordered.trials}, {"per_trial", d.ordered.per_trial}, {"box_cells", d.ordered.box_cells}}},
        {"eigen",
         {{"c_el_ppm", d.eigen.c_el_ppm},
          {"realizations", d.eigen.realizations},
          {"spectrum_c_nuc", d.eigen.spectrum_c_nuc},
          {"spectrum_box_cells", d.eigen.spectrum_box_cells}}},
        {"bath",
         {{"gamma_eg", p.gamma_eg},
          {"gamma_es", p.gamma_es},
          {"gamma_s", p.gamma_s},
          {"gamma_01", p.gamma_01},
          {"R1_E", p.R1_E},
          {"beta_omega", p.beta_omega},
          {"gamma_p", d.bath.gamma_p}}},
        {"oracle",
         {{"A", d.oracle.A},
          {"density", d.oracle.density},
          {"samples", d.oracle.samples},
          {"power", d.oracle.power},
          {"times", time_json(d.oracle.times)}}},
    };
}

ConfigReport validate_config(const json& user)
{
    ConfigReport rep;
    auto& E = rep.errors;
    json merged = default_config_json();
    if (!user.is_null() && !user.is_object())
        E.push_back("configuration root must be an object");
    else if (user.is_object())
        merge(merged, user, "", E);
    const Reader r(merged, E);
    AppConfig& c = rep.config;
    SimulationConfig& s = c.sim;

    int cells = 25;
    double a = diamond_lattice_constant, ppm = 30;
    r.get("box_cells", cells);
    r.get("lattice_constant", a);
    require(cells >= 1, "box_cells: must be >= 1", E);
    require(a > 0, "lattice_constant: must be positive", E);
    s.box = BoxGeometry::from_cells(std::max(cells, 1), a > 0 ? a : diamond_lattice_constant);
    r.get("c_nuc", s.conc.c_nuc);
    r.get("c_el_ppm", ppm);
    s.conc.c_el = ppm * 1e-6;
    require(s.conc.c_nuc >= 0 && s.conc.c_nuc <= 1, "c_nuc: must lie in [0, 1]", E);
    require(ppm >= 0 && ppm <= 1e6, "c_el_ppm: must lie in [0, 1e6]", E);
    require(s.conc.c_nuc + s.conc.c_el <= 1, "c_nuc + c_el: must not exceed 1", E);

    r.get("frozen_core.a", s.core.a);
    r.get("frozen_core.B", s.core.B);
    r.get("frozen_core.T", s.core.T);
    r.get("frozen_core.cap_by_electron_spacing", s.core.cap_by_electron_spacing);
    r.get("frozen_core.radius_override", s.core.radius_override);
    require(s.core.a > 0, "frozen_core.a: must be positive", E);
    require(s.core.B > 0, "frozen_core.B: must be positive", E);
    require(s.core.T > 0, "frozen_core.T: must be positive", E);

    std::vector<double> axis;
    r.get("b_axis", axis);
    if (axis.size() != 3 || Vec3(axis.size() == 3 ? axis[0] : 0, axis.size() == 3 ? axis[1] : 0,
                                 axis.size() == 3 ? axis[2] : 0).norm() == 0)
        E.push_back("b_axis: need three components, not all zero");
    else
        s.b_axis = Vec3(axis[0], axis[1], axis[2]).normalized();

    std::string label = "I";
    r.get("regime", label);
    try {
        s.regime = regime_preset(label);
    } catch (const std::exception& e) {
        E.push_back(std::string("regime: ") + e.what());
    }
    if (merged["sequence"].is_object()) {
        const json& q = merged["sequence"];
        PulseSequence& seq = s.regime.sequence;
        const std::vector<std::pair<const char*, double*>> fields = {{"flip_angle_deg", &seq.flip_angle},
                                                                     {"pulse_duration", &seq.pulse_duration},
                                                                     {"interpulse_delay", &seq.interpulse_delay},
                                                                     {"detuning_hz", &seq.detuning},
                                                                     {"phase_deg", &seq.phase}};
        for (auto it = q.begin(); it != q.end(); ++it) {
            bool known = false;
            for (const auto& [name, ptr] : fields)
                if (it.key() == name) {
                    known = true;
                    if (it->is_number())
                        *ptr = it->get<double>();
                    else
                        E.push_back(std::string("sequence.") + name + ": expected a number");
                }
            if (!known)
                E.push_back("unknown key: sequence." + it.key());
        }
        try {
            seq.validate();
        } catch (const std::exception& e) {
            E.push_back(std::string("sequence: ") + e.what());
        }
    } else if (!merged["sequence"].is_null()) {
        E.push_back("sequence: expected an object or null");
    }

    r.get("power", s.power);
    r.get("inv_tau_c0", s.inv_tau_c0);
    r.get("power_max", s.power_max);
    r.get("T2_low", s.T2_low);
    r.get("T2_high", s.T2_high);
    require(s.power >= 0, "power: must be >= 0", E);
    require(s.inv_tau_c0 > 0, "inv_tau_c0: must be positive", E);
    require(s.power_max > 0, "power_max: must be positive", E);
    require(s.T2_low > 0, "T2_low: must be positive", E);
    require(s.T2_high > 0, "T2_high: must be positive", E);
    if (!merged["eta"].is_null()) {
        if (merged["eta"].is_number()) {
            s.eta_override = merged["eta"].get<double>();
            require(s.eta_override >= 0, "eta: must be >= 0", E);
        } else {
            E.push_back("eta: expected a number or null");
        }
    }
    read_grid(r, "times", c.times, E);
    r.get("n_configs", s.n_configs);
    r.get("seed", s.seed);
    r.get("workers", s.workers);
    r.get("hopping", s.hopping);
    r.get("relaxation", s.relaxation);
    r.get("sidebands", s.sidebands);
    r.get("quad_steps", s.quad_steps);
    require(s.n_configs >= 1, "n_configs: must be >= 1", E);
    require(s.workers >= 0, "workers: must be >= 0", E);
    require(s.sidebands >= 1, "sidebands: must be >= 1", E);
    require(s.quad_steps >= 32, "quad_steps: must be >= 32", E);
    if (c.times.t1 > c.times.t0 && c.times.t0 > 0 && c.times.n >= 2)
        s.times = log_times(c.times.t0, c.times.t1, c.times.n);

    r.get("landscape.box_cells", c.landscape.box_cells);
    r.get("landscape.c_nuc", c.landscape.c_nuc);
    r.get("landscape.c_el_ppm", c.landscape.c_el_ppm);
    require(c.landscape.box_cells >= 1, "landscape.box_cells: must be >= 1", E);
    for (double v : c.landscape.c_nuc)
        require(v >= 0.002 && v <= 0.2, "landscape.c_nuc: entries must lie in [0.002, 0.2]", E);
    for (double v : c.landscape.c_el_ppm)
        require(v >= 2 && v <= 3000, "landscape.c_el_ppm: entries must lie in [2, 3000]", E);

    r.get("slice.box_cells", c.slice.box_cells);
    r.get("slice.c_el_ppm", c.slice.c_el_ppm);
    r.get("slice.c_nuc", c.slice.c_nuc);
    require(c.slice.box_cells >= 1, "slice.box_cells: must be >= 1", E);

    TransportConfig& t = c.transport.run;
    int tcells = 25;
    TimeGrid tg;
    r.get("transport.c_nuc", t.c_nuc);
    r.get("transport.box_cells", tcells);
    r.get("transport.T2", t.T2);
    r.get("transport.n_configs", t.n_configs);
    r.get("transport.front_threshold", t.front_threshold);
    r.get("transport.window_decades", t.window_decades);
    read_grid(r, "transport.times", tg, E);
    r.get("transport.sizes", c.transport.sizes);
    r.get("transport.runs", c.transport.runs);
    r.get("transport.per_run", c.transport.per_run);
    require(t.c_nuc > 0 && t.c_nuc <= 1, "transport.c_nuc: must lie in (0, 1]", E);
    require(tcells >= 1, "transport.box_cells: must be >= 1", E);
    require(t.T2 > 0, "transport.T2: must be positive", E);
    require(t.n_configs >= 1, "transport.n_configs: must be >= 1", E);
    require(t.front_threshold > 0 && t.front_threshold <= 1, "transport.front_threshold: must lie in (0, 1]", E);
    require(t.window_decades >= 1.5, "transport.window_decades: must be >= 1.5", E);
    require(c.transport.runs >= 1 && c.transport.per_run >= 1, "transport.runs, per_run: must be >= 1", E);
    for (int v : c.transport.sizes)
        require(v >= 1, "transport.sizes: entries must be >= 1", E);
    t.box = BoxGeometry::from_cells(std::max(tcells, 1), s.box.lattice_constant);
    t.b_axis = s.b_axis;
    t.regime = s.regime;
    t.seed = s.seed;
    t.workers = s.workers;
    t.quad_steps = s.quad_steps;
    if (tg.t1 > tg.t0 && tg.t0 > 0 && tg.n >= 2)
        t.times = log_times(tg.t0, tg.t1, tg.n);

    r.get("laser.powers", c.laser.powers);
    r.get("laser.batches", c.laser.batches);
    r.get("laser.inv_tau_c", c.laser.inv_tau_c);
    require(c.laser.batches >= 1, "laser.batches: must be >= 1", E);
    for (std::size_t i = 1; i < c.laser.powers.size(); ++i)
        require(c.laser.powers[i] >= c.laser.powers[i - 1], "laser.powers: must be ascending", E);

    r.get("ordered.trials", c.ordered.trials);
    r.get("ordered.per_trial", c.ordered.per_trial);
    r.get("ordered.box_cells", c.ordered.box_cells);
    require(c.ordered.trials >= 1 && c.ordered.per_trial >= 1, "ordered.trials, per_trial: must be >= 1", E);

    r.get("eigen.c_el_ppm", c.eigen.c_el_ppm);
    r.get("eigen.realizations", c.eigen.realizations);
    r.get("eigen.spectrum_c_nuc", c.eigen.spectrum_c_nuc);
    r.get("eigen.spectrum_box_cells", c.eigen.spectrum_box_cells);
    require(c.eigen.realizations >= 1, "eigen.realizations: must be >= 1", E);

    PumpModel& p = c.bath.pump;
    r.get("bath.gamma_eg", p.gamma_eg);
    r.get("bath.gamma_es", p.gamma_es);
    r.get("bath.gamma_s", p.gamma_s);
    r.get("bath.gamma_01", p.gamma_01);
    r.get("bath.R1_E", p.R1_E);
    r.get("bath.beta_omega", p.beta_omega);
    r.get("bath.gamma_p", c.bath.gamma_p);
    try {
        p.validate();
    } catch (const std::exception& e) {
        E.push_back(std::string("bath: ") + e.what());
    }
    for (double g : c.bath.gamma_p)
        require(g >= 0, "bath.gamma_p: entries must be >= 0", E);

    r.get("oracle.A", c.oracle.A);
    r.get("oracle.density", c.oracle.density);
    r.get("oracle.samples", c.oracle.samples);
    r.get("oracle.power", c.oracle.power);
    read_grid(r, "oracle.times", c.oracle.times, E);
    require(c.oracle.A > 0, "oracle.A: must be positive", E);
    require(c.oracle.density > 0, "oracle.density: must be positive", E);
    require(c.oracle.samples >= 1, "oracle.samples: must be >= 1", E);
    require(c.oracle.power >= 4, "oracle.power: must be >= 4", E);

    // Cross-field checks.
    if (E.empty()) {
        const double rc = effective_core_radius(s);
        require(rc < s.box.side_length / 2, "frozen_core: r_c must be below half the box side", E);
        const double sites = 8.0 * std::pow(s.box.cells(), 3);
        const double ne = sites * s.conc.c_el;
        if (s.conc.c_el > 0 && ne < 1) {
            char buf[160];
            std::snprintf(buf, sizeof buf, "expected electrons per realization is %.3g (< 1); most realizations will not relax",
                          ne);
            rep.warnings.push_back(buf);
        }
        const double nn = sites * s.conc.c_nuc;
        if (nn > 6000)
            rep.warnings.push_back("expected nuclei per realization exceeds 6000; dense solves will be slow");
        merged["derived"] = {{"detuning_rad_s", s.regime.sequence.detuning * 2 * pi},
                             {"c_el_fraction", s.conc.c_el},
                             {"side_length_A", s.box.side_length},
                             {"core_radius_A", rc},
                             {"expected_nuclei", nn},
                             {"expected_electrons", ne},
                             {"eta", s.eta()}};
    }
    rep.resolved = merged;
    return rep;
}

ConfigReport validate_config_file(const std::string& path)
{
    std::ifstream f(path);
    if (!f)
        throw std::runtime_error("cannot read " + path);
    const std::string text((std::istreambuf_iterator<char>(f)), std::istreambuf_iterator<char>());
    bool blank = true;
    for (char ch : text)
        if (!std::isspace(static_cast<unsigned char>(ch)))
            blank = false;
    if (blank)
        return validate_config(json::object());
    json j;
    try {
        j = json::parse(text);
    } catch (const std::exception& e) {
        ConfigReport rep;
        rep.errors.push_back(std::string("parse error: ") + e.what());
        return rep;
    }
    return validate_config(j);
}

AppConfig load_config(const json& user)
{
    ConfigReport rep = validate_config(user);
    if (!rep.ok())
        throw ConfigError(rep.errors);
    return rep.config;
}

std::string artifact_version() { return "0.1.0"; }

std::string digest_hex(const std::string& text)
{
    std::uint64_t h = 14695981039346656037ULL;
    for (unsigned char ch : text) {
        h ^= ch;
        h *= 1099511628211ULL;
    }
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

json section_digests(const json& resolved)
{
    json d = json::object();
    json core = resolved;
    for (auto it = resolved.begin(); it != resolved.end(); ++it)
        if (it->is_object() && it.key() != "frozen_core" && it.key() != "times" && it.key() != "sequence") {
            d[it.key()] = digest_hex(it->dump());
            core.erase(it.key());
        }
    d["simulation"] = digest_hex(core.dump());
    return d;
}

json RunManifest::to_json() const
{
    return {{"command", command},  {"config", config},   {"seed", seed},
            {"version", version},  {"wall_seconds", wall_seconds}, {"outputs", outputs},
            {"digests", digests}};
}

} // namespace spinnet
