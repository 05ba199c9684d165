#include "CLI11.hpp"
#include "json.hpp"

#include "spinnet/bath.hpp"
#include "spinnet/config.hpp"
#include "spinnet/engine.hpp"
#include "spinnet/fitkit.hpp"
#include "spinnet/floquet.hpp"
#include "spinnet/io.hpp"
#include "spinnet/scans.hpp"
#include "spinnet/spectral.hpp"
#include "spinnet/transport.hpp"

#include <chrono>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <optional>

using namespace spinnet;
using nlohmann::json;
namespace fs = std::filesystem;

namespace {

struct Options {
    std::string config_path;
    std::optional<std::uint64_t> seed;
    std::optional<int> configs, workers, box_cells;
    std::optional<std::string> regime;
    std::optional<double> cnuc, cel_ppm, power;
    std::string out_dir;
    std::string input;
};

class Run {
public:
    Run(std::string command, const Options& o) : command_(std::move(command)), opt_(o)
    {
        dir_ = o.out_dir;
        if (dir_.empty()) {
            const char* env = std::getenv("SPINNET_OUT_DIR");
            dir_ = env ? env : "out";
        }
        fs::create_directories(dir_);
    }

    std::string path(const std::string& name)
    {
        outputs_.push_back(name);
        return (fs::path(dir_) / name).string();
    }

    void finish(const json& resolved, std::uint64_t seed)
    {
        RunManifest m;
        m.command = command_;
        m.config = resolved;
        m.seed = seed;
        m.version = artifact_version();
        m.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
        m.outputs = outputs_;
        m.digests = section_digests(resolved);
        write_json((fs::path(dir_) / "manifest.json").string(), m.to_json());
        std::cout << "wrote";
        for (const auto& o : outputs_)
            std::cout << ' ' << o;
        std::cout << " manifest.json to " << dir_ << '\n';
    }

private:
    std::string command_;
    Options opt_;
    std::string dir_;
    std::vector<std::string> outputs_;
    std::chrono::steady_clock::time_point start_ = std::chrono::steady_clock::now();
};

json load_user_json(const std::string& path)
{
    if (path.empty())
        return json::object();
    std::ifstream f(path);
    if (!f)
        throw std::runtime_error("cannot read config " + path);
    const std::string text((std::istreambuf_iterator<char>(f)), std::istreambuf_iterator<char>());
    if (text.find_first_not_of(" \t\r\n") == std::string::npos)
        return json::object();
    json j = json::parse(text);
    // A manifest carries its resolved config.
    if (j.contains("command") && j.contains("config"))
        j = j["config"];
    j.erase("derived");
    return j;
}

ConfigReport resolve(const std::string& cmd, const Options& o)
{
    json u = load_user_json(o.config_path);
    const bool tr = cmd == "transport" || cmd == "finite-size";
    if (o.seed)
        u["seed"] = *o.seed;
    if (o.workers)
        u["workers"] = *o.workers;
    if (o.regime)
        u["regime"] = *o.regime;
    if (o.power)
        u["power"] = *o.power;
    if (o.cel_ppm)
        u["c_el_ppm"] = *o.cel_ppm;
    if (o.configs) {
        if (tr)
            u["transport"]["n_configs"] = *o.configs;
        else
            u["n_configs"] = *o.configs;
    }
    if (o.cnuc) {
        if (tr)
            u["transport"]["c_nuc"] = *o.cnuc;
        else
            u["c_nuc"] = *o.cnuc;
    }
    if (o.box_cells) {
        if (tr)
            u["transport"]["box_cells"] = *o.box_cells;
        else if (cmd == "landscape")
            u["landscape"]["box_cells"] = *o.box_cells;
        else if (cmd == "slice")
            u["slice"]["box_cells"] = *o.box_cells;
        else if (cmd == "ordered")
            u["ordered"]["box_cells"] = *o.box_cells;
        else
            u["box_cells"] = *o.box_cells;
    }
    ConfigReport rep = validate_config(u);
    if (cmd == "laser" && rep.config.laser.batches > rep.config.sim.n_configs)
        rep.errors.push_back("laser.batches: must not exceed n_configs");
    for (const auto& w : rep.warnings)
        std::cerr << "warning: " << w << '\n';
    if (!rep.ok())
        throw ConfigError(rep.errors);
    return rep;
}

void write_curve(const DecayCurve& c, const std::string& path)
{
    CsvTable t({"t_s", "polarization", "stderr"});
    for (std::size_t k = 0; k < c.times.size(); ++k)
        t.add_row({c.times[k], c.values[k], c.stderr_.empty() ? 0.0 : c.stderr_[k]});
    t.write(path);
}

json fit_json(const FitResult& f)
{
    return {{"R_p", f.R_p},
            {"R_d", f.R_d},
            {"gamma", f.gamma},
            {"rms", f.rms},
            {"rrms", f.rrms},
            {"window", {f.window.t_min, f.window.t_max}},
            {"n_points", f.n_points},
            {"converged", f.converged},
            {"rp_at_bound", f.rp_at_bound},
            {"rd_at_bound", f.rd_at_bound}};
}

void read_curve(const std::string& path, std::vector<double>& t, std::vector<double>& y)
{
    const CsvData d = read_csv(path);
    t = d.column("t_s");
    y = d.column("polarization");
}

int cmd_decay(Run& run, const ConfigReport& rep)
{
    const DecayCurve c = ensemble_decay(rep.config.sim);
    write_curve(c, run.path("decay.csv"));
    const FitResult f = fit_emergent(c.times, c.values, regime_fit_options(c.regime));
    write_json(run.path("decay_fit.json"),
               {{"fit", fit_json(f)}, {"n_configs", c.n_configs}, {"n_skipped", c.n_skipped}, {"regime", c.regime}});
    return 0;
}

void curve_for(const Options& o, const ConfigReport& rep, std::vector<double>& t, std::vector<double>& y)
{
    if (!o.input.empty()) {
        read_curve(o.input, t, y);
        return;
    }
    const DecayCurve c = ensemble_decay(rep.config.sim);
    t = c.times;
    y = c.values;
}

int cmd_fit(Run& run, const ConfigReport& rep, const Options& o)
{
    std::vector<double> t, y;
    curve_for(o, rep, t, y);
    FitOptions s, m;
    s.fix_rd_zero = true;
    m.fix_rp_zero = true;
    write_json(run.path("fit.json"), {{"two_parameter", fit_json(fit_emergent(t, y))},
                                      {"stretched_only", fit_json(fit_emergent(t, y, s))},
                                      {"mono_only", fit_json(fit_emergent(t, y, m))},
                                      {"t_one_over_e", one_over_e_time(t, y)}});
    return 0;
}

int cmd_gamma(Run& run, const ConfigReport& rep, const Options& o)
{
    std::vector<double> t, y;
    curve_for(o, rep, t, y);
    const GammaSweep g = gamma_sweep(t, y);
    CsvTable tab({"gamma", "rms", "R_p", "R_d"});
    for (std::size_t i = 0; i < g.gamma.size(); ++i)
        tab.add_row({g.gamma[i], g.rms[i], g.fits[i].R_p, g.fits[i].R_d});
    tab.write(run.path("gamma_sweep.csv"));
    write_json(run.path("gamma_sweep.json"), {{"argmin", g.argmin}});
    std::cout << "gamma argmin " << g.argmin << '\n';
    return 0;
}

int cmd_transport(Run& run, const ConfigReport& rep)
{
    const TransportResult r = run_transport(rep.config.transport.run);
    CsvTable tab({"t_s", "msd_A2", "stderr", "x2", "y2", "z2"});
    for (std::size_t k = 0; k < r.times.size(); ++k)
        tab.add_row({r.times[k], r.msd[k], r.msd_stderr[k], r.axis_moment[0][k], r.axis_moment[1][k],
                     r.axis_moment[2][k]});
    tab.write(run.path("msd.csv"));
    write_json(run.path("transport_fit.json"), {{"D", r.D},
                                                {"D_err", r.D_err},
                                                {"alpha", r.alpha},
                                                {"alpha_err", r.alpha_err},
                                                {"t_cutoff", r.t_cutoff},
                                                {"window", {r.window.t_min, r.window.t_max}},
                                                {"n_points", r.n_points},
                                                {"n_configs", r.n_configs},
                                                {"n_flagged", r.n_flagged},
                                                {"kappa", r.kappa}});
    std::cout << "alpha " << r.alpha << " +- " << r.alpha_err << ", D " << r.D << " A^2/s^alpha\n";
    return 0;
}

int cmd_finite_size(Run& run, const ConfigReport& rep)
{
    const auto& ts = rep.config.transport;
    const auto rows = finite_size_scan(ts.run, ts.sizes, ts.runs, ts.per_run);
    CsvTable tab({"cells", "N", "N_inv_third", "alpha", "alpha_err", "D", "D_err", "t_cutoff"});
    for (const auto& r : rows)
        tab.add_row({static_cast<long long>(r.cells), r.n_nuclei, r.n_inv_third, r.alpha, r.alpha_err, r.D, r.D_err,
                     r.t_cutoff});
    tab.write(run.path("finite_size.csv"));
    return 0;
}

int cmd_eigen(Run& run, const ConfigReport& rep)
{
    const AppConfig& c = rep.config;
    CsvTable modes({"c_el_ppm", "lambda0_mean", "lambda0_stderr", "n_used", "n_zero_modes", "R_p", "R_d",
                    "lambda0_over_2Rd"});
    for (double ppm : c.eigen.c_el_ppm) {
        SimulationConfig cfg = c.sim;
        cfg.conc.c_el = ppm * 1e-6;
        cfg.n_configs = c.eigen.realizations;
        const EnsembleResult er = ensemble_run(cfg, true);
        const SlowestModeStats st = slowest_mode_stats(er.spectra);
        const FitResult f = fit_emergent(er.curve.times, er.curve.values);
        modes.add_row({ppm, st.mean, st.stderr_, static_cast<long long>(st.n_used),
                       static_cast<long long>(st.n_zero_modes), f.R_p, f.R_d,
                       f.R_d > 0 ? st.mean / (2 * f.R_d) : std::nan("")});
    }
    modes.write(run.path("eigen_modes.csv"));

    const RpComparison cmp = rp_dep_comparison(c.sim);
    write_json(run.path("rp_dependence.json"),
               {{"full", fit_json(cmp.full)}, {"no_hopping", fit_json(cmp.no_hopping)}, {"ratio", cmp.ratio}});

    SimulationConfig sc = c.sim;
    sc.box = BoxGeometry::from_cells(c.eigen.spectrum_box_cells, c.sim.box.lattice_constant);
    CsvTable spec({"c_nuc", "index", "lambda"});
    json gaps = json::array();
    for (const auto& e : eigenvalue_spectrum(sc, c.eigen.spectrum_c_nuc)) {
        for (Eigen::Index i = 0; i < e.lambdas.size(); ++i)
            spec.add_row({e.c_nuc, static_cast<long long>(i), e.lambdas[i]});
        gaps.push_back({{"c_nuc", e.c_nuc}, {"gap_ratio", e.gap_ratio}});
    }
    spec.write(run.path("eigen_spectrum.csv"));

    // Slowest mode vs late-time polarization for the first realization.
    const Positions sites = build_diamond_sites(c.sim.box);
    const SpinRealization real = make_realization(c.sim, sites, 0);
    json maps = {{"gaps", gaps}};
    if (real.n_nuclei() > 1) {
        const GeneratorMatrices g = build_generator(c.sim, drive_model(c.sim), real);
        const Eigen::VectorXd p0 = Eigen::VectorXd::Constant(real.n_nuclei(), 1.0 / real.n_nuclei());
        const ModeSet ms = decompose(g.M(), p0);
        const double gap = ms.lambdas[1] - ms.lambdas[0];
        const double t_late = gap > 0 ? 5.0 / gap : 1.0;
        const Eigen::VectorXd coef =
            (ms.vectors.transpose() * p0).cwiseProduct((-ms.lambdas.array() * t_late).exp().matrix());
        const Eigen::VectorXd late = ms.vectors * coef;
        const Heatmap hm = mode_profile_2d(real.nuclei, ms.vectors.col(0), c.sim.box.side_length);
        const Heatmap hl = mode_profile_2d(real.nuclei, late, c.sim.box.side_length);
        CsvTable mt({"x_A", "y_A", "mode0", "late_polarization"});
        for (int i = 0; i < hm.bins; ++i)
            for (int j = 0; j < hm.bins; ++j)
                mt.add_row({hm.x(i), hm.x(j), hm.value(i, j), hl.value(i, j)});
        mt.write(run.path("mode_maps.csv"));
        maps["cosine_similarity"] = cosine_similarity(hm, hl);
        maps["t_late"] = t_late;
    }
    write_json(run.path("eigen_summary.json"), maps);
    return 0;
}

int cmd_landscape(Run& run, const ConfigReport& rep)
{
    const AppConfig& c = rep.config;
    SimulationConfig base = c.sim;
    base.box = BoxGeometry::from_cells(c.landscape.box_cells, c.sim.box.lattice_constant);
    base.times.clear();
    std::vector<double> cel;
    for (double p : c.landscape.c_el_ppm)
        cel.push_back(p * 1e-6);
    const std::string ckpt = run.path("landscape.checkpoint.jsonl");
    const auto cells = landscape(base, c.landscape.c_nuc, cel, ckpt);
    CsvTable tab({"c_nuc", "c_el_ppm", "Rp", "Rd", "log10_ratio", "tag", "t_one_over_e", "p_last"});
    for (const auto& x : cells)
        tab.add_row({x.c_nuc, x.c_el * 1e6, x.R_p, x.R_d, x.ratio_log10, x.tag, x.t_one_over_e, x.p_last});
    tab.write(run.path("landscape.csv"));
    return 0;
}

int cmd_slice(Run& run, const ConfigReport& rep)
{
    const AppConfig& c = rep.config;
    SimulationConfig base = c.sim;
    base.box = BoxGeometry::from_cells(c.slice.box_cells, c.sim.box.lattice_constant);
    base.conc.c_el = c.slice.c_el_ppm * 1e-6;
    base.times.clear();
    CsvTable tab({"c_nuc", "Rp", "Rd", "rp_at_bound", "rd_at_bound", "t_one_over_e"});
    for (const auto& r : concentration_slice(base, c.slice.c_nuc))
        tab.add_row({r.c_nuc, r.fit.R_p, r.fit.R_d, static_cast<long long>(r.fit.rp_at_bound),
                     static_cast<long long>(r.fit.rd_at_bound), r.t_one_over_e});
    tab.write(run.path("slice.csv"));
    return 0;
}

int cmd_laser(Run& run, const ConfigReport& rep)
{
    const AppConfig& c = rep.config;
    CsvTable tab({"power_W", "inv_tau_c", "T2_s", "Rp", "Rp_err", "Rd", "Rd_err", "t_one_over_e"});
    for (const auto& r : laser_scan(c.sim, c.laser.powers, c.laser.batches))
        tab.add_row({r.power, r.inv_tau_c, r.T2, r.fit.R_p, r.R_p_err, r.fit.R_d, r.R_d_err, r.t_one_over_e});
    tab.write(run.path("laser.csv"));
    if (c.sim.regime.label == "I") {
        const auto grid = c.laser.inv_tau_c.empty() ? default_decoupling_grid(c.sim.inv_tau_c0) : c.laser.inv_tau_c;
        const DecouplingScan d = optical_decoupling_extrapolation(c.sim, grid);
        CsvTable dt({"inv_tau_c", "Rp", "Rd"});
        for (const auto& r : d.rows)
            dt.add_row({r.inv_tau_c, r.fit.R_p, r.fit.R_d});
        dt.write(run.path("decoupling.csv"));
        write_json(run.path("decoupling.json"), {{"argmax_inv_tau_c", d.rows[d.argmax].inv_tau_c},
                                                 {"interior_max", d.interior_max},
                                                 {"monotone_after", d.monotone_after}});
    }
    return 0;
}

int cmd_ordered(Run& run, const ConfigReport& rep)
{
    const AppConfig& c = rep.config;
    SimulationConfig cfg = c.sim;
    const int cells = c.ordered.box_cells > 0 ? c.ordered.box_cells : ordered_box_cells(cfg.conc.c_el);
    cfg.box = BoxGeometry::from_cells(cells, cfg.box.lattice_constant);
    const OrderedVsRandom r = ordered_vs_random(cfg, c.ordered.trials, c.ordered.per_trial);
    CsvTable tab({"t_s", "ordered", "random"});
    for (std::size_t k = 0; k < r.ordered.times.size(); ++k)
        tab.add_row({r.ordered.times[k], r.ordered.values[k], r.random.values[k]});
    tab.write(run.path("ordered.csv"));
    CsvTable tt({"trial", "t_ordered", "t_random", "random_slower"});
    for (std::size_t i = 0; i < r.trials.size(); ++i)
        tt.add_row({static_cast<long long>(i), r.trials[i].t_ordered, r.trials[i].t_random,
                    static_cast<long long>(r.trials[i].random_slower)});
    tt.write(run.path("ordered_trials.csv"));
    write_json(run.path("ordered.json"), {{"box_cells", cells}, {"fraction_random_slower", r.fraction_random_slower}});
    return 0;
}

int cmd_kappa(Run& run, const ConfigReport& rep)
{
    const SimulationConfig& s = rep.config.sim;
    PulseSequence seq = s.regime.sequence;
    CsvTable tab({"detuning_hz", "kappa"});
    for (int i = 0; i <= 100; ++i) {
        seq.detuning = -5000 + 100.0 * i;
        tab.add_row({seq.detuning, kappa(seq, s.quad_steps)});
    }
    tab.write(run.path("kappa.csv"));
    const FloquetParams fp = floquet_params(s.regime.sequence, s.sidebands, s.quad_steps);
    CsvTable comb({"k", "omega_rad_s", "abs_c_plus_sq", "abs_c_zero_sq", "abs_c_minus_sq"});
    for (int k = -fp.K; k <= fp.K; ++k)
        comb.add_row({static_cast<long long>(k), -k * fp.frame.omega_d, std::norm(fp.c_plus[k + fp.K]),
                      std::norm(fp.c_zero[k + fp.K]), std::norm(fp.c_minus[k + fp.K])});
    comb.write(run.path("comb.csv"));
    const DriveModel dm = drive_model(s);
    write_json(run.path("floquet.json"), {{"regime", s.regime.label},
                                          {"detuning_hz", s.regime.sequence.detuning},
                                          {"kappa", fp.kappa},
                                          {"omega_eff", fp.frame.omega_eff},
                                          {"theta_eff", fp.frame.theta_eff},
                                          {"phi_eff", fp.frame.phi_eff},
                                          {"omega_d", fp.frame.omega_d},
                                          {"tau_c", dm.bath.tau_c},
                                          {"T2", dm.T2},
                                          {"comb_weight", dm.comb_weight}});
    return 0;
}

int cmd_bath(Run& run, const ConfigReport& rep)
{
    const BathSettings& b = rep.config.bath;
    const PumpScan scan = tau_c_of_power(b.pump, b.gamma_p);
    CsvTable tab({"Gamma_p", "inv_tau_c", "fit_r2"});
    for (std::size_t i = 0; i < scan.gamma_p.size(); ++i)
        tab.add_row({scan.gamma_p[i], scan.inv_tau_c[i], scan.fit_r2[i]});
    tab.write(run.path("bath.csv"));
    const LaserMap lm = rep.config.sim.laser();
    write_json(run.path("bath.json"), {{"pump_slope", scan.map.slope},
                                       {"pump_intercept", scan.map.intercept},
                                       {"pump_r2", scan.map.r2},
                                       {"monotone", scan.monotone},
                                       {"laser_slope_per_W", lm.slope},
                                       {"laser_intercept", lm.intercept}});
    return 0;
}

int cmd_oracle(Run& run, const ConfigReport& rep)
{
    const OracleSettings& o = rep.config.oracle;
    const PoissonOracle r = poisson_stretched_oracle(o.A, o.density, o.samples, log_times(o.times.t0, o.times.t1, o.times.n),
                                                     o.power, rep.config.sim.seed);
    CsvTable tab({"t_s", "survival", "exact"});
    for (std::size_t k = 0; k < r.times.size(); ++k)
        tab.add_row({r.times[k], r.survival[k], r.exact[k]});
    tab.write(run.path("oracle.csv"));
    write_json(run.path("oracle.json"), {{"exponent", r.exponent},
                                         {"exponent_err", r.exponent_err},
                                         {"expected", 3.0 / o.power},
                                         {"ball_radius", r.ball_radius}});
    std::cout << "stretch exponent " << r.exponent << " (3/p = " << 3.0 / o.power << ")\n";
    return 0;
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"spinnet: disordered electron-nuclear spin network simulator"};
    app.require_subcommand(1);
    Options o;
    app.add_option("--config", o.config_path, "JSON config (a run manifest also works)");
    app.add_option("--seed", o.seed, "master seed");
    app.add_option("--configs", o.configs, "realizations per ensemble");
    app.add_option("--workers", o.workers, "worker threads (0: all cores)");
    app.add_option("--out-dir", o.out_dir, "output directory (default $SPINNET_OUT_DIR or ./out)");
    app.add_option("--regime", o.regime, "I, II or III");
    app.add_option("--cnuc", o.cnuc, "13C fraction");
    app.add_option("--cel-ppm", o.cel_ppm, "electron concentration in ppm");
    app.add_option("--power", o.power, "laser power in W");
    app.add_option("--box-cells", o.box_cells, "box side in unit cells");
    bool check_only = false;

    const std::vector<std::pair<std::string, std::string>> cmds = {
        {"decay", "ensemble decay curve and emergent-law fit"},
        {"fit", "fit the emergent law to a decay CSV"},
        {"gamma-sweep", "RMS residual vs stretching exponent"},
        {"transport", "mean squared displacement and (D, alpha)"},
        {"finite-size", "transport exponent vs box size"},
        {"eigen", "slowest-mode statistics, spectra and mode maps"},
        {"landscape", "(R_p, R_d) over concentration grids"},
        {"slice", "rates vs 13C fraction at fixed electron density"},
        {"laser", "rates vs laser power, plus the 1/tau_c extrapolation"},
        {"ordered", "octant-ordered vs random electrons"},
        {"kappa", "Floquet scaling factor and filter comb"},
        {"bath", "optical pumping model and 1/tau_c vs pump rate"},
        {"oracle", "diffusionless Poisson stretched-exponential oracle"}};
    for (const auto& [name, help] : cmds) {
        CLI::App* sub = app.add_subcommand(name, help);
        sub->fallthrough();
        if (name == "fit" || name == "gamma-sweep")
            sub->add_option("--input", o.input, "decay CSV (t_s, polarization); runs an ensemble when omitted");
    }
    app.add_flag("--check", check_only, "validate the configuration and print it");

    CLI11_PARSE(app, argc, argv);
    const std::string cmd = app.get_subcommands().front()->get_name();
    try {
        const ConfigReport rep = resolve(cmd, o);
        if (check_only) {
            std::cout << rep.resolved.dump(2) << '\n';
            return 0;
        }
        Run run(cmd, o);
        int rc = 0;
        if (cmd == "decay")
            rc = cmd_decay(run, rep);
        else if (cmd == "fit")
            rc = cmd_fit(run, rep, o);
        else if (cmd == "gamma-sweep")
            rc = cmd_gamma(run, rep, o);
        else if (cmd == "transport")
            rc = cmd_transport(run, rep);
        else if (cmd == "finite-size")
            rc = cmd_finite_size(run, rep);
        else if (cmd == "eigen")
            rc = cmd_eigen(run, rep);
        else if (cmd == "landscape")
            rc = cmd_landscape(run, rep);
        else if (cmd == "slice")
            rc = cmd_slice(run, rep);
        else if (cmd == "laser")
            rc = cmd_laser(run, rep);
        else if (cmd == "ordered")
            rc = cmd_ordered(run, rep);
        else if (cmd == "kappa")
            rc = cmd_kappa(run, rep);
        else if (cmd == "bath")
            rc = cmd_bath(run, rep);
        else if (cmd == "oracle")
            rc = cmd_oracle(run, rep);
        run.finish(rep.resolved, rep.config.sim.seed);
        return rc;
    } catch (const ConfigError& e) {
        for (const auto& m : e.errors)
            std::cerr << "config error: " << m << '\n';
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
}
