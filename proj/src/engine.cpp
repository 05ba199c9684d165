#include "spinnet/engine.hpp"

#include "spinnet/parallel.hpp"
#include "spinnet/random.hpp"

#include <cmath>
#include <iostream>
#include <stdexcept>

namespace spinnet {

double kappa_root(PulseSequence seq, double lo_hz, double hi_hz, double tol_hz)
{
    auto k = [&](double hz) {
        seq.detuning = hz;
        return kappa(seq);
    };
    double klo = k(lo_hz), khi = k(hi_hz);
    if (klo * khi > 0)
        throw std::runtime_error("kappa_root: no sign change in bracket");
    while (hi_hz - lo_hz > tol_hz) {
        const double mid = 0.5 * (lo_hz + hi_hz);
        const double km = k(mid);
        if ((km < 0) == (klo < 0)) {
            lo_hz = mid;
            klo = km;
        } else {
            hi_hz = mid;
        }
    }
    return 0.5 * (lo_hz + hi_hz);
}

RegimeSpec regime_preset(const std::string& label)
{
    RegimeSpec r;
    r.label = label;
    r.sequence.flip_angle = 90;
    r.sequence.pulse_duration = 38e-6;
    r.sequence.interpulse_delay = 40e-6;
    if (label == "I") {
        r.eta = 1.5e-3;
    } else if (label == "II") {
        r.eta = 2.0e-3;
        r.nominal_detuning = 2250;
        r.sequence.detuning = kappa_root(r.sequence, 1500, 3500);
    } else if (label == "III") {
        r.eta = 3.4e-5;
        r.nominal_detuning = 5000;
        r.sequence.flip_angle = 5;
        // Same nutation rate as the 90 degree pulse.
        r.sequence.pulse_duration = 38e-6 * 5.0 / 90.0;
        r.sequence.detuning = 5000;
    } else {
        throw std::invalid_argument("unknown regime label: " + label);
    }
    return r;
}

LaserMap SimulationConfig::laser() const
{
    LaserMap m = LaserMap::anchored(inv_tau_c0, power_max);
    m.T2_low = T2_low;
    m.T2_high = T2_high;
    return m;
}

std::vector<double> log_times(double t0, double t1, int n)
{
    if (!(t0 > 0) || !(t1 > t0) || n < 2)
        throw std::invalid_argument("log_times: need 0 < t0 < t1 and n >= 2");
    std::vector<double> t(n);
    for (int i = 0; i < n; ++i)
        t[i] = t0 * std::pow(t1 / t0, double(i) / (n - 1));
    return t;
}

std::vector<double> default_times() { return log_times(1e-2, 600, 400); }

double effective_core_radius(const SimulationConfig& cfg)
{
    double rc = cfg.core.radius_override >= 0 ? cfg.core.radius_override
                                              : frozen_core_radius(cfg.core.a, cfg.core.B, cfg.core.T);
    if (cfg.core.cap_by_electron_spacing && cfg.conc.c_el > 0) {
        const double a = cfg.box.lattice_constant;
        const double n_e = cfg.conc.c_el * 8.0 / (a * a * a);
        rc = std::min(rc, 0.5 * std::cbrt(1.0 / n_e));
    }
    return rc;
}

DriveModel drive_model(const SimulationConfig& cfg)
{
    DriveModel d;
    d.floq = floquet_params(cfg.regime.sequence, cfg.sidebands, cfg.quad_steps);
    const LaserMap lm = cfg.laser();
    d.bath.tau_c = lm.tau_c(cfg.power);
    d.T2 = lm.T2(cfg.power);
    d.comb_weight = comb_spectral_weight(d.floq, d.bath);
    return d;
}

SpinRealization make_realization(const SimulationConfig& cfg, const Positions& sites, std::size_t index)
{
    const SpinRealization raw = populate(sites, cfg.box, cfg.conc, derive_seed(cfg.seed, index));
    return apply_frozen_core(raw, effective_core_radius(cfg));
}

GeneratorMatrices build_generator(const SimulationConfig& cfg, const DriveModel& drive, const SpinRealization& real)
{
    const CouplingTable<double> table = build_coupling_table(real, cfg.b_axis);
    GeneratorMatrices g;
    const Eigen::Index n = real.n_nuclei();
    g.W = cfg.hopping ? build_W<double>(table.d, drive.floq.kappa, drive.T2) : Eigen::MatrixXd::Zero(n, n);
    g.R = cfg.relaxation ? Eigen::VectorXd(-cfg.eta() * drive.comb_weight *
                                           table.h.array().square().rowwise().sum().matrix())
                         : Eigen::VectorXd::Zero(n);
    if (table.h.cols() == 0)
        g.R.setZero();
    return g;
}

RealizationSpectrum realization_spectrum(const SimulationConfig& cfg, const DriveModel& drive,
                                         const SpinRealization& real)
{
    RealizationSpectrum s;
    s.n_nuclei = static_cast<int>(real.n_nuclei());
    s.n_electrons = static_cast<int>(real.n_electrons());
    const GeneratorMatrices g = build_generator(cfg, drive, real);
    if (g.R.isZero(0)) {
        // Hopping alone conserves the total.
        s.lambdas = Eigen::VectorXd::Zero(1);
        s.amplitudes = Eigen::VectorXd::Ones(1);
        return s;
    }
    const Eigen::MatrixXd negM = -g.M();
    const Eigen::VectorXd ones = Eigen::VectorXd::Ones(s.n_nuclei);
    const auto ps = projected_eigensystem(negM, ones);
    s.lambdas = ps.lambdas;
    s.amplitudes = ps.proj.col(0).array().square() / double(s.n_nuclei);
    return s;
}

std::vector<double> total_polarization(const RealizationSpectrum& s, const std::vector<double>& times)
{
    std::vector<double> p(times.size());
    for (std::size_t k = 0; k < times.size(); ++k)
        p[k] = (s.amplitudes.array() * (-s.lambdas.array() * times[k]).exp()).sum();
    return p;
}

EnsembleResult ensemble_run(const SimulationConfig& cfg, bool keep_spectra)
{
    if (cfg.n_configs < 1)
        throw std::invalid_argument("ensemble: n_configs must be >= 1");
    const std::vector<double> times = cfg.times.empty() ? default_times() : cfg.times;
    const Positions sites = build_diamond_sites(cfg.box);
    const DriveModel drive = drive_model(cfg);

    struct Item {
        bool skipped = true;
        RealizationSpectrum spec;
        Eigen::ArrayXd curve;
    };
    std::vector<Item> items = parallel_map(cfg.n_configs, cfg.workers, [&](std::size_t i) {
        Item it;
        const SpinRealization real = make_realization(cfg, sites, i);
        if (real.n_nuclei() == 0)
            return it;
        it.skipped = false;
        it.spec = realization_spectrum(cfg, drive, real);
        const auto p = total_polarization(it.spec, times);
        it.curve = Eigen::Map<const Eigen::ArrayXd>(p.data(), p.size());
        return it;
    });

    EnsembleResult res;
    std::vector<std::size_t> used;
    for (std::size_t i = 0; i < items.size(); ++i)
        if (!items[i].skipped)
            used.push_back(i);
    res.curve.times = times;
    res.curve.regime = cfg.regime.label;
    res.curve.n_configs = static_cast<int>(used.size());
    res.curve.n_skipped = cfg.n_configs - res.curve.n_configs;
    if (res.curve.n_skipped > 0)
        std::cerr << "warning: " << res.curve.n_skipped << " realization(s) without nuclei skipped\n";
    if (used.empty())
        throw std::runtime_error("ensemble: every realization was empty");

    const std::size_t nu = used.size();
    const Eigen::ArrayXd sum = pairwise_sum<Eigen::ArrayXd>(0, nu, [&](std::size_t k) { return items[used[k]].curve; });
    const Eigen::ArrayXd mean = sum / double(nu);
    const Eigen::ArrayXd sq = pairwise_sum<Eigen::ArrayXd>(
        0, nu, [&](std::size_t k) { return Eigen::ArrayXd((items[used[k]].curve - mean).square()); });
    const Eigen::ArrayXd se = nu > 1 ? Eigen::ArrayXd((sq / double(nu - 1)).sqrt() / std::sqrt(double(nu)))
                                     : Eigen::ArrayXd::Zero(mean.size());
    const double norm = mean[0];
    for (Eigen::Index k = 0; k < mean.size(); ++k) {
        res.curve.values.push_back(mean[k] / norm);
        res.curve.stderr_.push_back(se[k] / norm);
    }
    res.skipped.resize(items.size());
    if (keep_spectra)
        res.spectra.resize(items.size());
    for (std::size_t i = 0; i < items.size(); ++i) {
        res.skipped[i] = items[i].skipped;
        if (keep_spectra)
            res.spectra[i] = std::move(items[i].spec);
    }
    return res;
}

DecayCurve ensemble_decay(const SimulationConfig& cfg) { return ensemble_run(cfg, false).curve; }

} // namespace spinnet
