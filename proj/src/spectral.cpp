#include "spinnet/spectral.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace spinnet {

double reconstruct_total(const ModeSet& s, double t)
{
    return (s.amplitudes.array() * (-s.lambdas.array() * t).exp()).sum();
}

AsymptoticValue asymptotic_form(const ModeSet& s, double t)
{
    if (s.lambdas.size() == 0 || s.amplitudes[0] == 0)
        throw std::invalid_argument("asymptotic_form: slowest mode unpopulated");
    const double a0 = s.amplitudes[0], l0 = s.lambdas[0];
    double corr = 0, max_ratio = 0;
    for (Eigen::Index j = 1; j < s.lambdas.size(); ++j) {
        corr += s.amplitudes[j] * std::exp(-(s.lambdas[j] - l0) * t);
        max_ratio = std::max(max_ratio, std::abs(s.amplitudes[j] / a0));
    }
    AsymptoticValue v;
    v.value = a0 * std::exp(-l0 * t) * std::exp(corr / a0);
    if (s.lambdas.size() > 1)
        v.valid = !(max_ratio >= 1 && (s.lambdas[1] - l0) * t < 1);
    return v;
}

SlowestModeStats slowest_mode_stats(const std::vector<RealizationSpectrum>& spectra, double zero_tol)
{
    SlowestModeStats st;
    std::vector<double> l0;
    for (const auto& s : spectra) {
        if (s.lambdas.size() == 0)
            continue;
        if (std::abs(s.lambdas[0]) <= zero_tol) {
            ++st.n_zero_modes;
            continue;
        }
        l0.push_back(s.lambdas[0]);
    }
    st.n_used = static_cast<int>(l0.size());
    if (l0.empty())
        return st;
    const Eigen::Map<const Eigen::ArrayXd> a(l0.data(), l0.size());
    st.mean = a.mean();
    if (l0.size() > 1)
        st.stderr_ = std::sqrt((a - st.mean).square().sum() / (l0.size() - 1) / l0.size());
    return st;
}

RpComparison rp_dep_comparison(const SimulationConfig& cfg)
{
    RpComparison c;
    const DecayCurve full = ensemble_decay(cfg);
    SimulationConfig nohop = cfg;
    nohop.hopping = false;
    const DecayCurve bare = ensemble_decay(nohop);
    c.full = fit_emergent(full.times, full.values);
    FitOptions o;
    o.fix_rd_zero = true;
    c.no_hopping = fit_emergent(bare.times, bare.values, o);
    c.ratio = c.no_hopping.R_p > 0 ? c.full.R_p / c.no_hopping.R_p : 0;
    return c;
}

Heatmap mode_profile_2d(const Positions& nuclei, const Eigen::VectorXd& amplitude, double side, int bins)
{
    if (bins < 1 || !(side > 0))
        throw std::invalid_argument("mode_profile_2d: invalid grid");
    if (amplitude.size() != nuclei.rows())
        throw std::invalid_argument("mode_profile_2d: amplitude size mismatch");
    Heatmap h;
    h.bins = bins;
    h.side = side;
    h.value = Eigen::MatrixXd::Zero(bins, bins);
    const double dx = side / bins;
    for (Eigen::Index i = 0; i < nuclei.rows(); ++i) {
        const double gx = nuclei(i, 0) / dx - 0.5, gy = nuclei(i, 1) / dx - 0.5;
        const double fx = std::floor(gx), fy = std::floor(gy);
        const double wx = gx - fx, wy = gy - fy;
        const int ix = static_cast<int>(fx), iy = static_cast<int>(fy);
        const double v = std::abs(amplitude[i]);
        auto wrap = [bins](int k) { return ((k % bins) + bins) % bins; };
        h.value(wrap(ix), wrap(iy)) += v * (1 - wx) * (1 - wy);
        h.value(wrap(ix + 1), wrap(iy)) += v * wx * (1 - wy);
        h.value(wrap(ix), wrap(iy + 1)) += v * (1 - wx) * wy;
        h.value(wrap(ix + 1), wrap(iy + 1)) += v * wx * wy;
    }
    return h;
}

double cosine_similarity(const Heatmap& a, const Heatmap& b)
{
    const double na = a.value.norm(), nb = b.value.norm();
    if (na == 0 || nb == 0)
        return 0;
    return (a.value.array() * b.value.array()).sum() / (na * nb);
}

double spectral_gap_ratio(const Eigen::VectorXd& lambdas, double zero_tol)
{
    std::vector<double> pos;
    for (Eigen::Index i = 0; i < lambdas.size(); ++i)
        if (lambdas[i] > zero_tol)
            pos.push_back(lambdas[i]);
    std::sort(pos.begin(), pos.end());
    double g = 1;
    for (std::size_t i = 1; i < pos.size(); ++i)
        g = std::max(g, pos[i] / pos[i - 1]);
    return g;
}

std::vector<SpectrumEntry> eigenvalue_spectrum(const SimulationConfig& base, const std::vector<double>& c_nuc_list)
{
    std::vector<SpectrumEntry> out;
    const DriveModel drive = drive_model(base);
    const Positions sites = build_diamond_sites(base.box);
    for (double c : c_nuc_list) {
        SimulationConfig cfg = base;
        cfg.conc.c_nuc = c;
        const SpinRealization real = make_realization(cfg, sites, 0);
        SpectrumEntry e;
        e.c_nuc = c;
        if (real.n_nuclei() > 0) {
            const GeneratorMatrices g = build_generator(cfg, drive, real);
            Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(-g.M(), Eigen::EigenvaluesOnly);
            e.lambdas = es.eigenvalues();
            e.gap_ratio = spectral_gap_ratio(e.lambdas);
        }
        out.push_back(std::move(e));
    }
    return out;
}

} // namespace spinnet
