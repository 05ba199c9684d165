#include "spinnet/scans.hpp"

#include "spinnet/parallel.hpp"
#include "spinnet/random.hpp"

#include "json.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <numeric>
#include <stdexcept>

namespace spinnet {

double one_over_e_time(const std::vector<double>& t, const std::vector<double>& y, bool* reached)
{
    const double target = std::exp(-1.0);
    if (reached)
        *reached = false;
    for (std::size_t k = 0; k < y.size(); ++k) {
        if (y[k] > target)
            continue;
        if (reached)
            *reached = true;
        if (k == 0)
            return t[0];
        const double l0 = std::log(t[k - 1]), l1 = std::log(t[k]);
        const double f = (y[k - 1] - target) / (y[k - 1] - y[k]);
        return std::exp(l0 + f * (l1 - l0));
    }
    return t.empty() ? 0 : t.back();
}

FitOptions regime_fit_options(const std::string& label)
{
    FitOptions o;
    o.fix_rd_zero = label == "II";
    o.fix_rp_zero = label == "III";
    return o;
}

std::vector<LaserRow> laser_scan(const SimulationConfig& base, const std::vector<double>& powers, int batches)
{
    for (std::size_t i = 1; i < powers.size(); ++i)
        if (powers[i] < powers[i - 1])
            throw std::invalid_argument("laser_scan: powers must be ascending");
    if (batches < 1 || batches > base.n_configs)
        throw std::invalid_argument("laser_scan: batches must lie in [1, n_configs]");
    const FitOptions opt = regime_fit_options(base.regime.label);
    std::vector<LaserRow> rows;
    for (double P : powers) {
        SimulationConfig cfg = base;
        cfg.power = P;
        const EnsembleResult er = ensemble_run(cfg, true);
        LaserRow row;
        row.power = P;
        const LaserMap lm = cfg.laser();
        row.inv_tau_c = lm.inv_tau_c(P);
        row.T2 = lm.T2(P);
        row.fit = fit_emergent(er.curve.times, er.curve.values, opt);
        row.t_one_over_e = one_over_e_time(er.curve.times, er.curve.values);
        if (batches > 1) {
            std::vector<double> rp, rd;
            const int per = base.n_configs / batches;
            for (int b = 0; b < batches; ++b) {
                Eigen::ArrayXd sum = Eigen::ArrayXd::Zero(er.curve.times.size());
                int used = 0;
                for (int i = b * per; i < (b + 1) * per; ++i) {
                    if (er.skipped[i])
                        continue;
                    const auto p = total_polarization(er.spectra[i], er.curve.times);
                    sum += Eigen::Map<const Eigen::ArrayXd>(p.data(), p.size());
                    ++used;
                }
                if (used == 0)
                    continue;
                sum /= sum[0];
                const FitResult f = fit_emergent(er.curve.times, std::vector<double>(sum.begin(), sum.end()), opt);
                rp.push_back(f.R_p);
                rd.push_back(f.R_d);
            }
            auto se = [](const std::vector<double>& v) {
                if (v.size() < 2)
                    return 0.0;
                const double m = std::accumulate(v.begin(), v.end(), 0.0) / v.size();
                double s = 0;
                for (double x : v)
                    s += (x - m) * (x - m);
                return std::sqrt(s / (v.size() - 1) / v.size());
            };
            row.R_p_err = se(rp);
            row.R_d_err = se(rd);
        }
        rows.push_back(row);
    }
    return rows;
}

double pearson(const std::vector<double>& x, const std::vector<double>& y)
{
    if (x.size() != y.size() || x.size() < 2)
        throw std::invalid_argument("pearson: need two equal-length series");
    const Eigen::Map<const Eigen::ArrayXd> a(x.data(), x.size()), b(y.data(), y.size());
    const Eigen::ArrayXd da = a - a.mean(), db = b - b.mean();
    const double den = std::sqrt(da.square().sum() * db.square().sum());
    return den > 0 ? (da * db).sum() / den : 0;
}

std::vector<double> landscape_times() { return log_times(1e-5, 600, 781); }

LandscapeCell landscape_cell(const SimulationConfig& base, double c_nuc, double c_el)
{
    SimulationConfig cfg = base;
    cfg.conc.c_nuc = c_nuc;
    cfg.conc.c_el = c_el;
    if (cfg.times.empty())
        cfg.times = landscape_times();
    LandscapeCell cell;
    cell.c_nuc = c_nuc;
    cell.c_el = c_el;
    DecayCurve curve;
    try {
        curve = ensemble_decay(cfg);
    } catch (const std::runtime_error&) {
        cell.tag = "invalid";
        cell.ratio_log10 = std::numeric_limits<double>::quiet_NaN();
        return cell;
    }
    cell.n_configs = curve.n_configs;
    cell.t_one_over_e = one_over_e_time(curve.times, curve.values);
    cell.p_last = curve.values.back();
    const FitResult two = fit_emergent(curve.times, curve.values);
    FitOptions s;
    s.fix_rd_zero = true;
    FitOptions m;
    m.fix_rp_zero = true;
    cell.R_p = two.R_p;
    cell.R_d = two.R_d;
    cell.rrms_two = two.rrms;
    cell.rrms_stretched = fit_emergent(curve.times, curve.values, s).rrms;
    cell.rrms_mono = fit_emergent(curve.times, curve.values, m).rrms;
    if (two.rd_at_bound && !two.rp_at_bound)
        cell.tag = "diffusion-limited";
    else if (two.rp_at_bound && !two.rd_at_bound)
        cell.tag = "diffusion-dominated";
    else if (two.rp_at_bound && two.rd_at_bound)
        cell.tag = "invalid";
    else
        cell.tag = "intermediate";
    cell.ratio_log10 = cell.tag == "intermediate" ? std::log10(two.R_p / two.R_d)
                                                   : std::numeric_limits<double>::quiet_NaN();
    return cell;
}

namespace {

nlohmann::json cell_json(const LandscapeCell& c)
{
    return {{"c_nuc", c.c_nuc},   {"c_el", c.c_el},       {"R_p", c.R_p},
            {"R_d", c.R_d},       {"tag", c.tag},         {"n_configs", c.n_configs},
            {"rrms_two", c.rrms_two}, {"rrms_stretched", c.rrms_stretched}, {"rrms_mono", c.rrms_mono},
            {"t_one_over_e", c.t_one_over_e}, {"p_last", c.p_last}};
}

LandscapeCell cell_from_json(const nlohmann::json& j)
{
    LandscapeCell c;
    c.c_nuc = j.at("c_nuc");
    c.c_el = j.at("c_el");
    c.R_p = j.at("R_p");
    c.R_d = j.at("R_d");
    c.tag = j.at("tag");
    c.n_configs = j.at("n_configs");
    c.rrms_two = j.at("rrms_two");
    c.rrms_stretched = j.at("rrms_stretched");
    c.rrms_mono = j.at("rrms_mono");
    c.t_one_over_e = j.at("t_one_over_e");
    c.p_last = j.at("p_last");
    c.ratio_log10 = c.tag == "intermediate" ? std::log10(c.R_p / c.R_d) : std::numeric_limits<double>::quiet_NaN();
    return c;
}

} // namespace

std::vector<LandscapeCell> landscape(const SimulationConfig& base, const std::vector<double>& c_nuc_grid,
                                     const std::vector<double>& c_el_grid, const std::optional<std::string>& checkpoint)
{
    for (double c : c_nuc_grid)
        if (c < 0.002 - 1e-12 || c > 0.2 + 1e-12)
            throw std::invalid_argument("landscape: c_nuc outside [0.002, 0.2]");
    for (double c : c_el_grid)
        if (c < 2e-6 - 1e-15 || c > 3000e-6 + 1e-12)
            throw std::invalid_argument("landscape: c_el outside [2, 3000] ppm");
    std::vector<LandscapeCell> done;
    if (checkpoint) {
        std::ifstream in(*checkpoint);
        for (std::string line; std::getline(in, line);)
            if (!line.empty())
                done.push_back(cell_from_json(nlohmann::json::parse(line)));
    }
    std::ofstream out;
    if (checkpoint)
        out.open(*checkpoint, std::ios::app);
    std::vector<LandscapeCell> cells;
    for (double cn : c_nuc_grid)
        for (double ce : c_el_grid) {
            auto hit = std::find_if(done.begin(), done.end(), [&](const LandscapeCell& c) {
                return std::abs(c.c_nuc - cn) <= 1e-12 * cn && std::abs(c.c_el - ce) <= 1e-12 * ce;
            });
            if (hit != done.end()) {
                cells.push_back(*hit);
                continue;
            }
            cells.push_back(landscape_cell(base, cn, ce));
            if (checkpoint)
                out << cell_json(cells.back()).dump() << '\n' << std::flush;
        }
    return cells;
}

std::vector<SliceRow> concentration_slice(const SimulationConfig& base, const std::vector<double>& c_nuc_list)
{
    std::vector<SliceRow> rows;
    for (double c : c_nuc_list) {
        SimulationConfig cfg = base;
        cfg.conc.c_nuc = c;
        if (cfg.times.empty())
            cfg.times = landscape_times();
        const DecayCurve curve = ensemble_decay(cfg);
        SliceRow r;
        r.c_nuc = c;
        r.fit = fit_emergent(curve.times, curve.values);
        r.t_one_over_e = one_over_e_time(curve.times, curve.values);
        rows.push_back(r);
    }
    return rows;
}

int ordered_box_cells(double c_el)
{
    if (!(c_el > 0))
        throw std::invalid_argument("ordered_box_cells: c_el must be positive");
    return std::max(2, static_cast<int>(std::lround(std::cbrt(8.0 / (8.0 * c_el)))));
}

namespace {

// Electron site indices: octant centers, or eight distinct random sites.
std::vector<Eigen::Index> electron_sites(const Positions& sites, double L, bool ordered, Rng& rng)
{
    std::vector<Eigen::Index> idx;
    if (ordered) {
        for (int o = 0; o < 8; ++o) {
            const Vec3 c((o & 1 ? 0.75 : 0.25) * L, (o & 2 ? 0.75 : 0.25) * L, (o & 4 ? 0.75 : 0.25) * L);
            Eigen::Index best = 0;
            (sites.rowwise() - c.transpose()).rowwise().squaredNorm().minCoeff(&best);
            idx.push_back(best);
        }
        return idx;
    }
    while (idx.size() < 8) {
        const auto k = static_cast<Eigen::Index>(rng.uniform() * sites.rows());
        if (std::find(idx.begin(), idx.end(), k) == idx.end())
            idx.push_back(k);
    }
    return idx;
}

SpinRealization octant_realization(const SimulationConfig& cfg, const Positions& sites, std::uint64_t seed,
                                   bool ordered)
{
    Rng nuc(derive_seed(seed, 0, 1)), el(derive_seed(seed, 0, 0));
    const std::vector<Eigen::Index> eidx = electron_sites(sites, cfg.box.side_length, ordered, el);
    SpinRealization r;
    r.box = cfg.box;
    r.seed = seed;
    r.electrons.resize(8, 3);
    for (int k = 0; k < 8; ++k)
        r.electrons.row(k) = sites.row(eidx[k]);
    std::vector<Eigen::Index> keep;
    for (Eigen::Index i = 0; i < sites.rows(); ++i) {
        const bool hit = nuc.uniform() < cfg.conc.c_nuc;
        if (hit && std::find(eidx.begin(), eidx.end(), i) == eidx.end())
            keep.push_back(i);
    }
    r.nuclei.resize(static_cast<Eigen::Index>(keep.size()), 3);
    for (std::size_t k = 0; k < keep.size(); ++k)
        r.nuclei.row(k) = sites.row(keep[k]);
    return apply_frozen_core(r, effective_core_radius(cfg));
}

DecayCurve curve_from(const std::vector<std::vector<double>>& ps, const std::vector<double>& times,
                      const std::string& label)
{
    DecayCurve c;
    c.times = times;
    c.regime = label;
    c.n_configs = static_cast<int>(ps.size());
    Eigen::ArrayXd s = pairwise_sum<Eigen::ArrayXd>(0, ps.size(), [&](std::size_t i) {
        return Eigen::ArrayXd(Eigen::Map<const Eigen::ArrayXd>(ps[i].data(), ps[i].size()));
    });
    s /= s[0];
    c.values.assign(s.begin(), s.end());
    c.stderr_.assign(times.size(), 0);
    return c;
}

} // namespace

OrderedVsRandom ordered_vs_random(const SimulationConfig& base, int n_trials, int per_trial)
{
    if (n_trials < 1 || per_trial < 1)
        throw std::invalid_argument("ordered_vs_random: need at least one trial");
    SimulationConfig cfg = base;
    const std::vector<double> times = cfg.times.empty() ? default_times() : cfg.times;
    const Positions sites = build_diamond_sites(cfg.box);
    const DriveModel drive = drive_model(cfg);
    const std::size_t total = static_cast<std::size_t>(n_trials) * per_trial;
    struct Pair {
        std::vector<double> ordered, random;
    };
    const std::vector<Pair> pairs = parallel_map(total, cfg.workers, [&](std::size_t i) {
        const std::uint64_t s = derive_seed(cfg.seed, i);
        Pair p;
        for (bool ordered : {true, false}) {
            const SpinRealization r = octant_realization(cfg, sites, s, ordered);
            std::vector<double> v(times.size(), 1.0);
            if (r.n_nuclei() > 0)
                v = total_polarization(realization_spectrum(cfg, drive, r), times);
            (ordered ? p.ordered : p.random) = std::move(v);
        }
        return p;
    });
    OrderedVsRandom out;
    std::vector<std::vector<double>> all_o, all_r;
    int wins = 0;
    for (int t = 0; t < n_trials; ++t) {
        std::vector<std::vector<double>> o, r;
        for (int k = 0; k < per_trial; ++k) {
            o.push_back(pairs[t * per_trial + k].ordered);
            r.push_back(pairs[t * per_trial + k].random);
        }
        all_o.insert(all_o.end(), o.begin(), o.end());
        all_r.insert(all_r.end(), r.begin(), r.end());
        OrderedTrial tr;
        tr.ordered = curve_from(o, times, "ordered");
        tr.random = curve_from(r, times, "random");
        tr.t_ordered = one_over_e_time(times, tr.ordered.values);
        tr.t_random = one_over_e_time(times, tr.random.values);
        tr.random_slower = tr.t_random > tr.t_ordered;
        wins += tr.random_slower;
        out.trials.push_back(std::move(tr));
    }
    out.ordered = curve_from(all_o, times, "ordered");
    out.random = curve_from(all_r, times, "random");
    out.fraction_random_slower = double(wins) / n_trials;
    return out;
}

std::vector<double> default_decoupling_grid(double inv_tau_c0)
{
    std::vector<double> g;
    for (double f : {0.5, 1.0, 1.5, 2.0, 5.0, 10.0, 20.0, 50.0, 100.0, 200.0, 500.0})
        g.push_back(f * inv_tau_c0);
    return g;
}

DecouplingScan optical_decoupling_extrapolation(const SimulationConfig& base, const std::vector<double>& inv_tau_c)
{
    if (inv_tau_c.size() < 3)
        throw std::invalid_argument("optical_decoupling: need at least three grid points");
    DecouplingScan s;
    for (double r : inv_tau_c) {
        SimulationConfig cfg = base;
        cfg.inv_tau_c0 = r;
        cfg.power = 0;
        const DecayCurve c = ensemble_decay(cfg);
        s.rows.push_back({r, fit_emergent(c.times, c.values)});
    }
    for (std::size_t i = 1; i < s.rows.size(); ++i)
        if (s.rows[i].fit.R_p > s.rows[s.argmax].fit.R_p)
            s.argmax = i;
    s.interior_max = s.argmax > 0 && s.argmax + 1 < s.rows.size();
    s.monotone_after = true;
    for (std::size_t i = s.argmax + 1; i < s.rows.size(); ++i)
        if (!(s.rows[i].fit.R_p < s.rows[i - 1].fit.R_p))
            s.monotone_after = false;
    return s;
}

ChannelSuppression channel_suppression(const SimulationConfig& base, std::size_t realization)
{
    const Positions sites = build_diamond_sites(base.box);
    const SpinRealization real = make_realization(base, sites, realization);
    auto gen = [&](const std::string& label) {
        SimulationConfig cfg = base;
        cfg.regime = regime_preset(label);
        cfg.eta_override = -1;
        return build_generator(cfg, drive_model(cfg), real);
    };
    const GeneratorMatrices g1 = gen("I"), g2 = gen("II"), g3 = gen("III");
    auto max_off = [](const Eigen::MatrixXd& W) {
        Eigen::MatrixXd o = W;
        o.diagonal().setZero();
        return o.cwiseAbs().maxCoeff();
    };
    ChannelSuppression c;
    c.max_W_ratio = max_off(g2.W) / max_off(g1.W);
    c.mean_R_ratio = g3.R.cwiseAbs().mean() / g1.R.cwiseAbs().mean();
    return c;
}

} // namespace spinnet
