#include "spinnet/transport.hpp"

#include "spinnet/parallel.hpp"
#include "spinnet/random.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace spinnet {

std::vector<double> default_transport_times() { return log_times(1e-4, 1e4, 161); }

std::vector<double> msd(const Eigen::MatrixXd& p, const Positions& rel)
{
    if (p.rows() != rel.rows())
        throw std::invalid_argument("msd: trajectory and positions disagree");
    const Eigen::VectorXd r2 = rel.rowwise().squaredNorm();
    std::vector<double> out(p.cols());
    for (Eigen::Index k = 0; k < p.cols(); ++k) {
        if (std::abs(p.col(k).sum() - 1) > 1e-6)
            throw std::runtime_error("msd: polarization not conserved");
        out[k] = r2.dot(p.col(k));
    }
    return out;
}

FrontCutoff front_cutoff(const std::vector<double>& times, const std::vector<double>& shell_total, double threshold)
{
    if (!(threshold > 0 && threshold <= 1))
        throw std::invalid_argument("front_cutoff: threshold must lie in (0, 1]");
    if (times.empty() || times.size() != shell_total.size())
        throw std::invalid_argument("front_cutoff: size mismatch");
    FrontCutoff c;
    for (std::size_t k = 0; k < times.size(); ++k)
        if (shell_total[k] > threshold && threshold < 1) {
            c.t_cutoff = times[k];
            c.index = k;
            return c;
        }
    c.t_cutoff = times.back();
    c.index = times.size();
    c.flagged = true;
    return c;
}

TransportFit fit_transport(const std::vector<double>& times, const std::vector<double>& msd_values, double t_cutoff,
                           double t_min)
{
    if (times.size() != msd_values.size())
        throw std::invalid_argument("fit_transport: size mismatch");
    std::vector<double> x, y;
    for (std::size_t k = 0; k < times.size(); ++k)
        if (times[k] >= t_min && times[k] < t_cutoff && times[k] > 0 && msd_values[k] > 0) {
            x.push_back(std::log(times[k]));
            y.push_back(std::log(msd_values[k]));
        }
    if (x.size() < 20 || (x.back() - x.front()) / std::log(10.0) < 1.5)
        throw std::runtime_error("fit_transport: need >= 20 points spanning >= 1.5 decades below the cutoff");
    const std::size_t n = x.size();
    Eigen::MatrixXd A(n, 2);
    Eigen::VectorXd b(n);
    for (std::size_t i = 0; i < n; ++i) {
        A(i, 0) = 1;
        A(i, 1) = x[i];
        b[i] = y[i];
    }
    const Eigen::Vector2d c = A.colPivHouseholderQr().solve(b);
    const double s2 = (A * c - b).squaredNorm() / double(n - 2);
    const Eigen::Matrix2d cov = s2 * (A.transpose() * A).inverse();
    TransportFit f;
    f.alpha = c[1];
    f.alpha_err = std::sqrt(cov(1, 1));
    f.D = std::exp(c[0]) / 6;
    f.D_err = f.D * std::sqrt(cov(0, 0));
    f.window = {std::exp(x.front()), std::exp(x.back())};
    f.n_points = static_cast<int>(n);
    return f;
}

Trajectory transport_trajectory(const TransportConfig& cfg, double kappa, const Positions& sites, std::size_t index)
{
    const std::vector<double> times = cfg.times.empty() ? default_transport_times() : cfg.times;
    Concentrations conc{cfg.c_nuc, 0};
    const SpinRealization real = populate(sites, cfg.box, conc, derive_seed(cfg.seed, index));
    Trajectory tr;
    tr.n_nuclei = static_cast<int>(real.n_nuclei());
    if (tr.n_nuclei < 2)
        throw std::runtime_error("transport: fewer than two nuclei in the box");
    const double L = cfg.box.side_length;
    const Vec3 center = Vec3::Constant(L / 2);
    Eigen::Index i0 = 0;
    (real.nuclei.rowwise() - center.transpose()).rowwise().squaredNorm().minCoeff(&i0);

    const Eigen::Index n = real.n_nuclei();
    Positions rel(n, 3);
    for (Eigen::Index i = 0; i < n; ++i)
        rel.row(i) = min_image(real.nuclei.row(i0).transpose(), real.nuclei.row(i).transpose(), L).transpose();

    const Eigen::MatrixXd d = build_nn_table(real.nuclei, L, cfg.b_axis);
    const Eigen::MatrixXd W = build_W<double>(d, kappa, cfg.T2);

    Eigen::MatrixXd X(n, 7);
    X.col(0).setZero();
    X(i0, 0) = 1;
    X.col(1) = rel.rowwise().squaredNorm();
    for (int a = 0; a < 3; ++a)
        X.col(2 + a) = rel.col(a).array().square();
    const double edge = L / 2 - cfg.box.lattice_constant;
    for (Eigen::Index i = 0; i < n; ++i)
        X(i, 5) = rel.row(i).cwiseAbs().maxCoeff() > edge ? 1.0 : 0.0;
    X.col(6).setOnes();

    const auto ps = projected_eigensystem(Eigen::MatrixXd(-W), X);
    const std::size_t T = times.size();
    tr.msd.resize(T);
    tr.shell.resize(T);
    for (auto& m : tr.second_moment)
        m.resize(T);
    const Eigen::ArrayXd w0 = ps.proj.col(0).array();
    for (std::size_t k = 0; k < T; ++k) {
        const Eigen::ArrayXd e = (-ps.lambdas.array() * times[k]).exp() * w0;
        auto q = [&](int r) { return (e * ps.proj.col(r).array()).sum(); };
        tr.msd[k] = q(1);
        for (int a = 0; a < 3; ++a)
            tr.second_moment[a][k] = q(2 + a);
        tr.shell[k] = q(5);
        tr.max_drift = std::max(tr.max_drift, std::abs(q(6) - 1));
    }
    if (tr.max_drift > 1e-6)
        throw std::runtime_error("transport: polarization not conserved");
    tr.cutoff = front_cutoff(times, tr.shell, cfg.front_threshold);
    return tr;
}

namespace {

double median(std::vector<double> v)
{
    std::sort(v.begin(), v.end());
    const std::size_t n = v.size();
    return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

void mean_stderr(const std::vector<Trajectory>& trs, const std::vector<double> Trajectory::*field,
                 std::vector<double>& mean, std::vector<double>& se)
{
    const std::size_t n = trs.size(), T = (trs[0].*field).size();
    mean.assign(T, 0);
    se.assign(T, 0);
    for (std::size_t k = 0; k < T; ++k) {
        const Eigen::ArrayXd col = pairwise_sum<Eigen::ArrayXd>(0, n, [&](std::size_t i) {
            Eigen::ArrayXd v(2);
            v << (trs[i].*field)[k], (trs[i].*field)[k] * (trs[i].*field)[k];
            return v;
        });
        mean[k] = col[0] / n;
        if (n > 1)
            se[k] = std::sqrt(std::max(0.0, col[1] / n - mean[k] * mean[k]) * n / (n - 1) / n);
    }
}

} // namespace

TransportResult run_transport(const TransportConfig& cfg)
{
    if (cfg.n_configs < 1)
        throw std::invalid_argument("transport: n_configs must be >= 1");
    const double kappa_v = kappa(cfg.regime.sequence, cfg.quad_steps);
    const Positions sites = build_diamond_sites(cfg.box);
    const std::vector<Trajectory> trs = parallel_map(
        cfg.n_configs, cfg.workers, [&](std::size_t i) { return transport_trajectory(cfg, kappa_v, sites, i); });

    TransportResult res;
    res.kappa = kappa_v;
    res.n_configs = cfg.n_configs;
    res.times = cfg.times.empty() ? default_transport_times() : cfg.times;
    mean_stderr(trs, &Trajectory::msd, res.msd, res.msd_stderr);
    std::vector<double> cut;
    for (const auto& t : trs) {
        cut.push_back(t.cutoff.t_cutoff);
        res.n_flagged += t.cutoff.flagged;
    }
    res.t_cutoff = median(cut);
    for (int a = 0; a < 3; ++a) {
        std::vector<double> m(res.times.size()), s(res.times.size());
        const std::size_t n = trs.size();
        for (std::size_t k = 0; k < res.times.size(); ++k) {
            double s1 = 0, s2 = 0;
            for (const auto& t : trs) {
                s1 += t.second_moment[a][k];
                s2 += t.second_moment[a][k] * t.second_moment[a][k];
            }
            m[k] = s1 / n;
            s[k] = n > 1 ? std::sqrt(std::max(0.0, s2 / n - m[k] * m[k]) / (n - 1)) : 0;
        }
        res.axis_moment[a] = std::move(m);
        res.axis_stderr[a] = std::move(s);
    }
    const TransportFit f =
        fit_transport(res.times, res.msd, res.t_cutoff, res.t_cutoff * std::pow(10.0, -cfg.window_decades));
    res.D = f.D;
    res.alpha = f.alpha;
    res.D_err = f.D_err;
    res.alpha_err = f.alpha_err;
    res.window = f.window;
    res.n_points = f.n_points;
    return res;
}

std::vector<FiniteSizeRow> finite_size_scan(const TransportConfig& base, const std::vector<int>& cells, int runs,
                                            int per_run)
{
    if (runs < 1 || per_run < 1)
        throw std::invalid_argument("finite_size_scan: runs and per_run must be >= 1");
    std::vector<FiniteSizeRow> rows;
    for (std::size_t s = 0; s < cells.size(); ++s) {
        FiniteSizeRow row;
        row.cells = cells[s];
        row.n_sites = 8.0 * std::pow(cells[s], 3);
        row.n_nuclei = base.c_nuc * row.n_sites;
        row.n_inv_third = std::cbrt(1.0 / row.n_nuclei);
        std::vector<double> al, dd, tc;
        for (int r = 0; r < runs; ++r) {
            TransportConfig cfg = base;
            cfg.box = BoxGeometry::from_cells(cells[s], base.box.lattice_constant);
            cfg.n_configs = per_run;
            cfg.seed = derive_seed(base.seed, s * 1000 + r, 2);
            const TransportResult tr = run_transport(cfg);
            al.push_back(tr.alpha);
            dd.push_back(tr.D);
            tc.push_back(tr.t_cutoff);
        }
        auto stats = [runs](const std::vector<double>& v, double& m, double& e) {
            const Eigen::Map<const Eigen::ArrayXd> a(v.data(), v.size());
            m = a.mean();
            e = runs > 1 ? std::sqrt((a - m).square().sum() / (runs - 1) / runs) : 0;
        };
        stats(al, row.alpha, row.alpha_err);
        stats(dd, row.D, row.D_err);
        row.t_cutoff = median(tc);
        rows.push_back(row);
    }
    return rows;
}

} // namespace spinnet
