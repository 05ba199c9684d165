#include "spinnet/fitkit.hpp"

#include "spinnet/constants.hpp"
#include "spinnet/random.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace spinnet {

double emergent_model(double t, double R_p, double R_d, double gamma)
{
    return std::exp(-std::pow(R_p * t, gamma) - R_d * t);
}

namespace {

// 0.5 x^T G x - g^T x over x >= 0 with some coordinates pinned at 0.
struct Quadratic {
    Eigen::Matrix2d G;
    Eigen::Vector2d g;
    double c;
    bool pinned[2];

    double value(const Eigen::Vector2d& x) const { return 0.5 * x.dot(G * x) - g.dot(x) + c; }
    Eigen::Vector2d grad(const Eigen::Vector2d& x) const { return G * x - g; }
};

Eigen::Vector2d project(Eigen::Vector2d x, const bool pinned[2])
{
    for (int i = 0; i < 2; ++i)
        x[i] = pinned[i] ? 0.0 : std::max(0.0, x[i]);
    return x;
}

double projected_grad_norm(const Quadratic& q, const Eigen::Vector2d& x)
{
    const Eigen::Vector2d gr = q.grad(x);
    double s = 0;
    for (int i = 0; i < 2; ++i) {
        if (q.pinned[i])
            continue;
        const double gi = (x[i] > 0) ? gr[i] : std::min(0.0, gr[i]);
        s += gi * gi;
    }
    return std::sqrt(s);
}

struct Descent {
    Eigen::Vector2d x;
    std::vector<double> trace;
    bool converged = false;
};

// Projected Newton on the free set with Armijo backtracking along the projection arc.
Descent minimize(const Quadratic& q, Eigen::Vector2d x, double tol)
{
    Descent d;
    x = project(x, q.pinned);
    double f = q.value(x);
    d.trace.push_back(f);
    for (int it = 0; it < 200; ++it) {
        if (projected_grad_norm(q, x) <= tol) {
            d.converged = true;
            break;
        }
        const Eigen::Vector2d gr = q.grad(x);
        bool freev[2];
        for (int i = 0; i < 2; ++i)
            freev[i] = !q.pinned[i] && (x[i] > 0 || gr[i] < 0);
        Eigen::Vector2d dir = Eigen::Vector2d::Zero();
        if (freev[0] && freev[1]) {
            dir = -q.G.ldlt().solve(gr);
        } else {
            for (int i = 0; i < 2; ++i)
                if (freev[i] && q.G(i, i) > 0)
                    dir[i] = -gr[i] / q.G(i, i);
        }
        if (dir.dot(gr) >= 0)
            dir = -gr.cwiseProduct(Eigen::Vector2d(freev[0], freev[1]));
        double step = 1;
        bool accepted = false;
        for (int ls = 0; ls < 60; ++ls) {
            const Eigen::Vector2d xn = project(x + step * dir, q.pinned);
            const double fn = q.value(xn);
            if (fn <= f + 1e-4 * gr.dot(xn - x) && fn <= f) {
                accepted = fn < f || (xn - x).norm() == 0;
                x = xn;
                f = fn;
                break;
            }
            step *= 0.5;
        }
        d.trace.push_back(f);
        if (!accepted) {
            d.converged = projected_grad_norm(q, x) <= std::sqrt(tol);
            break;
        }
    }
    d.x = x;
    return d;
}

double one_over_e_time(const std::vector<double>& t, const std::vector<double>& y)
{
    const double target = std::exp(-1.0);
    for (std::size_t i = 1; i < t.size(); ++i)
        if (y[i] <= target && y[i - 1] > target) {
            const double f = (std::log(y[i - 1]) + 1.0) / (std::log(y[i - 1]) - std::log(y[i]));
            return t[i - 1] + f * (t[i] - t[i - 1]);
        }
    // Extrapolate from the last point assuming a single exponential.
    const double rate = -std::log(std::max(y.back(), 1e-300)) / t.back();
    return rate > 0 ? 1.0 / rate : t.back();
}

} // namespace

FitResult fit_emergent(const std::vector<double>& t_in, const std::vector<double>& y_in, const FitOptions& opt)
{
    if (t_in.size() != y_in.size())
        throw std::invalid_argument("fit_emergent: size mismatch");
    if (!(opt.gamma > 0))
        throw std::invalid_argument("fit_emergent: gamma must be positive");
    FitWindow w = opt.window.value_or(FitWindow{t_in.empty() ? 0 : t_in.front(), t_in.empty() ? 0 : t_in.back()});
    std::vector<double> t, y;
    for (std::size_t i = 0; i < t_in.size(); ++i) {
        if (t_in[i] < w.t_min || t_in[i] > w.t_max)
            continue;
        if (y_in[i] < opt.floor && y_in[i] > 0 && !t.empty())
            break;
        if (!(y_in[i] > 0))
            throw std::invalid_argument("fit_emergent: non-positive value in window");
        t.push_back(t_in[i]);
        y.push_back(y_in[i]);
    }
    if (t.size() < 50)
        throw std::invalid_argument("fit_emergent: fewer than 50 points in window");
    w.t_min = t.front();
    w.t_max = t.back();
    const double y0 = y.front();
    for (auto& v : y)
        v /= y0;

    const Eigen::Index n = static_cast<Eigen::Index>(t.size());
    Eigen::VectorXd a(n), b(n), z(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        a[i] = std::pow(t[i], opt.gamma);
        b[i] = t[i];
        z[i] = -std::log(y[i]);
    }
    Quadratic q;
    q.G << a.dot(a), a.dot(b), a.dot(b), b.dot(b);
    q.g << a.dot(z), b.dot(z);
    q.c = 0.5 * z.dot(z);
    q.pinned[0] = opt.fix_rp_zero;
    q.pinned[1] = opt.fix_rd_zero;
    const double tol = 1e-12 * (q.g.norm() + 1e-300);

    const double r0 = 1.0 / one_over_e_time(t, y);
    Descent best;
    double fbest = std::numeric_limits<double>::infinity();
    bool any = false;
    for (double sp : {0.1, 1.0, 10.0})
        for (double sd : {0.1, 1.0, 10.0}) {
            const Eigen::Vector2d x0(std::pow(sp * r0, opt.gamma), sd * r0);
            Descent d = minimize(q, x0, tol);
            if (!d.converged)
                continue;
            any = true;
            const double f = q.value(d.x);
            if (f < fbest) {
                fbest = f;
                best = std::move(d);
            }
        }
    if (!any)
        throw std::runtime_error("fit_emergent: no start converged");
    // Descent stops short of the bound; snap onto a face when that is no worse.
    for (int i = 0; i < 2; ++i) {
        const int j = 1 - i;
        if (best.x[i] == 0)
            continue;
        Eigen::Vector2d c = Eigen::Vector2d::Zero();
        if (!q.pinned[j] && q.G(j, j) > 0)
            c[j] = std::max(0.0, q.g[j] / q.G(j, j));
        const double fc = q.value(c);
        if (fc <= fbest + 1e-12 * q.c) {
            fbest = fc;
            best.x = c;
            best.trace.push_back(std::min(fc, best.trace.back()));
        }
    }

    FitResult r;
    r.gamma = opt.gamma;
    r.R_p = std::pow(best.x[0], 1.0 / opt.gamma);
    r.R_d = best.x[1];
    r.converged = true;
    r.rp_at_bound = best.x[0] == 0;
    r.rd_at_bound = best.x[1] == 0;
    r.window = w;
    r.n_points = static_cast<int>(n);
    r.objective_trace = best.trace;
    const Eigen::VectorXd res = a * best.x[0] + b * best.x[1] - z;
    r.rms = std::sqrt(res.squaredNorm() / double(n));
    std::vector<double> model(t.size());
    for (std::size_t i = 0; i < t.size(); ++i)
        model[i] = emergent_model(t[i], r.R_p, r.R_d, r.gamma);
    r.rrms = rrms(y, model);
    return r;
}

std::vector<double> default_gamma_grid()
{
    std::vector<double> g;
    for (int i = 0; i <= 12; ++i)
        g.push_back(0.30 + 0.05 * i);
    return g;
}

GammaSweep gamma_sweep(const std::vector<double>& t, const std::vector<double>& y, const std::vector<double>& grid,
                       FitOptions opt)
{
    if (grid.empty())
        throw std::invalid_argument("gamma_sweep: empty grid");
    GammaSweep s;
    double best = std::numeric_limits<double>::infinity();
    for (double g : grid) {
        opt.gamma = g;
        FitResult f = fit_emergent(t, y, opt);
        s.gamma.push_back(g);
        s.rms.push_back(f.rms);
        if (f.rms < best) {
            best = f.rms;
            s.argmin = g;
        }
        s.fits.push_back(std::move(f));
    }
    return s;
}

double rrms(const std::vector<double>& data, const std::vector<double>& model)
{
    if (data.size() != model.size() || data.empty())
        throw std::invalid_argument("rrms: length mismatch");
    double num = 0, den = 0;
    for (std::size_t i = 0; i < data.size(); ++i) {
        num += (data[i] - model[i]) * (data[i] - model[i]);
        den += data[i] * data[i];
    }
    if (den == 0)
        throw std::invalid_argument("rrms: all-zero data");
    return std::sqrt(num / den);
}

namespace {

// n * integral_R^inf (1 - exp(-x / r^p)) 4 pi r^2 dr with x = A t, via u = R / r on (0, 1].
double exterior_exponent(double x, double density, double R, double p)
{
    const int m = 2000;
    double s = 0;
    for (int i = 0; i <= m; ++i) {
        const double u = double(i) / m;
        double f;
        if (u == 0) {
            f = p == 4 ? x / R : 0; // limit of x u^(p-4) R^(3-p)
        } else {
            const double y = x * std::pow(u / R, p);
            // r = R/u, dr = R/u^2 du, r^2 dr = R^3 u^-4 du
            f = -std::expm1(-y) * std::pow(R, 3) / std::pow(u, 4);
        }
        const double wgt = (i == 0 || i == m) ? 1 : (i % 2 ? 4 : 2);
        s += wgt * f;
    }
    return density * 4 * pi * s / (3.0 * m);
}

} // namespace

PoissonOracle poisson_stretched_oracle(double A, double density, int n_samples, std::vector<double> times,
                                       double power, std::uint64_t seed)
{
    if (!(density > 0))
        throw std::invalid_argument("poisson oracle: density must be positive");
    if (!(power >= 4))
        throw std::invalid_argument("poisson oracle: power must be >= 4");
    PoissonOracle o;
    o.times = times;
    const std::size_t nt = times.size();
    // About 500 points inside the ball; the exterior enters through its exact Laplace functional.
    const double R = std::cbrt(3.0 * 500.0 / (4 * pi * density));
    o.ball_radius = R;
    const double vball = 4.0 / 3.0 * pi * R * R * R;

    std::vector<double> ext(nt);
    for (std::size_t k = 0; k < nt; ++k)
        ext[k] = A > 0 ? exterior_exponent(A * times[k], density, R, power) : 0;

    // Radii in increasing order: Poisson process in the volume coordinate has Exp gaps.
    Eigen::ArrayXd acc = Eigen::ArrayXd::Zero(nt);
    Rng rng(seed);
    std::vector<double> radii;
    for (int s = 0; s < n_samples; ++s) {
        radii.clear();
        double v = 0;
        while (true) {
            v += -std::log1p(-rng.uniform()) / density;
            if (v > vball)
                break;
            radii.push_back(std::cbrt(3 * v / (4 * pi)));
        }
        double inv_sum = 0;
        for (double r : radii)
            inv_sum += std::pow(r, -power);
        for (std::size_t k = 0; k < nt; ++k)
            acc[k] += std::exp(-A * times[k] * inv_sum);
    }
    for (std::size_t k = 0; k < nt; ++k) {
        o.survival.push_back(acc[k] / n_samples * std::exp(-ext[k]));
        // Laplace functional of the Poisson process over all space.
        const double beta = 3.0 / power;
        o.exact.push_back(std::exp(-density * 4 * pi / 3 * std::tgamma(1 - beta) * std::pow(A * times[k], beta)));
    }

    // Stretch exponent from log(-log S) = beta log t + const where S is informative.
    std::vector<double> xs, ys;
    for (std::size_t k = 0; k < nt; ++k) {
        const double s = o.survival[k];
        if (s > 1e-3 && s < 0.99) {
            xs.push_back(std::log(times[k]));
            ys.push_back(std::log(-std::log(s)));
        }
    }
    if (xs.size() >= 3) {
        const Eigen::Index m = static_cast<Eigen::Index>(xs.size());
        Eigen::MatrixXd X(m, 2);
        Eigen::VectorXd Y(m);
        for (Eigen::Index i = 0; i < m; ++i) {
            X(i, 0) = 1;
            X(i, 1) = xs[i];
            Y[i] = ys[i];
        }
        const Eigen::Vector2d beta = X.colPivHouseholderQr().solve(Y);
        const double s2 = (X * beta - Y).squaredNorm() / std::max<Eigen::Index>(1, m - 2);
        const Eigen::Matrix2d cov = s2 * (X.transpose() * X).inverse();
        o.exponent = beta[1];
        o.exponent_err = std::sqrt(cov(1, 1));
    }
    return o;
}

} // namespace spinnet
