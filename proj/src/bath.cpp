#include "spinnet/bath.hpp"

#include <unsupported/Eigen/MatrixFunctions>

#include <cmath>
#include <iostream>
#include <stdexcept>

namespace spinnet {

void LorentzianBath::validate() const
{
    if (!(tau_c > 0))
        throw std::invalid_argument("bath: tau_c must be positive");
}

double j_lorentzian(double omega, const LorentzianBath& bath)
{
    const double x = omega * bath.tau_c;
    return 2.0 * bath.tau_c / (1.0 + x * x);
}

double comb_spectral_weight(const FloquetParams& floq, const LorentzianBath& bath)
{
    bath.validate();
    double s = 0;
    for (int k = -floq.K; k <= floq.K; ++k)
        s += std::norm(floq.c_plus[k + floq.K]) * j_lorentzian(floq.frame.omega_eff + k * floq.frame.omega_d, bath);
    return s;
}

void PumpModel::validate() const
{
    for (double r : {gamma_eg, gamma_es, gamma_s, gamma_01, R1_E, Gamma_p})
        if (r < 0 || !std::isfinite(r))
            throw std::invalid_argument("pump model: negative or non-finite rate");
}

double PumpModel::thermal_beta(double B, double T) { return hbar * gamma_e * B / (k_B * T); }

Matrix7d lindblad_generator(const PumpModel& pm)
{
    pm.validate();
    Matrix7d G = Matrix7d::Zero();
    const double gsg = pm.gamma_sg();
    for (int i = 0; i < 3; ++i) {
        G(3 + i, i) = pm.Gamma_p * gsg;
        G(i, 3 + i) = pm.gamma_eg;
        G(i, 6) = gsg;
    }
    G(1, 3) = pm.gamma_01;
    G(1, 5) = pm.gamma_01;
    G(0, 4) = pm.gamma_01;
    G(2, 4) = pm.gamma_01;
    G(6, 3) = pm.gamma_es;
    G(6, 5) = pm.gamma_es;

    const double tp = std::exp(-pm.beta_omega / 2), tm = std::exp(pm.beta_omega / 2);
    Eigen::Matrix3d R;
    R << -tm, tp, 0, tm, -(tp + tm), tp, 0, tm, -tp;
    R *= pm.R1_E;
    for (int off : {0, 3})
        for (int a = 0; a < 3; ++a)
            for (int b = 0; b < 3; ++b)
                if (a != b)
                    G(off + a, off + b) += R(a, b);

    for (int j = 0; j < 7; ++j) {
        G(j, j) = 0;
        G(j, j) = -G.col(j).sum();
    }
    return G;
}

Vector7d equilibrium(const Matrix7d& gen)
{
    Eigen::FullPivLU<Matrix7d> lu(gen);
    lu.setThreshold(1e-12);
    const Eigen::MatrixXd ker = lu.kernel();
    if (ker.cols() != 1)
        throw std::runtime_error("lindblad: equilibrium is not unique");
    Vector7d p = ker.col(0);
    return p / p.sum();
}

const Vector7d& sz_diagonal()
{
    static const Vector7d sz = (Vector7d() << -1, 0, 1, -1, 0, 1, 0).finished();
    return sz;
}

std::vector<double> correlation_function(const Matrix7d& gen, const std::vector<double>& taus)
{
    const Vector7d p = equilibrium(gen);
    const Vector7d& sz = sz_diagonal();
    const Vector7d w = p.cwiseProduct(sz);
    std::vector<double> c;
    c.reserve(taus.size());
    for (double t : taus) {
        const Matrix7d e = (gen * t).exp();
        c.push_back(sz.dot(e * w));
    }
    return c;
}

CorrelationFit fit_correlation_time(const Matrix7d& gen)
{
    const Vector7d p = equilibrium(gen);
    const Vector7d& sz = sz_diagonal();
    const double c0 = p.dot(sz.cwiseProduct(sz));
    const double cinf = std::pow(p.dot(sz), 2);
    if (!(c0 - cinf > 0))
        throw std::runtime_error("correlation: no fluctuating component");
    auto y = [&](double t) { return (correlation_function(gen, {t})[0] - cinf) / (c0 - cinf); };

    double lo = 1e-12, hi = 1e3;
    if (y(hi) > std::exp(-1.0))
        throw std::runtime_error("correlation: no decay within 1e3 s");
    for (int it = 0; it < 200 && hi / lo > 1 + 1e-10; ++it) {
        const double m = std::sqrt(lo * hi);
        (y(m) > std::exp(-1.0) ? lo : hi) = m;
    }
    const int n = 200;
    const double tmax = 5 * lo;
    Eigen::VectorXd t(n), v(n);
    for (int i = 0; i < n; ++i) {
        t[i] = tmax * i / (n - 1);
        v[i] = y(t[i]);
    }
    double num = 0, den = 0;
    for (int i = 0; i < n; ++i)
        if (v[i] > 0.02) {
            num += t[i] * std::log(v[i]);
            den += t[i] * t[i];
        }
    CorrelationFit f;
    f.tau_c = -den / num;
    const Eigen::VectorXd model = (-t.array() / f.tau_c).exp();
    f.r2 = 1 - (v - model).squaredNorm() / (v.array() - v.mean()).square().sum();
    return f;
}

double LaserMap::T2(double power) const
{
    if (power_max <= 0)
        return T2_low;
    return T2_low + (T2_high - T2_low) * power / power_max;
}

LaserMap LaserMap::anchored(double inv_tau_c0, double power_max)
{
    LaserMap m;
    m.intercept = inv_tau_c0;
    m.slope = inv_tau_c0 / power_max;
    m.power_max = power_max;
    return m;
}

PumpScan tau_c_of_power(const PumpModel& base, const std::vector<double>& gamma_p)
{
    if (gamma_p.size() < 4)
        throw std::invalid_argument("tau_c_of_power: need at least 4 pump strengths");
    PumpScan s;
    s.gamma_p = gamma_p;
    for (double g : gamma_p) {
        PumpModel pm = base;
        pm.Gamma_p = g;
        const CorrelationFit f = fit_correlation_time(lindblad_generator(pm));
        s.inv_tau_c.push_back(1.0 / f.tau_c);
        s.fit_r2.push_back(f.r2);
    }
    for (std::size_t i = 1; i < s.inv_tau_c.size(); ++i)
        if (s.inv_tau_c[i] < s.inv_tau_c[i - 1])
            s.monotone = false;
    if (!s.monotone)
        std::cerr << "warning: 1/tau_c not monotone in Gamma_p; pump parameters suspect\n";

    const Eigen::Index n = static_cast<Eigen::Index>(gamma_p.size());
    Eigen::MatrixXd A(n, 2);
    Eigen::VectorXd b(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        A(i, 0) = 1;
        A(i, 1) = gamma_p[i];
        b[i] = s.inv_tau_c[i];
    }
    const Eigen::Vector2d x = A.colPivHouseholderQr().solve(b);
    s.map.intercept = x[0];
    s.map.slope = x[1];
    s.map.r2 = 1 - (A * x - b).squaredNorm() / (b.array() - b.mean()).square().sum();
    return s;
}

std::vector<double> default_pump_grid()
{
    std::vector<double> g;
    for (int i = 0; i <= 10; ++i)
        g.push_back(0.01 * i);
    return g;
}

} // namespace spinnet
