#pragma once

#include <Eigen/Dense>

#include <vector>

#include "spinnet/dipolar.hpp"
#include "spinnet/floquet.hpp"

namespace spinnet {

struct LorentzianBath {
    double tau_c = 1e-3; // s

    void validate() const;
};

// Unit-area Lorentzian: integral of J dω/2π is 1.
double j_lorentzian(double omega, const LorentzianBath& bath);

// sum_k |c_k^{+1}|^2 J_e(omega_eff + k omega_d): J_env per unit sum_mu h^2.
double comb_spectral_weight(const FloquetParams& floq, const LorentzianBath& bath);

// J_env^i(omega_eff) for every nucleus.
template <typename Scalar>
VectorX<Scalar> j_env(const CouplingTable<Scalar>& table, const FloquetParams& floq, const LorentzianBath& bath)
{
    const Scalar w = Scalar(comb_spectral_weight(floq, bath));
    if (table.h.cols() == 0)
        return VectorX<Scalar>::Zero(table.h.rows());
    return table.h.array().square().rowwise().sum().matrix() * w;
}

using Matrix7d = Eigen::Matrix<double, 7, 7>;
using Vector7d = Eigen::Matrix<double, 7, 1>;

// Basis: |g,-1>, |g,0>, |g,+1>, |e,-1>, |e,0>, |e,+1>, |s>. Rates in s^-1.
struct PumpModel {
    double gamma_eg = 65e6;
    double gamma_es = 50e6;
    double gamma_s = 1e6;
    double gamma_01 = 0.5e6;
    double R1_E = 10.0;
    double beta_omega = 0.1263; // hbar*gamma_e*B / k_B T at 9.4 T, 100 K
    double Gamma_p = 0.0;

    double gamma_sg() const { return gamma_s / 3.0; }
    void validate() const;
    static double thermal_beta(double B, double T);
};

// Columns are source states, rows destinations; diagonal is minus the column sum.
Matrix7d lindblad_generator(const PumpModel& pm);

Vector7d equilibrium(const Matrix7d& gen);

// S_z eigenvalues on each triplet, 0 on the singlet.
const Vector7d& sz_diagonal();

std::vector<double> correlation_function(const Matrix7d& gen, const std::vector<double>& taus);

struct CorrelationFit {
    double tau_c = 0;
    double r2 = 0;
};

// Single-exponential fit of the connected, normalized C(tau) on [0, 5 t_1/e].
CorrelationFit fit_correlation_time(const Matrix7d& gen);

struct LaserMap {
    double slope = 0;     // 1/tau_c per unit drive (W, or Gamma_p for the pump fit)
    double intercept = 0; // zero-drive 1/tau_c
    double r2 = 1;
    double T2_low = 2.5e-5;
    double T2_high = 5.0e-5;
    double power_max = 7.5;

    double inv_tau_c(double power) const { return intercept + slope * power; }
    double tau_c(double power) const { return 1.0 / inv_tau_c(power); }
    double T2(double power) const;

    // Linear map with 1/tau_c doubled (tau_c halved) at power_max.
    static LaserMap anchored(double inv_tau_c0, double power_max = 7.5);
};

struct PumpScan {
    std::vector<double> gamma_p;
    std::vector<double> inv_tau_c;
    std::vector<double> fit_r2;
    LaserMap map; // slope per unit Gamma_p
    bool monotone = true;
};

PumpScan tau_c_of_power(const PumpModel& base, const std::vector<double>& gamma_p);

std::vector<double> default_pump_grid();

} // namespace spinnet
