#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <string>
#include <vector>

#include "spinnet/bath.hpp"
#include "spinnet/dipolar.hpp"
#include "spinnet/floquet.hpp"
#include "spinnet/lattice.hpp"
#include "spinnet/linalg.hpp"

namespace spinnet {

struct RegimeSpec {
    std::string label = "I";
    PulseSequence sequence;
    double eta = 1.5e-3;
    double nominal_detuning = 0; // Hz, as quoted for the experiment
    std::vector<double> powers = {0, 1.5, 3, 4.5, 6, 7.5};
};

// I: on resonance, 90 deg. II: 90 deg at the kappa zero crossing. III: 5 deg, 5 kHz.
RegimeSpec regime_preset(const std::string& label);

// Detuning (Hz) in [lo, hi] where kappa changes sign, by bisection.
double kappa_root(PulseSequence seq, double lo_hz, double hi_hz, double tol_hz = 1e-3);

template <typename Scalar>
MatrixX<Scalar> build_W(const MatrixX<Scalar>& d, Scalar kappa, Scalar T2)
{
    if (!(T2 > Scalar(0)))
        throw std::invalid_argument("build_W: T2 must be positive");
    MatrixX<Scalar> W = (kappa * kappa * T2) * d.array().square().matrix();
    W.diagonal().setZero();
    W.diagonal() = -W.rowwise().sum();
    return W;
}

template <typename Scalar>
VectorX<Scalar> build_R(const CouplingTable<Scalar>& table, const FloquetParams& floq, const LorentzianBath& bath,
                        Scalar eta)
{
    return -eta * j_env(table, floq, bath);
}

template <typename Scalar>
MatrixX<Scalar> generator(const MatrixX<Scalar>& W, const VectorX<Scalar>& R)
{
    MatrixX<Scalar> M = W;
    M.diagonal() += R;
    return M;
}

// p(t) = exp(M t) p0 through the full symmetric eigendecomposition; one column per time.
template <typename Scalar>
MatrixX<Scalar> propagate(const MatrixX<Scalar>& M, const VectorX<Scalar>& p0, const std::vector<double>& times)
{
    if (M.rows() != M.cols() || M.rows() != p0.size())
        throw std::invalid_argument("propagate: dimension mismatch");
    for (std::size_t i = 1; i < times.size(); ++i)
        if (times[i] < times[i - 1])
            throw std::invalid_argument("propagate: times must be ascending");
    Eigen::SelfAdjointEigenSolver<MatrixX<Scalar>> es(M);
    if (es.info() != Eigen::Success)
        throw std::runtime_error("propagate: eigensolver failed");
    const VectorX<Scalar> c = es.eigenvectors().transpose() * p0;
    MatrixX<Scalar> out(M.rows(), static_cast<Eigen::Index>(times.size()));
    for (std::size_t k = 0; k < times.size(); ++k)
        out.col(k) = es.eigenvectors() * (es.eigenvalues().array() * Scalar(times[k])).exp().matrix().cwiseProduct(c);
    return out;
}

struct DecayCurve {
    std::vector<double> times;
    std::vector<double> values;
    std::vector<double> stderr_;
    int n_configs = 0;
    int n_skipped = 0;
    std::string regime;
};

struct FrozenCoreSpec {
    double a = 4.5;     // Å, mean nuclear spacing entering the radius formula
    double B = 9.4;     // T
    double T = 100.0;   // K
    bool cap_by_electron_spacing = true;
    double radius_override = -1; // Å; used when >= 0
};

struct SimulationConfig {
    BoxGeometry box;
    Concentrations conc;
    FrozenCoreSpec core;
    Vec3 b_axis = Vec3::UnitZ();
    RegimeSpec regime = regime_preset("I");
    double power = 0; // W
    double inv_tau_c0 = 1700; // s^-1 at zero laser power
    double power_max = 7.5;   // W at which tau_c is halved
    double T2_low = 2.5e-5, T2_high = 5.0e-5;
    std::vector<double> times;
    int n_configs = 100;
    std::uint64_t seed = 1;
    int workers = 0;
    bool hopping = true;
    bool relaxation = true;
    double eta_override = -1;
    int sidebands = 50;
    int quad_steps = 4096;

    LaserMap laser() const;
    double eta() const { return eta_override >= 0 ? eta_override : regime.eta; }
};

std::vector<double> log_times(double t0, double t1, int n);
std::vector<double> default_times();

// r_c for the run, capped at half the mean electron spacing when requested.
double effective_core_radius(const SimulationConfig& cfg);

struct DriveModel {
    FloquetParams floq;
    LorentzianBath bath;
    double T2 = 0;
    double comb_weight = 0; // sum_k |c_k|^2 J_e(omega_eff + k omega_d)
};

DriveModel drive_model(const SimulationConfig& cfg);

struct RealizationSpectrum {
    int n_nuclei = 0;
    int n_electrons = 0;
    Eigen::VectorXd lambdas;    // eigenvalues of -M, ascending
    Eigen::VectorXd amplitudes; // a_j for the total polarization, uniform p0 summing to 1
};

SpinRealization make_realization(const SimulationConfig& cfg, const Positions& sites, std::size_t index);

struct GeneratorMatrices {
    Eigen::MatrixXd W;
    Eigen::VectorXd R;
    Eigen::MatrixXd M() const { return generator(W, R); }
};

GeneratorMatrices build_generator(const SimulationConfig& cfg, const DriveModel& drive, const SpinRealization& real);
RealizationSpectrum realization_spectrum(const SimulationConfig& cfg, const DriveModel& drive,
                                         const SpinRealization& real);

// Total polarization sum_j a_j exp(-lambda_j t).
std::vector<double> total_polarization(const RealizationSpectrum& s, const std::vector<double>& times);

struct EnsembleResult {
    DecayCurve curve;
    std::vector<RealizationSpectrum> spectra; // index-aligned with realizations, empty when skipped
    std::vector<bool> skipped;
};

EnsembleResult ensemble_run(const SimulationConfig& cfg, bool keep_spectra = false);
DecayCurve ensemble_decay(const SimulationConfig& cfg);

} // namespace spinnet
