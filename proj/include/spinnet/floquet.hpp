#pragma once

#include <Eigen/Dense>

#include <complex>
#include <vector>

#include "spinnet/lattice.hpp"

namespace spinnet {

using cplx = std::complex<double>;
using SU2 = Eigen::Matrix2cd;
using SO3 = Eigen::Matrix3d;

struct PulseSequence {
    double flip_angle = 90.0;        // degrees
    double pulse_duration = 38e-6;   // s; 0 means an instantaneous pulse
    double interpulse_delay = 40e-6; // s
    double detuning = 0.0;           // Hz (delta omega / 2 pi)
    double phase = 0.0;              // degrees, pulse axis in the transverse plane

    double period() const { return pulse_duration + interpulse_delay; }
    void validate() const;
};

// exp(-i angle n.S) for spin 1/2, n a unit vector.
SU2 su2_rotation(const Vec3& axis, double angle);
// Adjoint (spin-1) representation: U S_b U^dag = sum_a R_ab S_a.
SO3 so3_of(const SU2& u);

// Lab-to-rotating-frame drive propagator at time t in [0, T].
SU2 drive_propagator(const PulseSequence& seq, double t);

struct EffectiveFrame {
    double omega_eff = 0; // rad/s, folded into [0, omega_d/2]
    double theta_eff = 0; // rad
    double phi_eff = 0;   // rad
    Vec3 axis = Vec3::UnitZ();
    double period = 0;
    double omega_d = 0;
    bool degenerate = false; // near-identity period propagator; axis set to +z
};

EffectiveFrame period_propagator(const PulseSequence& seq);

struct MicromotionPath {
    std::vector<double> t;
    std::vector<double> weight; // composite Simpson weights, sum = T
    std::vector<SU2> P;
    std::vector<Vec3> euler;    // z-y-z angles (alpha, beta, gamma) of P^dag, alpha unwrapped
};

// Nodes are uniform within each drive segment (pulse, delay) so the quadrature
// never straddles a kink of the propagator.
MicromotionPath micromotion(const PulseSequence& seq, int n_steps = 2048);

double wigner_d(int l, int m, int n, double beta);
cplx wigner_D(int l, int m, int n, double alpha, double beta, double gamma);

// Component m of the time average of D^l_{m0}[P^dag(t)] e^{-i k omega_d t}.
cplx averaged_D(const MicromotionPath& path, double period, int l, int m, int k = 0);

double kappa(const PulseSequence& seq, int n_steps = 2048);
std::vector<cplx> fourier_coeffs(const PulseSequence& seq, int q, int K = 50, int n_steps = 4096);

struct FloquetParams {
    EffectiveFrame frame;
    double kappa = 1;
    int K = 0;
    std::vector<cplx> c_plus; // c_k^{+1}, index k + K
    std::vector<cplx> c_zero;
    std::vector<cplx> c_minus;

    double comb_weight() const;
};

FloquetParams floquet_params(const PulseSequence& seq, int K = 50, int n_steps = 4096);

struct CombTooth {
    double omega;
    double weight;
};

// Y(omega) = sum_k |c_k|^2 delta(omega + k omega_d).
std::vector<CombTooth> filter_function(const std::vector<cplx>& c, double omega_d);

} // namespace spinnet
