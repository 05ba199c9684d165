#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <stdexcept>

#include "spinnet/constants.hpp"
#include "spinnet/lattice.hpp"

namespace spinnet {

template <typename Scalar>
using MatrixX = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
template <typename Scalar>
using VectorX = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

// Secular dipolar prefactor (mu0/4pi) hbar g1 g2 / r^3 with r in Å, result in rad/s.
inline double dipolar_prefactor(double g1, double g2)
{
    return mu0_over_4pi * hbar * g1 * g2 / (angstrom * angstrom * angstrom);
}

template <typename Scalar>
Scalar p2(Scalar c)
{
    return Scalar(0.5) * (Scalar(3) * c * c - Scalar(1));
}

template <typename Scalar>
Scalar dipolar_coupling(Scalar prefactor, Scalar r, Scalar cos_theta)
{
    if (!(r > Scalar(0)))
        throw std::invalid_argument("dipolar coupling: coincident sites (r = 0)");
    return -prefactor / (r * r * r) * p2(cos_theta);
}

template <typename Scalar = double>
Scalar nn_coupling(Scalar r, Scalar theta)
{
    return dipolar_coupling<Scalar>(Scalar(dipolar_prefactor(gamma_C, gamma_C)), r, std::cos(theta));
}

template <typename Scalar = double>
Scalar ne_coupling(Scalar r, Scalar theta)
{
    return dipolar_coupling<Scalar>(Scalar(dipolar_prefactor(gamma_C, gamma_e)), r, std::cos(theta));
}

template <typename Scalar = double>
struct CouplingTable {
    MatrixX<Scalar> d; // nuclei x nuclei, rad/s
    MatrixX<Scalar> h; // nuclei x electrons, rad/s
};

CouplingTable<double> build_coupling_table(const SpinRealization& real, const Vec3& b_axis = Vec3::UnitZ());

// Nuclear-nuclear block only (transport runs have no electrons).
MatrixX<double> build_nn_table(const Positions& nuclei, double side, const Vec3& b_axis = Vec3::UnitZ());

} // namespace spinnet
