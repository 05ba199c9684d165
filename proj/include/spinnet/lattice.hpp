#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <string>

#include "spinnet/constants.hpp"

namespace spinnet {

using Vec3 = Eigen::Vector3d;
// One point per row, coordinates in Å.
using Positions = Eigen::Matrix<double, Eigen::Dynamic, 3>;

struct BoxGeometry {
    double side_length = 25 * diamond_lattice_constant;
    double lattice_constant = diamond_lattice_constant;

    static BoxGeometry from_cells(int cells, double a = diamond_lattice_constant)
    {
        return {cells * a, a};
    }
    int cells() const;
    double volume() const { return side_length * side_length * side_length; }
    void validate() const;
};

struct Concentrations {
    double c_nuc = 0.011;
    double c_el = 30e-6;

    static Concentrations from_ppm(double c_nuc, double c_el_ppm) { return {c_nuc, c_el_ppm * 1e-6}; }
    void validate() const;
};

struct SpinRealization {
    Positions nuclei;
    Positions electrons;
    BoxGeometry box;
    std::uint64_t seed = 0;

    Eigen::Index n_nuclei() const { return nuclei.rows(); }
    Eigen::Index n_electrons() const { return electrons.rows(); }
};

Positions build_diamond_sites(const BoxGeometry& box);

// Electron trial first (stream 0), then 13C on the remaining sites (stream 1).
// The two streams are independent so nucleus placement does not depend on c_el.
SpinRealization populate(const Positions& sites, const BoxGeometry& box, const Concentrations& conc,
                         std::uint64_t seed);

SpinRealization apply_frozen_core(const SpinRealization& real, double r_c);

// Thermal spin-1/2 polarization tanh(hbar*gamma_e*B / 2kT).
double electron_polarization(double B, double T);
double frozen_core_radius(double a, double B, double T);
double frozen_core_radius_from_polarization(double a, double P_e);

inline Vec3 min_image(const Vec3& p1, const Vec3& p2, double side)
{
    Vec3 d = p2 - p1;
    for (int k = 0; k < 3; ++k)
        d[k] -= side * std::floor(d[k] / side + 0.5);
    return d;
}

std::string realization_json(const SpinRealization& real);

} // namespace spinnet
