#include "spinnet/lattice.hpp"

#include "spinnet/random.hpp"

#include <cmath>
#include <iomanip>
#include <sstream>
#include <stdexcept>
#include <vector>

namespace spinnet {

int BoxGeometry::cells() const
{
    return static_cast<int>(std::floor(side_length / lattice_constant + 1e-9));
}

void BoxGeometry::validate() const
{
    if (!(lattice_constant > 0))
        throw std::invalid_argument("box: lattice_constant must be positive");
    if (!(side_length >= lattice_constant * (1 - 1e-12)))
        throw std::invalid_argument("box: side_length smaller than one cell");
}

void Concentrations::validate() const
{
    if (c_nuc < 0 || c_nuc > 1)
        throw std::invalid_argument("concentrations: c_nuc outside [0, 1]");
    if (c_el < 0 || c_el > 1)
        throw std::invalid_argument("concentrations: c_el outside [0, 1]");
    if (c_nuc + c_el > 1)
        throw std::invalid_argument("concentrations: c_nuc + c_el exceeds 1");
}

Positions build_diamond_sites(const BoxGeometry& box)
{
    box.validate();
    static const double basis[8][3] = {{0, 0, 0},       {0, .5, .5},     {.5, 0, .5},     {.5, .5, 0},
                                       {.25, .25, .25}, {.25, .75, .75}, {.75, .25, .75}, {.75, .75, .25}};
    const int n = box.cells();
    const double a = box.lattice_constant;
    Positions sites(8 * n * n * n, 3);
    Eigen::Index row = 0;
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
            for (int k = 0; k < n; ++k)
                for (const auto& b : basis) {
                    sites(row, 0) = (i + b[0]) * a;
                    sites(row, 1) = (j + b[1]) * a;
                    sites(row, 2) = (k + b[2]) * a;
                    ++row;
                }
    return sites;
}

SpinRealization populate(const Positions& sites, const BoxGeometry& box, const Concentrations& conc,
                         std::uint64_t seed)
{
    conc.validate();
    Rng el_rng(derive_seed(seed, 0, 0));
    Rng nuc_rng(derive_seed(seed, 0, 1));
    std::vector<Eigen::Index> el, nuc;
    for (Eigen::Index i = 0; i < sites.rows(); ++i) {
        const double ue = el_rng.uniform();
        const double un = nuc_rng.uniform();
        if (ue < conc.c_el)
            el.push_back(i);
        else if (un < conc.c_nuc)
            nuc.push_back(i);
    }
    SpinRealization r;
    r.box = box;
    r.seed = seed;
    r.electrons = sites(el, Eigen::all);
    r.nuclei = sites(nuc, Eigen::all);
    return r;
}

SpinRealization apply_frozen_core(const SpinRealization& real, double r_c)
{
    if (r_c < 0)
        throw std::invalid_argument("frozen core: r_c must be non-negative");
    if (r_c == 0 || real.n_electrons() == 0)
        return real;
    const double rc2 = r_c * r_c;
    const double L = real.box.side_length;
    std::vector<Eigen::Index> keep;
    for (Eigen::Index i = 0; i < real.n_nuclei(); ++i) {
        bool ok = true;
        const Vec3 p = real.nuclei.row(i).transpose();
        for (Eigen::Index m = 0; m < real.n_electrons() && ok; ++m)
            ok = min_image(p, real.electrons.row(m).transpose(), L).squaredNorm() >= rc2;
        if (ok)
            keep.push_back(i);
    }
    SpinRealization out = real;
    out.nuclei = real.nuclei(keep, Eigen::all);
    return out;
}

double electron_polarization(double B, double T)
{
    if (!(B > 0) || !(T > 0))
        throw std::invalid_argument("electron_polarization: B and T must be positive");
    return std::tanh(hbar * gamma_e * B / (2.0 * k_B * T));
}

double frozen_core_radius_from_polarization(double a, double P_e)
{
    return a * std::pow(P_e * gamma_e / gamma_C, 0.25);
}

double frozen_core_radius(double a, double B, double T)
{
    if (!(a > 0))
        throw std::invalid_argument("frozen_core_radius: a must be positive");
    return frozen_core_radius_from_polarization(a, electron_polarization(B, T));
}

namespace {

void write_points(std::ostringstream& os, const Positions& p)
{
    os << '[';
    for (Eigen::Index i = 0; i < p.rows(); ++i) {
        if (i)
            os << ',';
        os << '[' << p(i, 0) << ',' << p(i, 1) << ',' << p(i, 2) << ']';
    }
    os << ']';
}

} // namespace

std::string realization_json(const SpinRealization& real)
{
    std::ostringstream os;
    os << std::setprecision(6);
    os << "{\"seed\":" << real.seed << ",\"side_length\":" << real.box.side_length
       << ",\"lattice_constant\":" << real.box.lattice_constant << ",\"nuclei\":";
    write_points(os, real.nuclei);
    os << ",\"electrons\":";
    write_points(os, real.electrons);
    os << '}';
    return os.str();
}

} // namespace spinnet
