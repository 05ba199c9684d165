#include "spinnet/dipolar.hpp"

namespace spinnet {

MatrixX<double> build_nn_table(const Positions& nuclei, double side, const Vec3& b_axis)
{
    const Vec3 b = b_axis.normalized();
    const double pref = dipolar_prefactor(gamma_C, gamma_C);
    const Eigen::Index n = nuclei.rows();
    MatrixX<double> d = MatrixX<double>::Zero(n, n);
    for (Eigen::Index j = 0; j < n; ++j) {
        const Vec3 pj = nuclei.row(j).transpose();
        for (Eigen::Index i = j + 1; i < n; ++i) {
            const Vec3 dv = min_image(pj, nuclei.row(i).transpose(), side);
            const double r = dv.norm();
            const double v = dipolar_coupling(pref, r, dv.dot(b) / r);
            d(i, j) = v;
            d(j, i) = v;
        }
    }
    return d;
}

CouplingTable<double> build_coupling_table(const SpinRealization& real, const Vec3& b_axis)
{
    CouplingTable<double> t;
    const double L = real.box.side_length;
    t.d = build_nn_table(real.nuclei, L, b_axis);
    const Vec3 b = b_axis.normalized();
    const double pref = dipolar_prefactor(gamma_C, gamma_e);
    t.h.resize(real.n_nuclei(), real.n_electrons());
    for (Eigen::Index m = 0; m < real.n_electrons(); ++m) {
        const Vec3 pe = real.electrons.row(m).transpose();
        for (Eigen::Index i = 0; i < real.n_nuclei(); ++i) {
            const Vec3 dv = min_image(pe, real.nuclei.row(i).transpose(), L);
            const double r = dv.norm();
            t.h(i, m) = dipolar_coupling(pref, r, dv.dot(b) / r);
        }
    }
    return t;
}

} // namespace spinnet
