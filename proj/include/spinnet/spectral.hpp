#pragma once

#include <Eigen/Dense>

#include <vector>

#include "spinnet/engine.hpp"
#include "spinnet/fitkit.hpp"

namespace spinnet {

struct ModeSet {
    Eigen::VectorXd lambdas;    // eigenvalues of -M, ascending
    Eigen::VectorXd amplitudes; // a_j = (v_j . p0)(v_j . 1)
    Eigen::MatrixXd vectors;    // orthonormal columns
};

template <typename DerivedM, typename DerivedP>
ModeSet decompose(const Eigen::MatrixBase<DerivedM>& M, const Eigen::MatrixBase<DerivedP>& p0)
{
    if (M.rows() != M.cols() || M.rows() != p0.size())
        throw std::invalid_argument("decompose: dimension mismatch");
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(-M.eval());
    if (es.info() != Eigen::Success)
        throw std::runtime_error("decompose: eigensolver failed");
    ModeSet s;
    s.lambdas = es.eigenvalues();
    s.vectors = es.eigenvectors();
    const Eigen::VectorXd proj_p0 = s.vectors.transpose() * p0;
    const Eigen::VectorXd proj_1 = s.vectors.colwise().sum().transpose();
    s.amplitudes = proj_p0.cwiseProduct(proj_1);
    return s;
}

double reconstruct_total(const ModeSet& s, double t);

struct AsymptoticValue {
    double value = 0;
    bool valid = true; // false when max|a_j/a_0| >= 1 and (lambda_1 - lambda_0) t < 1
};

AsymptoticValue asymptotic_form(const ModeSet& s, double t);

struct SlowestModeStats {
    double mean = 0;
    double stderr_ = 0;
    int n_used = 0;
    int n_zero_modes = 0; // realizations without relaxation, excluded
};

SlowestModeStats slowest_mode_stats(const std::vector<RealizationSpectrum>& spectra, double zero_tol = 1e-12);

struct RpComparison {
    FitResult full;
    FitResult no_hopping; // W = 0, fitted with R_d fixed at 0
    double ratio = 0;     // R_p(full) / R_p(W = 0)
};

RpComparison rp_dep_comparison(const SimulationConfig& cfg);

struct Heatmap {
    int bins = 60;
    double side = 0;
    Eigen::MatrixXd value; // value(ix, iy), node ix sits at x = (ix + 0.5) side / bins

    double x(int ix) const { return (ix + 0.5) * side / bins; }
};

// Bilinear deposit of |amplitude| per nucleus onto a periodic xy grid.
Heatmap mode_profile_2d(const Positions& nuclei, const Eigen::VectorXd& amplitude, double side, int bins = 60);
double cosine_similarity(const Heatmap& a, const Heatmap& b);

// Largest ratio between consecutive positive eigenvalues.
double spectral_gap_ratio(const Eigen::VectorXd& lambdas, double zero_tol = 1e-9);

struct SpectrumEntry {
    double c_nuc = 0;
    Eigen::VectorXd lambdas;
    double gap_ratio = 0;
};

std::vector<SpectrumEntry> eigenvalue_spectrum(const SimulationConfig& base, const std::vector<double>& c_nuc_list);

} // namespace spinnet
