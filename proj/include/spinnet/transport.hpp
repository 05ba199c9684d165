#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <vector>

#include "spinnet/engine.hpp"
#include "spinnet/fitkit.hpp"

namespace spinnet {

struct TransportConfig {
    BoxGeometry box;
    double c_nuc = 0.011;
    Vec3 b_axis = Vec3::UnitZ();
    RegimeSpec regime = regime_preset("I"); // supplies kappa
    double T2 = 3.75e-5; // mid-range of the laser T2 map
    std::vector<double> times; // empty: log grid 1e-4 .. 1e4 s, 20 points per decade
    int n_configs = 100;
    std::uint64_t seed = 1;
    int workers = 0;
    double front_threshold = 1e-3;
    double window_decades = 2; // fit over [t_cutoff 10^-decades, t_cutoff)
    int quad_steps = 4096;
};

std::vector<double> default_transport_times();

// <r^2>(t) for each column of p (sites x times); rel holds positions relative to the origin.
std::vector<double> msd(const Eigen::MatrixXd& p, const Positions& rel);

struct FrontCutoff {
    double t_cutoff = 0;
    std::size_t index = 0; // first sample at or beyond the cutoff
    bool flagged = false;  // front never arrived
};

FrontCutoff front_cutoff(const std::vector<double>& times, const std::vector<double>& shell_total, double threshold);

struct TransportFit {
    double D = 0, alpha = 0;
    double D_err = 0, alpha_err = 0;
    FitWindow window;
    int n_points = 0;
};

TransportFit fit_transport(const std::vector<double>& times, const std::vector<double>& msd_values, double t_cutoff,
                           double t_min = 0);

struct Trajectory {
    int n_nuclei = 0;
    std::vector<double> msd;
    std::vector<double> second_moment[3]; // per-axis <x^2>, <y^2>, <z^2>
    std::vector<double> shell;
    FrontCutoff cutoff;
    double max_drift = 0; // max |sum p - 1|
};

Trajectory transport_trajectory(const TransportConfig& cfg, double kappa, const Positions& sites, std::size_t index);

struct TransportResult {
    double D = 0, alpha = 0, D_err = 0, alpha_err = 0;
    std::vector<double> times, msd, msd_stderr;
    std::vector<double> axis_moment[3], axis_stderr[3];
    double t_cutoff = 0;
    int n_flagged = 0;
    int n_configs = 0;
    double kappa = 0;
    FitWindow window;
    int n_points = 0;
};

TransportResult run_transport(const TransportConfig& cfg);

struct FiniteSizeRow {
    int cells = 0;
    double n_sites = 0;
    double n_nuclei = 0;   // expected count c_nuc * sites
    double n_inv_third = 0;
    double alpha = 0, alpha_err = 0;
    double D = 0, D_err = 0;
    double t_cutoff = 0;
};

std::vector<FiniteSizeRow> finite_size_scan(const TransportConfig& base, const std::vector<int>& cells, int runs = 5,
                                            int per_run = 20);

} // namespace spinnet
