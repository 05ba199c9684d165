#pragma once

#include <optional>
#include <string>
#include <vector>

#include "spinnet/engine.hpp"
#include "spinnet/fitkit.hpp"

namespace spinnet {

// Interpolated first crossing of 1/e (log-linear); last time when never reached.
double one_over_e_time(const std::vector<double>& t, const std::vector<double>& y, bool* reached = nullptr);

// Fit options mirroring the regime's flat channel: II fixes R_d = 0, III fixes R_p = 0.
FitOptions regime_fit_options(const std::string& label);

struct LaserRow {
    double power = 0;
    double inv_tau_c = 0;
    double T2 = 0;
    FitResult fit;
    double R_p_err = 0, R_d_err = 0; // across config batches
    double t_one_over_e = 0;
};

std::vector<LaserRow> laser_scan(const SimulationConfig& base, const std::vector<double>& powers, int batches = 5);

double pearson(const std::vector<double>& x, const std::vector<double>& y);

struct LandscapeCell {
    double c_nuc = 0, c_el = 0;
    double R_p = 0, R_d = 0;
    double ratio_log10 = 0; // NaN when a channel is at its bound
    std::string tag;        // intermediate, diffusion-limited, diffusion-dominated, invalid
    int n_configs = 0;
    double rrms_two = 0, rrms_stretched = 0, rrms_mono = 0;
    double t_one_over_e = 0;
    double p_last = 0;
};

std::vector<double> landscape_times();
LandscapeCell landscape_cell(const SimulationConfig& base, double c_nuc, double c_el);

// Cells already present in the checkpoint file are reused; new cells are appended as they finish.
std::vector<LandscapeCell> landscape(const SimulationConfig& base, const std::vector<double>& c_nuc_grid,
                                     const std::vector<double>& c_el_grid,
                                     const std::optional<std::string>& checkpoint = std::nullopt);

struct SliceRow {
    double c_nuc = 0;
    FitResult fit;
    double t_one_over_e = 0;
};

std::vector<SliceRow> concentration_slice(const SimulationConfig& base, const std::vector<double>& c_nuc_list);

struct OrderedTrial {
    DecayCurve ordered, random;
    double t_ordered = 0, t_random = 0; // 1/e times
    bool random_slower = false;
};

struct OrderedVsRandom {
    std::vector<OrderedTrial> trials;
    DecayCurve ordered, random; // pooled over all trials
    double fraction_random_slower = 0;
};

// Electrons at the eight octant centers vs eight electrons on random sites; nuclei shared per trial.
int ordered_box_cells(double c_el);
OrderedVsRandom ordered_vs_random(const SimulationConfig& base, int n_trials, int per_trial = 1);

struct DecouplingRow {
    double inv_tau_c = 0;
    FitResult fit;
};

struct DecouplingScan {
    std::vector<DecouplingRow> rows;
    std::size_t argmax = 0;
    bool interior_max = false;
    bool monotone_after = false;
};

std::vector<double> default_decoupling_grid(double inv_tau_c0);
DecouplingScan optical_decoupling_extrapolation(const SimulationConfig& base, const std::vector<double>& inv_tau_c);

struct ChannelSuppression {
    double max_W_ratio = 0;  // max|W| preset II / preset I
    double mean_R_ratio = 0; // mean|R| preset III / preset I
};

ChannelSuppression channel_suppression(const SimulationConfig& base, std::size_t realization = 0);

} // namespace spinnet
