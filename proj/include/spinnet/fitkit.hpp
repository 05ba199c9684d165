#pragma once

#include <cstdint>
#include <optional>
#include <vector>

namespace spinnet {

struct FitWindow {
    double t_min = 0;
    double t_max = 0;
};

struct FitResult {
    double R_p = 0;
    double R_d = 0;
    double gamma = 0.5;
    double rms = 0;  // log-space residual
    double rrms = 0; // linear-space, relative
    FitWindow window;
    int n_points = 0;
    bool converged = false;
    bool rp_at_bound = false; // R_p = 0: pure mono-exponential
    bool rd_at_bound = false; // R_d = 0: pure stretched exponential
    std::vector<double> objective_trace; // accepted iterates of the winning start
};

struct FitOptions {
    double gamma = 0.5;
    bool fix_rp_zero = false;
    bool fix_rd_zero = false;
    std::optional<FitWindow> window;
    double floor = 1e-8; // the window ends before the first value below this
};

// exp(-(R_p t)^gamma) exp(-R_d t)
double emergent_model(double t, double R_p, double R_d, double gamma = 0.5);

FitResult fit_emergent(const std::vector<double>& t, const std::vector<double>& y, const FitOptions& opt = {});

struct GammaSweep {
    std::vector<double> gamma;
    std::vector<double> rms;
    std::vector<FitResult> fits;
    double argmin = 0;
};

std::vector<double> default_gamma_grid();
GammaSweep gamma_sweep(const std::vector<double>& t, const std::vector<double>& y,
                       const std::vector<double>& grid = default_gamma_grid(), FitOptions opt = {});

double rrms(const std::vector<double>& data, const std::vector<double>& model);

struct PoissonOracle {
    std::vector<double> times;
    std::vector<double> survival;
    std::vector<double> exact; // closed-form Laplace functional
    double exponent = 0;       // slope of log(-log S) vs log t
    double exponent_err = 0;
    double ball_radius = 0;
};

// Survival <prod_i exp(-A t / r_i^p)> over a Poisson point cloud of the given density.
PoissonOracle poisson_stretched_oracle(double A, double density, int n_samples, std::vector<double> times,
                                       double power = 6, std::uint64_t seed = 1);

} // namespace spinnet
