#include "doctest.h"

#include "spinnet/engine.hpp"
#include "spinnet/fitkit.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <functional>
#include <limits>

using namespace spinnet;

namespace {

std::vector<double> grid(double t0, double t1, int n)
{
    std::vector<double> t{0.0};
    for (double v : log_times(t0, t1, n))
        t.push_back(v);
    return t;
}

std::vector<double> sample(const std::vector<double>& t, const std::function<double(double)>& f)
{
    std::vector<double> y;
    for (double v : t)
        y.push_back(f(v));
    return y;
}

// min |A x - z|^2 over x >= 0 by enumerating active sets.
Eigen::Vector2d nnls_oracle(const std::vector<double>& t, const std::vector<double>& y, double gamma)
{
    const Eigen::Index n = static_cast<Eigen::Index>(t.size());
    Eigen::MatrixXd A(n, 2);
    Eigen::VectorXd z(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        A(i, 0) = std::pow(t[i], gamma);
        A(i, 1) = t[i];
        z[i] = -std::log(y[i]);
    }
    auto obj = [&](const Eigen::Vector2d& x) { return (A * x - z).squaredNorm(); };
    std::vector<Eigen::Vector2d> cand{Eigen::Vector2d::Zero()};
    const Eigen::Vector2d full = A.colPivHouseholderQr().solve(z);
    if ((full.array() >= 0).all())
        cand.push_back(full);
    for (int j = 0; j < 2; ++j) {
        const double c = std::max(0.0, A.col(j).dot(z) / A.col(j).squaredNorm());
        Eigen::Vector2d x = Eigen::Vector2d::Zero();
        x[j] = c;
        cand.push_back(x);
    }
    Eigen::Vector2d best = cand[0];
    for (const auto& c : cand)
        if (obj(c) < obj(best))
            best = c;
    return best;
}

} // namespace

TEST_CASE("synthetic parameters are recovered")
{
    const auto t = grid(1e-6, 1, 200);
    for (double g : {0.4, 0.5, 0.7}) {
        const auto y = sample(t, [&](double s) { return emergent_model(s, 120, 4, g); });
        FitOptions o;
        o.gamma = g;
        const FitResult f = fit_emergent(t, y, o);
        CHECK(f.converged);
        CHECK(f.R_p == doctest::Approx(120).epsilon(1e-6));
        CHECK(f.R_d == doctest::Approx(4).epsilon(1e-6));
        CHECK(f.rms < 1e-9);
        CHECK(f.rrms < 1e-9);
        CHECK_FALSE(f.rp_at_bound);
        CHECK_FALSE(f.rd_at_bound);
    }
}

TEST_CASE("time rescaling covariance")
{
    const auto t = grid(1e-5, 10, 180);
    const auto y = sample(t, [](double s) { return std::exp(-std::pow(30 * s, 0.35)) * (0.6 + 0.4 * std::exp(-2 * s)); });
    const FitResult a = fit_emergent(t, y);
    for (double s : {1e-3, 7.0, 1e4}) {
        std::vector<double> ts;
        for (double v : t)
            ts.push_back(v * s);
        const FitResult b = fit_emergent(ts, y);
        CHECK(b.R_p * s == doctest::Approx(a.R_p).epsilon(1e-6));
        CHECK(b.R_d * s == doctest::Approx(a.R_d).epsilon(1e-6));
        CHECK(b.rms == doctest::Approx(a.rms).epsilon(1e-6));
    }
}

TEST_CASE("bound-constrained optimum matches active-set enumeration")
{
    const auto t = grid(1e-4, 20, 150);
    const std::vector<std::function<double(double)>> shapes{
        [](double s) { return std::exp(-std::pow(s, 0.3)); },
        [](double s) { return std::exp(-std::pow(s, 0.9)); },
        [](double s) { return 0.5 * std::exp(-s) + 0.5 * std::exp(-20 * s); },
        [](double s) { return std::exp(-0.1 * s) / (1 + s); },
        [](double s) { return std::exp(-3 * s); },
    };
    int bounded = 0;
    for (const auto& f : shapes) {
        const auto y = sample(t, f);
        for (double g : {0.3, 0.5, 0.8}) {
            FitOptions o;
            o.gamma = g;
            const FitResult r = fit_emergent(t, y, o);
            std::vector<double> tw, yw;
            for (std::size_t i = 0; i < t.size() && t[i] <= r.window.t_max; ++i) {
                tw.push_back(t[i]);
                yw.push_back(y[i]);
            }
            CHECK(r.n_points == int(tw.size()));
            const Eigen::Vector2d x = nnls_oracle(tw, yw, g);
            CHECK(std::pow(r.R_p, g) == doctest::Approx(x[0]).epsilon(1e-8));
            CHECK(r.R_d == doctest::Approx(x[1]).epsilon(1e-8));
            CHECK(r.rp_at_bound == (x[0] == 0));
            CHECK(r.rd_at_bound == (x[1] == 0));
            bounded += r.rp_at_bound || r.rd_at_bound;
            // Accepted iterates never increase the objective.
            for (std::size_t k = 1; k < r.objective_trace.size(); ++k)
                CHECK(r.objective_trace[k] <= r.objective_trace[k - 1]);
        }
    }
    CHECK(bounded > 0);
}

TEST_CASE("pinned parameters")
{
    const auto t = grid(1e-4, 5, 120);
    const auto y = sample(t, [](double s) { return std::exp(-3 * s); });
    FitOptions o;
    o.fix_rp_zero = true;
    const FitResult r = fit_emergent(t, y, o);
    CHECK(r.R_p == 0);
    CHECK(r.R_d == doctest::Approx(3).epsilon(1e-9));

    const auto y2 = sample(t, [](double s) { return emergent_model(s, 8, 0); });
    o = {};
    o.fix_rd_zero = true;
    const FitResult r2 = fit_emergent(t, y2, o);
    CHECK(r2.R_d == 0);
    CHECK(r2.R_p == doctest::Approx(8).epsilon(1e-9));
}

TEST_CASE("window handling")
{
    const auto t = grid(1e-4, 1e3, 200);
    const auto y = sample(t, [](double s) { return std::exp(-0.1 * s); });
    const FitResult r = fit_emergent(t, y);
    // exp(-0.1 t) < 1e-8 beyond t = 184
    CHECK(r.window.t_max < 185);
    CHECK(r.window.t_max > 150);
    FitOptions o;
    o.window = FitWindow{1e-3, 1e-2};
    CHECK_THROWS_AS(fit_emergent(t, y, o), std::invalid_argument);
    auto bad = y;
    bad[10] = -1;
    CHECK_THROWS_AS(fit_emergent(t, bad), std::invalid_argument);
    CHECK_THROWS_AS(fit_emergent(std::vector<double>(60, 1), std::vector<double>(59, 1)), std::invalid_argument);
}

TEST_CASE("gamma sweep locates the generating exponent")
{
    const auto t = grid(1e-6, 10, 200);
    for (double g : {0.35, 0.5, 0.75}) {
        const auto y = sample(t, [&](double s) { return emergent_model(s, 50, 1, g); });
        const GammaSweep s = gamma_sweep(t, y);
        CHECK(s.gamma.size() == 13);
        CHECK(s.argmin == doctest::Approx(g));
    }
    CHECK_THROWS(gamma_sweep(t, sample(t, [](double) { return 1.0; }), {}));
}

TEST_CASE("default gamma grid")
{
    const auto g = default_gamma_grid();
    REQUIRE(g.size() == 13);
    CHECK(g.front() == doctest::Approx(0.3));
    CHECK(g.back() == doctest::Approx(0.9));
}

TEST_CASE("relative rms")
{
    CHECK(rrms({1, 2}, {1, 2}) == 0);
    CHECK(rrms({3, 4}, {0, 0}) == doctest::Approx(1));
    CHECK_THROWS(rrms({}, {}));
    CHECK_THROWS(rrms({0, 0}, {1, 1}));
}

TEST_CASE("Poisson cloud with r^-p couplings stretches with exponent 3/p")
{
    for (double p : {6.0, 4.0}) {
        const PoissonOracle o = poisson_stretched_oracle(1, 0.01, 4000, log_times(1e-4, 1e4, 161), p, 3);
        CHECK(o.exponent == doctest::Approx(3 / p).epsilon(0.03));
        double worst = 0;
        for (std::size_t k = 0; k < o.times.size(); ++k)
            if (o.exact[k] > 1e-3)
                worst = std::max(worst, std::abs(std::log(o.survival[k] / o.exact[k])));
        CHECK(worst < 0.1);
    }
    CHECK_THROWS(poisson_stretched_oracle(1, 0.01, 10, {1.0}, 3));
    CHECK_THROWS(poisson_stretched_oracle(1, 0, 10, {1.0}));
}
