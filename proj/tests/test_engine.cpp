#include "doctest.h"

#include "spinnet/engine.hpp"
#include "spinnet/random.hpp"

#include <cmath>
#include <cstring>

using namespace spinnet;

namespace {

SimulationConfig small_config()
{
    SimulationConfig c;
    c.box = BoxGeometry::from_cells(8);
    c.conc = {0.05, 500e-6};
    c.n_configs = 12;
    c.times = log_times(1e-3, 100, 60);
    c.workers = 1;
    c.seed = 21;
    c.sidebands = 20;
    c.quad_steps = 1024;
    return c;
}

Eigen::MatrixXd random_generator(int n, std::uint64_t seed, bool relax)
{
    Rng rng(seed);
    Eigen::MatrixXd d(n, n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j <= i; ++j)
            d(i, j) = d(j, i) = i == j ? 0 : 50 * (rng.uniform() - 0.5);
    Eigen::MatrixXd W = build_W<double>(d, -0.5, 2.5e-5);
    Eigen::VectorXd R = Eigen::VectorXd::Zero(n);
    if (relax)
        for (int i = 0; i < n; ++i)
            R[i] = -rng.uniform() * 0.1;
    return generator(W, R);
}

} // namespace

TEST_CASE("hopping matrix")
{
    const double d = nn_coupling(4.5, 0.0);
    Eigen::MatrixXd dm(2, 2);
    dm << 0, d, d, 0;
    const Eigen::MatrixXd W = build_W<double>(dm, -0.5, 2.5e-5);
    CHECK(W(0, 1) == doctest::Approx(1.70).epsilon(0.02));
    CHECK(W(0, 1) == doctest::Approx(0.25 * d * d * 2.5e-5).epsilon(1e-14));
    CHECK(W.rowwise().sum().cwiseAbs().maxCoeff() < 1e-14);
    CHECK(build_W<double>(dm, 0.0, 2.5e-5).isZero());
    CHECK_THROWS(build_W<double>(dm, 1.0, 0.0));
    Eigen::MatrixXd magic(2, 2);
    magic << 0, nn_coupling(4.5, std::acos(1 / std::sqrt(3.0))), nn_coupling(4.5, std::acos(1 / std::sqrt(3.0))), 0;
    CHECK(std::abs(build_W<double>(magic, 1.0, 1e-4)(0, 1)) < 1e-20);
}

TEST_CASE("relaxation diagonal")
{
    SimulationConfig c = small_config();
    const DriveModel dm = drive_model(c);
    const Positions sites = build_diamond_sites(c.box);
    SpinRealization r = make_realization(c, sites, 0);
    const CouplingTable<double> t = build_coupling_table(r);
    const Eigen::VectorXd R1 = build_R(t, dm.floq, dm.bath, 1e-3);
    CHECK(build_R(t, dm.floq, dm.bath, 2e-3).isApprox(2 * R1));
    CHECK((R1.array() <= 0).all());
    r.electrons.resize(0, 3);
    CHECK(build_R(build_coupling_table(r), dm.floq, dm.bath, 1e-3).isZero());
}

TEST_CASE("propagation closed forms")
{
    const std::vector<double> ts = {0, 0.1, 1, 3};
    Eigen::MatrixXd M0 = Eigen::MatrixXd::Zero(3, 3);
    const Eigen::VectorXd p0 = Eigen::Vector3d(0.2, 0.3, 0.5);
    const Eigen::MatrixXd P0 = propagate(M0, Eigen::VectorXd(p0), ts);
    for (int k = 0; k < 4; ++k)
        CHECK((P0.col(k) - p0).norm() < 1e-15);

    Eigen::MatrixXd M1(1, 1);
    M1 << -0.7;
    const Eigen::MatrixXd P1 = propagate(M1, Eigen::VectorXd(Eigen::VectorXd::Ones(1)), ts);
    for (int k = 0; k < 4; ++k)
        CHECK(P1(0, k) == doctest::Approx(std::exp(-0.7 * ts[k])).epsilon(1e-14));

    const double w = 1.3;
    Eigen::MatrixXd M2(2, 2);
    M2 << -w, w, w, -w;
    const Eigen::MatrixXd P2 = propagate(M2, Eigen::VectorXd(Eigen::Vector2d(1, 0)), ts);
    for (int k = 0; k < 4; ++k)
        CHECK(P2(0, k) == doctest::Approx((1 + std::exp(-2 * w * ts[k])) / 2).epsilon(1e-13));
    CHECK_THROWS(propagate(M2, Eigen::VectorXd(Eigen::Vector2d(1, 0)), std::vector<double>{1.0, 0.5}));
}

TEST_CASE("propagation agrees with an extended-precision reference")
{
    const Eigen::MatrixXd M = random_generator(40, 4, true);
    const Eigen::VectorXd p0 = Eigen::VectorXd::Constant(40, 1.0 / 40);
    const std::vector<double> ts = {0.01, 1, 10, 100};
    const Eigen::MatrixXd P = propagate(M, p0, ts);
    using LD = long double;
    const MatrixX<LD> Ml = M.cast<LD>();
    const MatrixX<LD> Pl = propagate<LD>(Ml, VectorX<LD>(p0.cast<LD>()), ts);
    for (int k = 0; k < 4; ++k) {
        const double ref = static_cast<double>(Pl.col(k).sum());
        CHECK(std::abs(P.col(k).sum() - ref) / ref < 1e-8);
    }
}

TEST_CASE("conservation and contractivity")
{
    const Eigen::MatrixXd Mw = random_generator(60, 9, false);
    const Eigen::VectorXd p0 = Eigen::VectorXd::Constant(60, 1.0 / 60);
    const Eigen::MatrixXd P = propagate(Mw, p0, log_times(1e-3, 1e4, 30));
    for (int k = 0; k < P.cols(); ++k)
        CHECK(std::abs(P.col(k).sum() - 1) < 1e-9);

    const Eigen::MatrixXd Mr = random_generator(60, 10, true);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(-Mr);
    CHECK(es.eigenvalues().minCoeff() >= -1e-10);
    const Eigen::MatrixXd Q = propagate(Mr, p0, log_times(1e-3, 1e3, 40));
    for (int k = 1; k < Q.cols(); ++k)
        CHECK(Q.col(k).sum() <= Q.col(k - 1).sum() + 1e-12);
}

TEST_CASE("projected eigensystem matches the full eigensolver")
{
    for (int n : {1, 2, 7, 50, 200}) {
        Eigen::MatrixXd A = random_generator(n, 100 + n, true) * -1.0;
        Eigen::MatrixXd X = Eigen::MatrixXd::Random(n, 3);
        const auto ps = projected_eigensystem(A, X);
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(A);
        CHECK((ps.lambdas - es.eigenvalues()).cwiseAbs().maxCoeff() <= 1e-10 * (1 + es.eigenvalues().cwiseAbs().maxCoeff()));
        // Projections are defined up to the sign of each eigenvector: compare the bilinear forms.
        const Eigen::MatrixXd proj_full = es.eigenvectors().transpose() * X;
        for (int a = 0; a < 3; ++a)
            for (int b = 0; b < 3; ++b) {
                const double f1 = (ps.proj.col(a).array() * ps.proj.col(b).array() * (-0.3 * ps.lambdas.array()).exp()).sum();
                const double f2 =
                    (proj_full.col(a).array() * proj_full.col(b).array() * (-0.3 * es.eigenvalues().array()).exp()).sum();
                CHECK(f1 == doctest::Approx(f2).epsilon(1e-9));
            }
    }
}

TEST_CASE("regime presets")
{
    const RegimeSpec i = regime_preset("I"), ii = regime_preset("II"), iii = regime_preset("III");
    CHECK(i.eta == 1.5e-3);
    CHECK(ii.eta == 2.0e-3);
    CHECK(iii.eta == 3.4e-5);
    CHECK(i.sequence.detuning == 0);
    CHECK(i.sequence.flip_angle == 90);
    CHECK(ii.nominal_detuning == 2250);
    CHECK(ii.sequence.detuning > 1500);
    CHECK(ii.sequence.detuning < 3500);
    CHECK(std::abs(kappa(ii.sequence)) < 1e-4);
    CHECK(iii.sequence.detuning == 5000);
    CHECK(iii.sequence.flip_angle == 5);
    CHECK(i.powers.size() == 6);
    CHECK_THROWS(regime_preset("IV"));
    CHECK_THROWS(kappa_root(i.sequence, 0, 500));
}

TEST_CASE("frozen-core cap")
{
    SimulationConfig c;
    CHECK(effective_core_radius(c) == doctest::Approx(frozen_core_radius(4.5, 9.4, 100)));
    c.conc.c_el = 3000e-6;
    const double ne = 3000e-6 * 8 / std::pow(diamond_lattice_constant, 3);
    CHECK(effective_core_radius(c) == doctest::Approx(0.5 * std::cbrt(1 / ne)));
    c.core.cap_by_electron_spacing = false;
    CHECK(effective_core_radius(c) == doctest::Approx(frozen_core_radius(4.5, 9.4, 100)));
    c.core.radius_override = 3;
    CHECK(effective_core_radius(c) == 3);
}

TEST_CASE("ensemble curve")
{
    SimulationConfig c = small_config();
    const EnsembleResult er = ensemble_run(c, true);
    const DecayCurve& d = er.curve;
    CHECK(d.values[0] == doctest::Approx(1));
    CHECK(d.n_configs + d.n_skipped == c.n_configs);
    for (std::size_t k = 1; k < d.values.size(); ++k)
        CHECK(d.values[k] <= d.values[k - 1] + 1e-8);

    SimulationConfig off = c;
    off.relaxation = false;
    for (double v : ensemble_decay(off).values)
        CHECK(std::abs(v - 1) < 1e-9);

    // Larger eta never raises the raw (unnormalized) total, realization by realization.
    SimulationConfig more = c;
    more.eta_override = 2 * c.eta();
    const EnsembleResult em = ensemble_run(more, true);
    for (std::size_t i = 0; i < er.spectra.size(); ++i) {
        if (er.skipped[i])
            continue;
        const auto lo = total_polarization(er.spectra[i], c.times), hi = total_polarization(em.spectra[i], c.times);
        for (std::size_t k = 0; k < lo.size(); ++k)
            CHECK(hi[k] <= lo[k] + 1e-12);
    }
}

TEST_CASE("ensemble determinism across worker counts")
{
    SimulationConfig a = small_config();
    SimulationConfig b = a;
    b.workers = 3;
    const DecayCurve da = ensemble_decay(a), db = ensemble_decay(b), dc = ensemble_decay(a);
    REQUIRE(da.values.size() == db.values.size());
    CHECK(std::memcmp(da.values.data(), db.values.data(), da.values.size() * sizeof(double)) == 0);
    CHECK(std::memcmp(da.stderr_.data(), db.stderr_.data(), da.stderr_.size() * sizeof(double)) == 0);
    CHECK(std::memcmp(da.values.data(), dc.values.data(), da.values.size() * sizeof(double)) == 0);
}

TEST_CASE("empty realizations are skipped")
{
    SimulationConfig c = small_config();
    c.box = BoxGeometry::from_cells(1);
    c.conc = {0.05, 0};
    c.n_configs = 30;
    const EnsembleResult er = ensemble_run(c);
    CHECK(er.curve.n_skipped > 0);
    CHECK(er.curve.n_configs + er.curve.n_skipped == 30);
    c.conc = {0, 0};
    CHECK_THROWS(ensemble_run(c));
}

TEST_CASE("log time grid")
{
    const auto t = default_times();
    CHECK(t.size() == 400);
    CHECK(t.front() == doctest::Approx(1e-2));
    CHECK(t.back() == doctest::Approx(600));
    CHECK_THROWS(log_times(0, 1, 10));
}
