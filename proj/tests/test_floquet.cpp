#include "doctest.h"

#include "spinnet/floquet.hpp"

#include <cmath>

using namespace spinnet;

namespace {

PulseSequence train(double flip, double tp, double delay, double det_hz, double phase = 0)
{
    PulseSequence s;
    s.flip_angle = flip;
    s.pulse_duration = tp;
    s.interpulse_delay = delay;
    s.detuning = det_hz;
    s.phase = phase;
    return s;
}

// Independent kappa: time average of P2(nbar . u(t)), u = R(P)^T z.
double kappa_geometric(const PulseSequence& seq, int n)
{
    const EffectiveFrame f = period_propagator(seq);
    const MicromotionPath p = micromotion(seq, n);
    double acc = 0;
    for (std::size_t i = 0; i < p.t.size(); ++i) {
        const Vec3 u = so3_of(p.P[i]).transpose() * Vec3::UnitZ();
        const double c = f.axis.dot(u);
        acc += p.weight[i] * 0.5 * (3 * c * c - 1);
    }
    return acc / f.period;
}

double closed_form_d1(int m, int n, double b)
{
    // l = 1 table.
    const double c = std::cos(b), s = std::sin(b);
    if (m == 0 && n == 0)
        return c;
    if (m == 1 && n == 1)
        return (1 + c) / 2;
    if (m == 1 && n == -1)
        return (1 - c) / 2;
    if (m == 1 && n == 0)
        return -s / std::sqrt(2.0);
    if (m == 0 && n == 1)
        return s / std::sqrt(2.0);
    return NAN;
}

} // namespace

TEST_CASE("reduced Wigner d")
{
    CHECK(wigner_d(1, 0, 0, 0.0) == doctest::Approx(1));
    CHECK(wigner_d(2, 0, 0, std::acos(1 / std::sqrt(3.0))) == doctest::Approx(0).epsilon(1e-14));
    CHECK(wigner_d(1, 1, 0, pi / 2) == doctest::Approx(-1 / std::sqrt(2.0)));
    for (double b : {0.0, 0.3, 1.1, 2.0, 3.0})
        for (auto [m, n] : {std::pair{0, 0}, {1, 1}, {1, -1}, {1, 0}, {0, 1}})
            CHECK(wigner_d(1, m, n, b) == doctest::Approx(closed_form_d1(m, n, b)).epsilon(1e-13));
    for (double b : {0.2, 1.4, 2.9})
        CHECK(wigner_d(2, 0, 0, b) == doctest::Approx(0.5 * (3 * std::cos(b) * std::cos(b) - 1)).epsilon(1e-13));
    // Unitarity of d^2 rows.
    for (int m = -2; m <= 2; ++m) {
        double s = 0;
        for (int n = -2; n <= 2; ++n)
            s += std::pow(wigner_d(2, m, n, 0.77), 2);
        CHECK(s == doctest::Approx(1).epsilon(1e-13));
    }
    CHECK_THROWS(wigner_d(1, 2, 0, 0.1));
}

TEST_CASE("SU2 to SO3 is a homomorphism")
{
    const SU2 a = su2_rotation(Vec3(1, 2, 3), 0.7), b = su2_rotation(Vec3(-1, 0, 2), 1.9);
    CHECK((so3_of(a * b) - so3_of(a) * so3_of(b)).norm() < 1e-13);
    CHECK((so3_of(a) * so3_of(a).transpose() - SO3::Identity()).norm() < 1e-13);
    // Rotation by angle about z maps x to (cos, sin).
    const SO3 R = so3_of(su2_rotation(Vec3::UnitZ(), 0.4));
    CHECK((R * Vec3::UnitX() - Vec3(std::cos(0.4), std::sin(0.4), 0)).norm() < 1e-13);
}

TEST_CASE("period propagator")
{
    const EffectiveFrame f = period_propagator(train(90, 0, 40e-6, 0));
    CHECK(f.omega_eff * f.period == doctest::Approx(pi / 2));
    CHECK(f.theta_eff == doctest::Approx(pi / 2));
    CHECK((f.axis - Vec3::UnitX()).norm() < 1e-12);

    const EffectiveFrame z = period_propagator(train(0, 10e-6, 40e-6, 3000));
    CHECK(z.theta_eff == doctest::Approx(0).epsilon(1e-12));
    CHECK(z.omega_eff == doctest::Approx(2 * pi * 3000));

    // Detuning beyond half the drive frequency folds back.
    const PulseSequence far = train(0, 10e-6, 40e-6, 15000);
    const EffectiveFrame ff = period_propagator(far);
    CHECK(ff.omega_eff <= ff.omega_d / 2 + 1e-9);
    CHECK(ff.omega_eff == doctest::Approx(std::abs(2 * pi * 15000 - ff.omega_d)).epsilon(1e-9));

    const EffectiveFrame iii = period_propagator(train(5, 38e-6 * 5 / 90, 40e-6, 5000));
    CHECK(iii.theta_eff < 15 * pi / 180);

    CHECK(period_propagator(train(0, 10e-6, 40e-6, 0)).degenerate);
}

TEST_CASE("micromotion is periodic")
{
    for (const auto& s : {train(90, 38e-6, 40e-6, 0), train(90, 38e-6, 40e-6, 2200), train(5, 2e-6, 40e-6, 5000),
                          train(0, 10e-6, 40e-6, 0)}) {
        const MicromotionPath p = micromotion(s, 512);
        const SO3 first = so3_of(p.P.front()), last = so3_of(p.P.back());
        CHECK((first - SO3::Identity()).norm() < 1e-10);
        CHECK((last - SO3::Identity()).norm() < 1e-10);
        double w = 0;
        for (double x : p.weight)
            w += x;
        CHECK(w == doctest::Approx(s.period()).epsilon(1e-12));
    }
    const MicromotionPath id = micromotion(train(0, 10e-6, 40e-6, 0), 64);
    for (const auto& P : id.P)
        CHECK((so3_of(P) - SO3::Identity()).norm() < 1e-14);
    CHECK_THROWS(micromotion(train(90, 38e-6, 40e-6, 0), 16));
}

TEST_CASE("kappa limits")
{
    CHECK(kappa(train(0, 10e-6, 40e-6, 0)) == doctest::Approx(1).epsilon(1e-12));
    // Continuous resonant drive: an ideal spin-lock along x.
    CHECK(kappa(train(90, 38e-6, 0, 0)) == doctest::Approx(-0.5).epsilon(1e-3));
    CHECK(std::abs(kappa(train(90, 38e-6, 0, 0)) + 0.5) < 1e-3);
}

TEST_CASE("kappa matches the P2 time average")
{
    for (const auto& s : {train(90, 38e-6, 40e-6, 0), train(90, 38e-6, 40e-6, 1700), train(90, 38e-6, 40e-6, 4100),
                          train(5, 38e-6 * 5 / 90, 40e-6, 5000), train(45, 20e-6, 30e-6, 800, 33)}) {
        const double k = kappa(s, 2048);
        CHECK(k == doctest::Approx(kappa_geometric(s, 2048)).epsilon(1e-9));
        CHECK(std::abs(k) <= 1 + 1e-12);
    }
}

TEST_CASE("kappa zero crossing for the 90 degree train")
{
    const auto s = train(90, 38e-6, 40e-6, 0);
    bool found = false;
    double prev = kappa(train(90, 38e-6, 40e-6, 1500));
    for (double hz = 1550; hz <= 3500; hz += 50) {
        const double k = kappa(train(90, 38e-6, 40e-6, hz));
        if (k * prev < 0)
            found = true;
        prev = k;
    }
    CHECK(found);
    (void)s;
}

TEST_CASE("quadrature convergence")
{
    const auto s = train(90, 38e-6, 40e-6, 1200);
    CHECK(kappa(s, 512) == doctest::Approx(kappa(s, 1024)).epsilon(1e-6));
    const auto a = fourier_coeffs(s, 1, 10, 1024), b = fourier_coeffs(s, 1, 10, 2048);
    for (std::size_t i = 0; i < a.size(); ++i)
        CHECK(std::abs(a[i] - b[i]) < 1e-6);
}

TEST_CASE("Fourier coefficients")
{
    const auto none = train(0, 10e-6, 40e-6, 0);
    for (const auto& c : fourier_coeffs(none, 1, 5, 256))
        CHECK(std::abs(c) < 1e-14);
    const auto c0 = fourier_coeffs(none, 0, 5, 256);
    for (int k = -5; k <= 5; ++k)
        CHECK(std::abs(c0[k + 5] - cplx(k == 0 ? 1 : 0, 0)) < 1e-8);

    const auto reg1 = train(90, 38e-6, 40e-6, 0);
    for (int q : {-1, 0, 1}) {
        const auto c = fourier_coeffs(reg1, q, 50, 4096);
        double s = 0;
        for (const auto& x : c)
            s += std::norm(x);
        CHECK(s <= 1 + 1e-6);
    }
    const auto c = fourier_coeffs(reg1, 1, 50, 4096);
    CHECK(std::abs(c[50 + 1]) + std::abs(c[50]) + std::abs(c[50 - 1]) > std::abs(c[50 + 20]) + std::abs(c[50 - 20]));
}

TEST_CASE("Parseval: the l = 1 weights sum to one over q")
{
    // sum_q |d^1_{q m}|^2 = 1 and the time average of |D^1_{m0}|^2 sums to 1 over m.
    const auto s = train(70, 25e-6, 40e-6, 900);
    double total = 0;
    for (int q : {-1, 0, 1})
        for (const auto& x : fourier_coeffs(s, q, 200, 4096))
            total += std::norm(x);
    CHECK(total == doctest::Approx(1).epsilon(1e-3));
}

TEST_CASE("phase shift leaves kappa and |c_k| unchanged")
{
    const auto a = train(90, 38e-6, 40e-6, 1300, 0), b = train(90, 38e-6, 40e-6, 1300, 57);
    CHECK(kappa(a) == doctest::Approx(kappa(b)).epsilon(1e-9));
    for (int q : {-1, 1}) {
        const auto ca = fourier_coeffs(a, q, 8, 2048), cb = fourier_coeffs(b, q, 8, 2048);
        for (std::size_t i = 0; i < ca.size(); ++i) {
            CHECK(std::abs(ca[i]) == doctest::Approx(std::abs(cb[i])).epsilon(1e-9));
            CHECK(std::abs(ca[i] - cb[i]) < 1e-9);
        }
    }
}

TEST_CASE("adding a full turn to an instantaneous pulse changes nothing")
{
    const auto a = train(90, 0, 40e-6, 700), b = train(450, 0, 40e-6, 700);
    const EffectiveFrame fa = period_propagator(a), fb = period_propagator(b);
    CHECK(fa.theta_eff == doctest::Approx(fb.theta_eff).epsilon(1e-12));
    CHECK(fa.phi_eff == doctest::Approx(fb.phi_eff).epsilon(1e-12));
    CHECK(kappa(a) == doctest::Approx(kappa(b)).epsilon(1e-12));
}

TEST_CASE("filter function")
{
    std::vector<cplx> delta(11, 0);
    delta[5] = 1;
    const auto comb = filter_function(delta, 1000);
    double w = 0;
    for (const auto& t : comb) {
        CHECK(t.weight >= 0);
        if (t.weight > 0)
            CHECK(t.omega == 0);
        w += t.weight;
    }
    CHECK(w == doctest::Approx(1));
    const FloquetParams fp = floquet_params(train(90, 38e-6, 40e-6, 0), 20, 2048);
    for (const auto& t : filter_function(fp.c_plus, fp.frame.omega_d))
        CHECK(t.weight >= 0);
}
