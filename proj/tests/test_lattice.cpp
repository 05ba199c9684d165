#include "doctest.h"

#include "spinnet/constants.hpp"
#include "spinnet/lattice.hpp"
#include "spinnet/random.hpp"

#include <cmath>
#include <set>

using namespace spinnet;

TEST_CASE("diamond site counts")
{
    CHECK(build_diamond_sites(BoxGeometry::from_cells(1)).rows() == 8);
    CHECK(build_diamond_sites(BoxGeometry::from_cells(2)).rows() == 64);
    const auto s25 = build_diamond_sites(BoxGeometry::from_cells(25));
    CHECK(s25.rows() == 125000);
    CHECK(s25.minCoeff() >= 0);
    CHECK(s25.maxCoeff() < 25 * diamond_lattice_constant);
    BoxGeometry tiny{0.5 * diamond_lattice_constant, diamond_lattice_constant};
    CHECK_THROWS(build_diamond_sites(tiny));
}

TEST_CASE("diamond nearest-neighbour distance")
{
    const auto s = build_diamond_sites(BoxGeometry::from_cells(2));
    const double L = 2 * diamond_lattice_constant;
    double dmin = 1e9;
    for (Eigen::Index i = 0; i < s.rows(); ++i)
        for (Eigen::Index j = i + 1; j < s.rows(); ++j)
            dmin = std::min(dmin, min_image(s.row(i).transpose(), s.row(j).transpose(), L).norm());
    CHECK(dmin == doctest::Approx(diamond_lattice_constant * std::sqrt(3.0) / 4).epsilon(1e-12));
}

TEST_CASE("populate is deterministic and exclusive")
{
    const BoxGeometry box = BoxGeometry::from_cells(6);
    const auto sites = build_diamond_sites(box);
    const Concentrations c{0.2, 0.05};
    const auto a = populate(sites, box, c, 42), b = populate(sites, box, c, 42);
    CHECK(a.nuclei == b.nuclei);
    CHECK(a.electrons == b.electrons);
    std::set<std::tuple<double, double, double>> seen;
    for (const auto* P : {&a.nuclei, &a.electrons})
        for (Eigen::Index i = 0; i < P->rows(); ++i)
            CHECK(seen.insert({(*P)(i, 0), (*P)(i, 1), (*P)(i, 2)}).second);
    const auto e = populate(sites, box, {0, 0}, 3);
    CHECK(e.n_nuclei() == 0);
    CHECK(e.n_electrons() == 0);
}

TEST_CASE("nucleus placement does not depend on the electron concentration when no electron lands")
{
    const BoxGeometry box = BoxGeometry::from_cells(4);
    const auto sites = build_diamond_sites(box);
    const auto a = populate(sites, box, {0.1, 0}, 9);
    const auto b = populate(sites, box, {0.1, 1e-9}, 9);
    CHECK(b.n_electrons() == 0);
    CHECK(a.nuclei == b.nuclei);
}

TEST_CASE("binomial statistics of the nucleus count")
{
    // Independent oracle: mean N c_nuc (1 - c_el), variance per binomial.
    const BoxGeometry box = BoxGeometry::from_cells(25);
    const auto sites = build_diamond_sites(box);
    const double N = sites.rows(), c = 0.011, ce = 30e-6;
    const int seeds = 500;
    double sum = 0;
    for (int s = 0; s < seeds; ++s)
        sum += populate(sites, box, {c, ce}, derive_seed(77, s)).n_nuclei();
    const double mean = sum / seeds;
    const double p = c * (1 - ce);
    const double sigma_mean = std::sqrt(N * p * (1 - p) / seeds);
    CHECK(std::abs(mean - N * p) < 3 * sigma_mean);
}

TEST_CASE("frozen core")
{
    CHECK(electron_polarization(9.4, 100) == doctest::Approx(0.063).epsilon(0.02));
    CHECK(frozen_core_radius(4.5, 9.4, 100) == doctest::Approx(16.0).epsilon(0.5 / 16));
    CHECK(frozen_core_radius_from_polarization(4.5, 1.0) == doctest::Approx(32.2).epsilon(0.01));
    CHECK(frozen_core_radius(4.5, 9.4, 1e4) < frozen_core_radius(4.5, 9.4, 100));
    CHECK(frozen_core_radius_from_polarization(4.5, 1e-16) < 0.01);

    const BoxGeometry box = BoxGeometry::from_cells(12);
    const auto sites = build_diamond_sites(box);
    const auto real = populate(sites, box, {0.05, 2e-4}, 5);
    REQUIRE(real.n_electrons() > 0);
    CHECK(apply_frozen_core(real, 0).nuclei == real.nuclei);
    Eigen::Index prev = real.n_nuclei();
    for (double rc : {2.0, 5.0, 8.0, 12.0}) {
        const auto f = apply_frozen_core(real, rc);
        CHECK(f.n_nuclei() <= prev);
        prev = f.n_nuclei();
        for (Eigen::Index i = 0; i < f.n_nuclei(); ++i)
            for (Eigen::Index m = 0; m < f.n_electrons(); ++m)
                CHECK(min_image(f.nuclei.row(i).transpose(), f.electrons.row(m).transpose(), box.side_length).norm() >=
                      rc);
        CHECK(f.electrons == real.electrons);
    }
    CHECK(apply_frozen_core(real, box.side_length).n_nuclei() == 0);
    CHECK_THROWS(apply_frozen_core(real, -1));
}

TEST_CASE("frozen core at the default geometry removes about a tenth of the nuclei")
{
    const BoxGeometry box = BoxGeometry::from_cells(25);
    const auto sites = build_diamond_sites(box);
    const double rc = frozen_core_radius(4.5, 9.4, 100);
    double before = 0, after = 0;
    for (int s = 0; s < 20; ++s) {
        const auto r = populate(sites, box, {0.011, 30e-6}, derive_seed(3, s));
        before += r.n_nuclei();
        after += apply_frozen_core(r, rc).n_nuclei();
    }
    const double removed = 1 - after / before;
    CHECK(removed > 0.03);
    CHECK(removed < 0.2);
}

TEST_CASE("minimum image")
{
    CHECK(min_image(Vec3(1, 2, 3), Vec3(1, 2, 3), 10).norm() == 0);
    CHECK(std::abs(min_image(Vec3(9.5, 0, 0), Vec3(0.5, 0, 0), 10)[0]) == doctest::Approx(1.0));
    const Vec3 d = min_image(Vec3(1, 2, 3), Vec3(4, 6, 8), 10);
    // A component of exactly side/2 wraps to -side/2.
    CHECK(d.isApprox(Vec3(3, 4, -5)));
    CHECK(d.norm() == doctest::Approx(std::sqrt(50.0)));
    Rng rng(11);
    for (int k = 0; k < 200; ++k) {
        const Vec3 p(10 * rng.uniform(), 10 * rng.uniform(), 10 * rng.uniform());
        const Vec3 q(10 * rng.uniform(), 10 * rng.uniform(), 10 * rng.uniform());
        const Vec3 a = min_image(p, q, 10), b = min_image(q, p, 10);
        CHECK((a + b).norm() < 1e-12);
        CHECK(a.norm() <= 10 * std::sqrt(3.0) / 2 + 1e-12);
        const Vec3 shift(2.5, -7.5, 10.0);
        CHECK(min_image(p + shift, q + shift, 10).norm() == doctest::Approx(a.norm()));
    }
}

TEST_CASE("realization json")
{
    const BoxGeometry box = BoxGeometry::from_cells(2);
    const auto sites = build_diamond_sites(box);
    const auto r = populate(sites, box, {0.3, 0.1}, 8);
    const std::string j = realization_json(r);
    CHECK(j.find("\"nuclei\"") != std::string::npos);
    CHECK(j.find("\"side_length\"") != std::string::npos);
}

TEST_CASE("concentration validation")
{
    CHECK_THROWS(Concentrations{-0.1, 0}.validate());
    CHECK_THROWS(Concentrations{0.8, 0.5}.validate());
    CHECK_NOTHROW(Concentrations::from_ppm(0.011, 30).validate());
}
