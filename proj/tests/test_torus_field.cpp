#include "doctest.h"

#include <cmath>
#include <complex>

#include "torus_field.h"

using namespace conevortex;

TEST_CASE("grid validation") {
    CHECK_THROWS_AS(TorusGrid(7, 8), std::invalid_argument);
    CHECK_THROWS_AS(TorusGrid(8, 9), std::invalid_argument);
    CHECK_THROWS_AS(TorusGrid(6, 6), std::invalid_argument);
    CHECK_THROWS_AS(TorusGrid(8, 8, -1.0, 1.0), std::invalid_argument);
    TorusGrid g(16, 8, 2.0, 0.5);
    CHECK(g.vol() == doctest::Approx(1.0));
    CHECK(g.hx() == doctest::Approx(0.125));
}

TEST_CASE("integrate: constants and mean-zero modes") {
    TorusGrid g(32, 32);
    CHECK(integrate(RealField(g, 1.0)) == doctest::Approx(1.0).epsilon(1e-14));
    RealField c = RealField::sample(g, [](double x, double) { return std::cos(kTwoPi * x); });
    CHECK(std::abs(integrate(c)) < 1e-14);
}

TEST_CASE("integrate equals DFT DC coefficient times volume") {
    TorusGrid g(48, 32, 2.0, 1.5);
    RealField f = random_bandlimited(g, 5, 1234u);
    for (std::size_t i = 0; i < f.v.size(); ++i) f.v[i] += 0.731;
    // independent DC oracle: plain mean times volume
    double acc = 0.0;
    for (double x : f.v) acc += x;
    const double dc_times_vol = acc / static_cast<double>(g.size()) * g.vol();
    CHECK(integrate(f) == doctest::Approx(dc_times_vol).epsilon(1e-12));
}

TEST_CASE("laplacian: kernel, eigenmode, and positive sign") {
    TorusGrid g(32, 32);
    RealField c(g, 3.25);
    CHECK(sup_norm(laplacian(c)) < 1e-12);
    CHECK(sup_norm(laplacian(c, Backend::stencil)) < 1e-9);

    RealField f = RealField::sample(g, [](double x, double) { return std::cos(kTwoPi * x); });
    RealField lf = laplacian(f);
    const double want = 4.0 * kPi * kPi;  // plus sign certifies the convention
    for (int iy = 0; iy < g.ny; ++iy)
        for (int ix = 0; ix < g.nx; ++ix)
            CHECK(lf.at(ix, iy) ==
                  doctest::Approx(want * std::cos(kTwoPi * ix * g.hx())).epsilon(1e-11));
}

TEST_CASE("laplacian symbol on general periods") {
    TorusGrid g(32, 16, 2.0, 0.5);
    const int k = 3, m = 2;
    RealField f = RealField::sample(g, [&](double x, double y) {
        return std::sin(kTwoPi * (k * x / 2.0 + m * y / 0.5));
    });
    const double eig = 4.0 * kPi * kPi * (k * k / 4.0 + m * m / 0.25);
    RealField lf = laplacian(f);
    for (std::size_t i = 0; i < f.v.size(); ++i)
        CHECK(lf.v[i] == doctest::Approx(eig * f.v[i]).epsilon(1e-10));
}

TEST_CASE("stencil converges to spectral at second order") {
    auto err_at = [](int n) {
        TorusGrid g(n, n);
        RealField f = random_bandlimited(g, 4, 99u);
        return sup_distance(laplacian(f, Backend::stencil), laplacian(f, Backend::spectral));
    };
    const double e64 = err_at(64), e128 = err_at(128);
    const double slope = std::log2(e64 / e128);
    CHECK(slope >= 1.9);
}

TEST_CASE("poisson_solve: single mode, zero, roundtrip, mean check") {
    TorusGrid g(64, 64);
    RealField rhs = RealField::sample(
        g, [](double x, double) { return 4.0 * kPi * kPi * std::cos(kTwoPi * x); });
    RealField got = poisson_solve(rhs);
    for (int iy = 0; iy < g.ny; ++iy)
        for (int ix = 0; ix < g.nx; ++ix)
            CHECK(got.at(ix, iy) ==
                  doctest::Approx(std::cos(kTwoPi * ix * g.hx())).epsilon(1e-12));

    CHECK(sup_norm(poisson_solve(RealField(g, 0.0))) == 0.0);

    RealField r = random_bandlimited(g, 6, 7u);
    const double m = mean_value(r);
    for (double& x : r.v) x -= m;
    CHECK(sup_distance(laplacian(poisson_solve(r)), r) < 1e-10);

    CHECK_THROWS_AS(poisson_solve(RealField(g, 1.0)), NonZeroMean);
}

TEST_CASE("poisson then laplacian is identity minus mean") {
    TorusGrid g(32, 48);
    RealField f = random_bandlimited(g, 5, 55u);
    for (double& x : f.v) x += 0.37;
    RealField back = poisson_solve(laplacian(f));
    const double m = mean_value(f);
    for (std::size_t i = 0; i < f.v.size(); ++i)
        CHECK(back.v[i] == doctest::Approx(f.v[i] - m).epsilon(1e-12));
}

TEST_CASE("integrate of laplacian vanishes") {
    TorusGrid g(32, 32);
    RealField f = random_bandlimited(g, 8, 2024u, 3.0);
    CHECK(std::abs(integrate(laplacian(f))) < 1e-12);
    CHECK(std::abs(integrate(laplacian(f, Backend::stencil))) < 1e-10);
}

TEST_CASE("dbar and pdel basics") {
    TorusGrid g(64, 64);
    RealField f = RealField::sample(g, [](double x, double) { return std::sin(kTwoPi * x); });
    ComplexField d = dbar(f);
    for (int iy = 0; iy < g.ny; ++iy)
        for (int ix = 0; ix < g.nx; ++ix) {
            CHECK(d.at(ix, iy).real() ==
                  doctest::Approx(0.5 * kTwoPi * std::cos(kTwoPi * ix * g.hx())).epsilon(1e-11));
            CHECK(std::abs(d.at(ix, iy).imag()) < 1e-11);
        }
    CHECK(sup_norm(dbar(RealField(g, 2.5))) < 1e-13);
}

TEST_CASE("gradient reconstruction from dbar and pdel") {
    TorusGrid g(48, 48);
    RealField f = random_bandlimited(g, 6, 31u);
    ComplexField db = dbar(f), pd = pdel(f);
    RealField fx = deriv_x(f);
    for (std::size_t i = 0; i < f.v.size(); ++i) {
        const std::complex<double> sum = db.v[i] + pd.v[i];
        CHECK(std::abs(sum - std::complex<double>(fx.v[i], 0.0)) < 1e-12);
        CHECK(std::abs(2.0 * db.v[i].real() - fx.v[i]) < 1e-12);
    }
}

TEST_CASE("composition identity dbar(pdel f) = -lap f / 4") {
    TorusGrid g(64, 64);
    RealField f = random_bandlimited(g, 7, 42u, 2.0);
    ComplexField comp = dbar(pdel(f));
    RealField lf = laplacian(f);
    for (std::size_t i = 0; i < f.v.size(); ++i)
        CHECK(std::abs(comp.v[i] - std::complex<double>(-0.25 * lf.v[i], 0.0)) < 1e-10);
}

TEST_CASE("helmholtz_inverse inverts both discretizations") {
    TorusGrid g(32, 32);
    RealField f = random_bandlimited(g, 5, 11u);
    const double c = 2.7;
    for (Backend be : {Backend::spectral, Backend::stencil}) {
        RealField rhs = laplacian(f, be);
        for (std::size_t i = 0; i < rhs.v.size(); ++i) rhs.v[i] += c * f.v[i];
        CHECK(sup_distance(helmholtz_inverse(rhs, c, be), f) < 1e-11);
    }
}
