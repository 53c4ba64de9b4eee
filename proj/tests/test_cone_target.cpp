#include "doctest.h"

#include <cmath>
#include <random>

#include "cone_target.h"
#include "conventions.h"

using namespace conevortex;
using cd = std::complex<double>;

namespace {

ConePoint random_point(std::mt19937_64& rng, int n) {
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    while (true) {
        Cn z(n);
        double r = 0.0;
        for (auto& zk : z) {
            zk = {u(rng), u(rng)};
            r += std::norm(zk);
        }
        if (r > 1e-2) return ConePoint(std::move(z));
    }
}

// omega0(v, w) for the flat form sum dx_k ^ dy_k, arguments as C^n vectors.
double omega0(const Cn& v, const Cn& w) {
    double s = 0.0;
    for (std::size_t k = 0; k < v.size(); ++k)
        s += v[k].real() * w[k].imag() - v[k].imag() * w[k].real();
    return s;
}

Cn fundamental_field(const WeightedCircleAction& a, const Cn& z) {
    Cn out(z.size());
    for (std::size_t k = 0; k < z.size(); ++k)
        out[k] = cd(0.0, a.weights[k]) * z[k];
    return out;
}

}  // namespace

TEST_CASE("construction guards") {
    CHECK_THROWS_AS(WeightedCircleAction({}), std::invalid_argument);
    CHECK_THROWS_AS(WeightedCircleAction({1, 0}), std::invalid_argument);
    CHECK_THROWS_AS(ConePoint({cd(0.0, 0.0)}), std::invalid_argument);
    CHECK(WeightedCircleAction::reeb(3).is_reeb());
    CHECK_FALSE(WeightedCircleAction({1, 2}).is_reeb());
}

TEST_CASE("reeb field") {
    ConePoint p1({cd(1.0, 0.0)});
    Cn xi = reeb_field(p1);
    CHECK(std::abs(xi[0] - cd(0.0, -1.0)) < 1e-15);

    ConePoint p2({cd(0.0, 0.0), cd(2.0, 0.0)});
    xi = reeb_field(p2);
    CHECK(std::abs(xi[0]) < 1e-15);
    CHECK(std::abs(xi[1] - cd(0.0, -1.0)) < 1e-15);

    std::mt19937_64 rng(5);
    for (int trial = 0; trial < 50; ++trial) {
        ConePoint p = random_point(rng, 3);
        Cn s = p.sphere_point(), v = reeb_field(p);
        double re = 0.0;
        for (std::size_t k = 0; k < s.size(); ++k) re += (v[k] * std::conj(s[k])).real();
        CHECK(std::abs(re) < 1e-14);  // tangent to the sphere
    }
}

TEST_CASE("sasakian moment") {
    std::mt19937_64 rng(7);
    WeightedCircleAction reeb = WeightedCircleAction::reeb(4);
    for (int trial = 0; trial < 20; ++trial)
        CHECK(sasakian_moment(reeb, random_point(rng, 4)) == doctest::Approx(1.0).epsilon(1e-14));

    WeightedCircleAction a12({1, 2});
    CHECK(sasakian_moment(a12, ConePoint({cd(0.0, 0.0), cd(3.0, 0.0)})) == doctest::Approx(2.0));

    // scale invariance and the convex-combination bound
    WeightedCircleAction a({2, 5, 3});
    for (int trial = 0; trial < 20; ++trial) {
        ConePoint p = random_point(rng, 3);
        Cn z2 = p.z;
        for (auto& zk : z2) zk *= 2.0;
        const double g = sasakian_moment(a, p);
        CHECK(g == doctest::Approx(sasakian_moment(a, ConePoint(z2))).epsilon(1e-14));
        CHECK(g >= 2.0 - 1e-14);
        CHECK(g <= 5.0 + 1e-14);
    }
}

TEST_CASE("kahler potential") {
    CHECK(kahler_potential(ConePoint({cd(1.0, 0.0), cd(0.0, 0.0)})) == doctest::Approx(0.5));
    CHECK(kahler_potential(ConePoint({cd(3.0, 0.0), cd(4.0, 0.0)})) == doctest::Approx(12.5));
    ConePoint p({cd(0.3, -0.4), cd(1.1, 0.2)});
    Cn z3 = p.z;
    for (auto& zk : z3) zk *= 3.0;
    CHECK(kahler_potential(ConePoint(z3)) == doctest::Approx(9.0 * kahler_potential(p)));
}

TEST_CASE("cone moment values and degree-2 homogeneity") {
    WeightedCircleAction r2 = WeightedCircleAction::reeb(2);
    CHECK(cone_moment(r2, ConePoint({cd(1.0, 0.0), cd(0.0, 0.0)})) == doctest::Approx(0.5));
    CHECK(cone_moment(r2, ConePoint({cd(1.0, 0.0), cd(1.0, 0.0)})) == doctest::Approx(1.0));

    std::mt19937_64 rng(11);
    WeightedCircleAction a({1, 3});
    for (int trial = 0; trial < 20; ++trial) {
        ConePoint p = random_point(rng, 2);
        Cn doubled = p.z;
        for (auto& zk : doubled) zk *= 2.0;
        // lambda = 2 scales exactly in floating point
        CHECK(cone_moment(a, ConePoint(doubled)) == 4.0 * cone_moment(a, p));
    }
}

TEST_CASE("cone moment is invariant under its own circle action") {
    std::mt19937_64 rng(13);
    std::uniform_real_distribution<double> u(-kPi, kPi);
    WeightedCircleAction a({1, 2, -3});
    for (int trial = 0; trial < 30; ++trial) {
        ConePoint p = random_point(rng, 3);
        const double t = u(rng);
        Cn rot = p.z;
        for (std::size_t k = 0; k < rot.size(); ++k)
            rot[k] *= std::polar(1.0, a.weights[k] * t);
        CHECK(cone_moment(a, ConePoint(rot)) ==
              doctest::Approx(cone_moment(a, p)).epsilon(1e-14));
    }
}

TEST_CASE("defining identity d<mu,beta> = omega0(., K_beta) by central differences") {
    std::mt19937_64 rng(17);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    const double eps = 1e-4;
    for (int n : {1, 2, 3}) {
        WeightedCircleAction a = [&] {
            std::vector<int> w(static_cast<std::size_t>(n));
            for (auto& wk : w) {
                do { wk = static_cast<int>(std::lround(3.0 * u(rng))); } while (wk == 0);
            }
            return WeightedCircleAction(w);
        }();
        for (int trial = 0; trial < 30; ++trial) {
            ConePoint p = random_point(rng, n);
            Cn dir(static_cast<std::size_t>(n));
            for (auto& vk : dir) vk = {u(rng), u(rng)};
            Cn plus = p.z, minus = p.z;
            for (int k = 0; k < n; ++k) {
                plus[k] += eps * dir[k];
                minus[k] -= eps * dir[k];
            }
            const double fd =
                (cone_moment(a, ConePoint(plus)) - cone_moment(a, ConePoint(minus))) / (2.0 * eps);
            const double pairing = omega0(dir, fundamental_field(a, p.z));
            CHECK(std::abs(fd - pairing) < 1e-6);
        }
    }
}

TEST_CASE("complex gauge flow") {
    WeightedCircleAction r2 = WeightedCircleAction::reeb(2);
    ConePoint p({cd(0.4, 0.3), cd(-0.2, 0.9)});

    ConePoint fixed = complex_gauge_flow(r2, 0.0, p);
    for (std::size_t k = 0; k < p.z.size(); ++k) CHECK(fixed.z[k] == p.z[k]);

    const double ratio = cone_moment(r2, complex_gauge_flow(r2, 0.5, p)) / cone_moment(r2, p);
    CHECK(ratio == doctest::Approx(std::exp(1.0)).epsilon(1e-12));

    // weighted counterexample, oracle = direct evaluation of (1/2) sum w exp(2wf) |z|^2
    WeightedCircleAction a12({1, 2});
    ConePoint q({cd(1.0, 0.0), cd(1.0, 0.0)});
    const double mu_flow = cone_moment(a12, complex_gauge_flow(a12, 0.5, q));
    const double oracle = 0.5 * (1.0 * std::exp(1.0) * 1.0 + 2.0 * std::exp(2.0) * 1.0);
    CHECK(mu_flow == doctest::Approx(oracle).epsilon(1e-13));
    CHECK(mu_flow / cone_moment(a12, q) == doctest::Approx(oracle / 1.5));
    CHECK(oracle / 1.5 != doctest::Approx(std::exp(1.0)).epsilon(1e-2));
}

TEST_CASE("homogeneity check") {
    std::mt19937_64 rng(23);
    std::uniform_real_distribution<double> f_range(-3.0, 3.0);

    WeightedCircleAction reeb = WeightedCircleAction::reeb(3);
    std::vector<std::pair<double, ConePoint>> samples;
    for (int trial = 0; trial < 50; ++trial)
        samples.emplace_back(f_range(rng), random_point(rng, 3));
    HomogeneityReport rep = homogeneity_check(reeb, samples);
    CHECK(rep.pass);
    CHECK(rep.max_gap <= 1e-12);

    WeightedCircleAction a12({1, 2});
    std::vector<std::pair<double, ConePoint>> bad;
    bad.emplace_back(0.5, ConePoint({cd(1.0, 0.0), cd(1.0, 0.0)}));
    HomogeneityReport rep_bad = homogeneity_check(a12, bad);
    CHECK_FALSE(rep_bad.pass);
    CHECK(rep_bad.max_gap > 0.5);
    CHECK(rep_bad.to_json().find("FAIL") != std::string::npos);

    // f = 0 samples pass for any weights
    std::vector<std::pair<double, ConePoint>> zero_f;
    for (int trial = 0; trial < 10; ++trial) zero_f.emplace_back(0.0, random_point(rng, 2));
    CHECK(homogeneity_check(a12, zero_f).pass);
}
