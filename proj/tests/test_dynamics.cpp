#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "hjreach/dynamics.hpp"

using namespace hjreach;

namespace {

constexpr double kPi = std::numbers::pi;

double brute_force_hamiltonian(const State4& z, const std::array<double, 4>& p,
                               const ControlBounds& b, int n) {
    double best = -1e300;
    for (int ia = 0; ia < n; ++ia) {
        const double a = b.a_min + (b.a_max - b.a_min) * ia / (n - 1);
        for (int iw = 0; iw < n; ++iw) {
            const double w = -b.w_max + 2.0 * b.w_max * iw / (n - 1);
            const State4 f = point_mass_rhs(z, {a, w});
            best = std::max(best, -(f.x * p[0] + f.y * p[1] + f.psi * p[2] + f.v * p[3]));
        }
    }
    return best;
}

}  // namespace

TEST_CASE("point_mass_rhs") {
    const State4 f1 = point_mass_rhs({0, 0, 0, 10}, {0, 0});
    CHECK(f1.x == doctest::Approx(10.0));
    CHECK(f1.y == doctest::Approx(0.0));
    CHECK(f1.psi == 0.0);
    CHECK(f1.v == 0.0);

    const State4 f2 = point_mass_rhs({0, 0, kPi / 2, 10}, {2, 0.1});
    CHECK(f2.x == doctest::Approx(0.0).epsilon(1e-12));
    CHECK(f2.y == doctest::Approx(10.0));
    CHECK(f2.psi == doctest::Approx(0.1));
    CHECK(f2.v == doctest::Approx(2.0));

    const State4 rest = point_mass_rhs({3, -4, 0.7, 0}, {0, 0});
    CHECK(rest.x == 0.0);
    CHECK(rest.y == 0.0);
    CHECK(rest.psi == 0.0);
    CHECK(rest.v == 0.0);
}

TEST_CASE("point_mass_rhs rotational symmetry") {
    std::mt19937 rng(3);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    for (int k = 0; k < 100; ++k) {
        const State4 z{10.0 * u(rng), 10.0 * u(rng), u(rng), 30.0 + 10.0 * u(rng)};
        const Control c{5.0 * u(rng), u(rng)};
        const double th = kPi * u(rng);
        const State4 f = point_mass_rhs(z, c);
        const State4 zr{std::cos(th) * z.x - std::sin(th) * z.y,
                        std::sin(th) * z.x + std::cos(th) * z.y, z.psi + th, z.v};
        const State4 fr = point_mass_rhs(zr, c);
        CHECK(fr.x == doctest::Approx(std::cos(th) * f.x - std::sin(th) * f.y).epsilon(1e-10));
        CHECK(fr.y == doctest::Approx(std::sin(th) * f.x + std::cos(th) * f.y).epsilon(1e-10));
        CHECK(fr.psi == doctest::Approx(f.psi));
        CHECK(fr.v == doctest::Approx(f.v));
    }
}

TEST_CASE("augmented_rhs appends a unit clock derivative") {
    const auto d = augmented_rhs({0, 0, 0, 0}, 0.7, {0, 0});
    CHECK(d == std::array<double, 5>{0, 0, 0, 0, 1});
    std::mt19937 rng(5);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    for (int k = 0; k < 20; ++k) {
        const State4 z{u(rng), u(rng), u(rng), 20.0 * (1.0 + u(rng))};
        const Control c{10.0 * u(rng), u(rng)};
        const auto dz = augmented_rhs(z, u(rng), c);
        const State4 f = point_mass_rhs(z, c);
        CHECK(dz[0] == f.x);
        CHECK(dz[1] == f.y);
        CHECK(dz[2] == f.psi);
        CHECK(dz[3] == f.v);
        CHECK(dz[4] == 1.0);  // independent of the control
    }
}

TEST_CASE("hamiltonian closed form") {
    const ControlBounds b;
    CHECK(hamiltonian({0, 0, 0, 10}, {1, 0, 0, 0}, b) == doctest::Approx(-10.0));
    CHECK(hamiltonian({0, 0, 0, 10}, {0, 0, 1, 0}, b) == doctest::Approx(1.0));
}

TEST_CASE("hamiltonian equals brute-force maximization and dominates every control") {
    const ControlBounds b;
    std::mt19937 rng(17);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    for (int k = 0; k < 500; ++k) {
        const State4 z{u(rng), u(rng), u(rng), 5.0 + 60.0 * std::abs(u(rng))};
        const std::array<double, 4> p{u(rng), u(rng), u(rng), u(rng)};
        const double h = hamiltonian(z, p, b);
        // The grid contains the box corners and H is affine in u, so the
        // brute-force maximum is attained exactly.
        CHECK(h == doctest::Approx(brute_force_hamiltonian(z, p, b, 101)).epsilon(1e-12));
        for (int s = 0; s < 50; ++s) {
            const Control c{b.a_min + (b.a_max - b.a_min) * std::abs(u(rng)), b.w_max * u(rng)};
            const State4 f = point_mass_rhs(z, c);
            CHECK(h >= -(f.x * p[0] + f.y * p[1] + f.psi * p[2] + f.v * p[3]) - 1e-12);
        }
    }
}

TEST_CASE("hamiltonian is positively homogeneous of degree 1 in p") {
    const ControlBounds b;
    std::mt19937 rng(23);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    for (int k = 0; k < 200; ++k) {
        const State4 z{0, 0, u(rng), 5.0 + 60.0 * std::abs(u(rng))};
        const std::array<double, 4> p{u(rng), u(rng), u(rng), u(rng)};
        const double c = 10.0 * std::abs(u(rng));
        const std::array<double, 4> cp{c * p[0], c * p[1], c * p[2], c * p[3]};
        CHECK(hamiltonian(z, cp, b) == doctest::Approx(c * hamiltonian(z, p, b)).epsilon(1e-10));
    }
}

TEST_CASE("capture_hamiltonian clamps at zero") {
    const ControlBounds b;
    // A state/costate pair with strongly negative H: drift along +x, costate +x.
    const State4 z{0, 0, 0, 10};
    CHECK(hamiltonian(z, {1, 0, 0, 0}, b) < 0.0);
    CHECK(capture_hamiltonian(z, {1, 0, 0, 0}, b) == 0.0);
    CHECK(capture_hamiltonian(z, {0, 0, 3, 0}, b) == doctest::Approx(3.0));

    std::mt19937 rng(29);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    for (int k = 0; k < 300; ++k) {
        const State4 zz{0, 0, u(rng), 5.0 + 60.0 * std::abs(u(rng))};
        const std::array<double, 4> p{u(rng), u(rng), u(rng), u(rng)};
        const double h = hamiltonian(zz, p, b);
        const double hc = capture_hamiltonian(zz, p, b);
        CHECK(hc >= 0.0);
        CHECK(hc == doctest::Approx(std::max(0.0, h)));
        // Brute force over a lambda grid times a control grid of -lambda f . p.
        double brute = -1e300;
        for (int il = 0; il <= 10; ++il)
            brute = std::max(brute, (il / 10.0) * hamiltonian(zz, p, b));
        CHECK(hc == doctest::Approx(std::max(brute, 0.0)).epsilon(1e-12));
    }
}

TEST_CASE("sup norms on the scenario domain") {
    const GridSpec g({{"x", -50, 10, 70}, {"y", -4, 4, 8}, {"psi", -1, 1, 20}, {"v", 5, 65, 6}});
    const ControlBounds b;
    const auto s = sup_norms_on_domain(g, b);
    CHECK(s[0] == doctest::Approx(65.0));                  // cos 0 = 1 attained
    CHECK(s[1] == doctest::Approx(65.0 * std::sin(1.0)));  // |sin| maximal at the endpoints
    CHECK(s[2] == doctest::Approx(1.0));
    CHECK(s[3] == doctest::Approx(10.0));
}

TEST_CASE("max_abs_cos / max_abs_sin handle interior critical points") {
    CHECK(max_abs_cos(-1.0, 1.0) == doctest::Approx(1.0));
    CHECK(max_abs_cos(1.0, 2.0) == doctest::Approx(std::abs(std::cos(1.0))));
    CHECK(max_abs_cos(3.0, 3.5) == doctest::Approx(1.0));  // pi inside
    CHECK(max_abs_sin(-1.0, 1.0) == doctest::Approx(std::sin(1.0)));
    CHECK(max_abs_sin(1.0, 2.0) == doctest::Approx(1.0));  // pi/2 inside
    CHECK(max_abs_sin(-0.2, 0.1) == doctest::Approx(std::sin(0.2)));
}
