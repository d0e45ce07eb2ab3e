#include <catch2/catch_amalgamated.hpp>

#include "elliptlab/integrand.hpp"

#include <cmath>

using namespace elliptlab;

namespace {

// central finite differences of eval, the derivative oracle
Integrand::Derivs fd_derivatives(const Integrand& I, Vec2 x, Vec2 z, double step = 1e-5) {
    Integrand::Derivs d;
    for (int i = 0; i < 2; ++i) {
        Vec2 e = Vec2::Zero();
        e[i] = step;
        d.grad[i] = (I.eval(x, z + e) - I.eval(x, z - e)) / (2 * step);
        for (int j = 0; j < 2; ++j) {
            Vec2 f = Vec2::Zero();
            f[j] = step;
            d.hess(i, j) = (I.eval(x, z + e + f) - I.eval(x, z + e - f) - I.eval(x, z - e + f) +
                            I.eval(x, z - e - f)) /
                           (4 * step * step);
        }
    }
    return d;
}

}  // namespace

TEST_CASE("eval closed forms") {
    SECTION("double phase with vanishing coefficient reduces to |z|^p") {
        auto I = Integrand::double_phase(2.0, 3.0, Coefficient::zero());
        CHECK(I.eval({0.3, 0.1}, {1, 0}) == 1.0);
    }
    SECTION("minimal surface at z = 0") {
        CHECK(Integrand::minimal_surface().eval({0, 0}, {0, 0}) == 1.0);
    }
    SECTION("zhikov cone coefficient arithmetic") {
        // a(0, 0.25) = 0.25^{-1.5} * 0.0625 = 0.5, so F = 2^{1.5} + 0.5 * 8
        auto I = Integrand::double_phase(1.5, 3.0, Coefficient::zhikov_cone(0.5), 4.0, 0.5);
        const double expect = std::pow(2.0, 1.5) + 0.5 * 8.0;
        CHECK(I.eval({0.0, 0.25}, {2, 0}) == Catch::Approx(expect).epsilon(1e-12));
        CHECK(expect == Catch::Approx(6.828427).epsilon(1e-6));
        // exactly zero on the p-zone
        CHECK(Coefficient::zhikov_cone(0.5)({0.25, 0.1}) == 0.0);
        CHECK(Coefficient::zhikov_cone(0.5)({0.25, 0.25}) == 0.0);
    }
}

TEST_CASE("derivatives") {
    SECTION("p-power p = 2, mu = 0 is quadratic") {
        auto I = Integrand::p_power(2.0, 0.0);
        const auto d = I.derivatives({0, 0}, {3, 4});
        CHECK(d.grad.x() == Catch::Approx(6.0));
        CHECK(d.grad.y() == Catch::Approx(8.0));
        CHECK((d.hess - 2.0 * Mat2::Identity()).norm() == Catch::Approx(0.0).margin(1e-14));
    }

    SECTION("minimal surface hessian eigenvalues at |z| = 1") {
        auto I = Integrand::minimal_surface();
        const EigenPair e = I.eigenvalues({0, 0}, {1, 0});
        CHECK(e.lambda_min == Catch::Approx(std::pow(2.0, -1.5)).epsilon(1e-12));
        CHECK(e.lambda_max == Catch::Approx(std::pow(2.0, -0.5)).epsilon(1e-12));
        CHECK(e.lambda_max / e.lambda_min == Catch::Approx(2.0).epsilon(1e-12));
    }

    SECTION("gradient and hessian match finite differences") {
        std::vector<Integrand> kinds = {
            Integrand::p_power(1.7, 0.3),
            Integrand::p_power(3.0, 0.0),
            Integrand::minimal_surface(),
            Integrand::double_phase(1.5, 3.0, Coefficient::zhikov_cone(0.5), 4.0, 0.5),
            Integrand::perturbed_double_phase(1.5, 3.0, 0.2, Coefficient::radial_power(0.5), 4.0, 0.5),
            Integrand::coefficient_times_G(2.0, 2.5, 0.5, Coefficient::constant(1.3), 2.0, 1.0),
        };
        for (const auto& I : kinds) {
            for (std::uint64_t i = 0; i < 24; ++i) {
                const Vec2 x = halton_disc_point(i, 0.9);
                const double ang = 2 * pi * halton(i, 5);
                const double mag = 0.2 + 2.5 * halton(i, 7);
                const Vec2 z{mag * std::cos(ang), mag * std::sin(ang)};
                const auto a = I.derivatives(x, z);
                const auto b = fd_derivatives(I, x, z);
                CHECK((a.grad - b.grad).norm() <= 1e-6 * std::max(1.0, b.grad.norm()));
                CHECK((a.hess - b.hess).norm() <= 1e-4 * std::max(1.0, b.hess.norm()));
                CHECK(a.hess(0, 1) == a.hess(1, 0));
            }
        }
    }

    SECTION("degeneracy point is refused") {
        auto I = Integrand::p_power(1.5, 0.0);
        CHECK_THROWS_AS(I.derivatives({0, 0}, {0, 0}), std::domain_error);
        // but p = 2 with mu = 0 stays regular at the origin
        CHECK_NOTHROW(Integrand::p_power(2.0, 0.0).derivatives({0, 0}, {0, 0}));
    }

    SECTION("midpoint convexity") {
        auto I = Integrand::double_phase(1.5, 3.0, Coefficient::zhikov_cone(0.5), 4.0, 0.5);
        Rng rng(3);
        for (int i = 0; i < 200; ++i) {
            const Vec2 x = halton_disc_point(std::uint64_t(i), 1.0);
            const Vec2 z1{rng.uniform(-3, 3), rng.uniform(-3, 3)};
            const Vec2 z2{rng.uniform(-3, 3), rng.uniform(-3, 3)};
            CHECK(I.eval(x, 0.5 * (z1 + z2)) <= 0.5 * (I.eval(x, z1) + I.eval(x, z2)) + 1e-10);
        }
    }
}

TEST_CASE("ellipticity ratios") {
    SECTION("minimal surface: ratio is |z|^2 + 1") {
        auto I = Integrand::minimal_surface();
        const Vec2 z{2.0 / std::sqrt(2.0), 2.0 / std::sqrt(2.0)};  // |z| = 2
        CHECK(ellipticity_ratio(I, {0, 0}, z) == Catch::Approx(5.0).epsilon(1e-10));
    }

    SECTION("p-power: ratio is max(p-1, 1/(p-1))") {
        auto I3 = Integrand::p_power(3.0, 0.0);
        CHECK(ellipticity_ratio(I3, {0, 0}, {0.7, -1.1}) == Catch::Approx(2.0).epsilon(1e-10));
        auto I15 = Integrand::p_power(1.5, 0.0);
        CHECK(ellipticity_ratio(I15, {0, 0}, {4.0, 0.3}) == Catch::Approx(2.0).epsilon(1e-10));
        // p = 2 is isotropic
        CHECK(ellipticity_ratio(Integrand::p_power(2.0, 0.0), {0, 0}, {1, 2}) ==
              Catch::Approx(1.0).epsilon(1e-12));
    }

    SECTION("double phase stays uniformly elliptic pointwise") {
        const double p = 2.0, q = 3.0;
        auto I = Integrand::double_phase(p, q, Coefficient::radial_power(0.5), 4.0, 0.5);
        const double cpq = std::max({p - 1.0, 1.0 / (p - 1.0), q - 1.0, 1.0 / (q - 1.0)});
        double worst = 1.0;
        for (std::uint64_t i = 0; i < 10000; ++i) {
            const Vec2 x = halton_disc_point(i, 1.0);
            const double mag = std::pow(10.0, -2.0 + 4.0 * halton(i, 5));
            const double ang = 2 * pi * halton(i, 7);
            const Vec2 z{mag * std::cos(ang), mag * std::sin(ang)};
            const double r = ellipticity_ratio(I, x, z);
            REQUIRE(r >= 1.0 - 1e-12);
            worst = std::max(worst, r);
        }
        CHECK(worst <= cpq + 1e-9);
    }

    SECTION("ratio growth bound across registered kinds") {
        std::vector<Integrand> kinds = {
            Integrand::p_power(2.5, 0.1, 2.0),
            Integrand::perturbed_double_phase(1.5, 3.0, 0.1, Coefficient::constant(0.7), 4.0, 0.5),
            Integrand::coefficient_times_G(2.0, 2.5, 0.2, Coefficient::constant(1.5), 2.0),
        };
        const double fixture = 25.0;
        for (const auto& I : kinds) {
            for (std::uint64_t i = 0; i < 2000; ++i) {
                const Vec2 x = halton_disc_point(i, 1.0);
                const double mag = std::pow(10.0, -1.0 + 3.0 * halton(i, 5));
                const Vec2 z{mag, 0.3 * mag};
                const double r = ellipticity_ratio(I, x, z);
                CHECK(r <= fixture * (std::pow(z.norm(), I.q - I.p) + 1.0));
            }
        }
    }
}

TEST_CASE("nonlocal ratio") {
    SECTION("autonomous integrands collapse to the pointwise ratio") {
        auto I = Integrand::p_power(3.0, 0.0);
        const std::vector<Vec2> pts = {{0.1, 0.2}, {-0.4, 0.0}, {0.3, -0.3}};
        const Vec2 z{1.0, 0.5};
        CHECK(nonlocal_ratio(I, pts, z) == Catch::Approx(ellipticity_ratio(I, pts[0], z)).epsilon(1e-12));
    }

    SECTION("radial-power double phase: ratio tracks 1 + r^alpha |z|^{q-p}") {
        const double p = 2.0, q = 3.0, alpha = 0.5;
        auto I = Integrand::double_phase(p, q, Coefficient::radial_power(alpha), 4.0, alpha);
        Mesh m = build_disc_mesh(16, 64);
        for (double r : {0.1, 0.3, 1.0}) {
            const DiscreteBall b = discrete_ball(m, {0, 0}, r);
            const auto pts = ball_sample_points(m, b);
            for (double zm : {1.0, 10.0, 100.0}) {
                const double got = nonlocal_ratio(I, pts, {zm, 0.0});
                const double model = 1.0 + std::pow(r, alpha) * std::pow(zm, q - p);
                CHECK(got <= 4.0 * model);
                CHECK(got >= model / 4.0);
            }
        }
    }

    SECTION("zhikov coefficient: ratio diverges with |z| over mixed balls") {
        auto I = Integrand::double_phase(1.5, 3.0, Coefficient::zhikov_cone(0.5), 4.0, 0.5);
        Mesh m = build_disc_mesh(8, 32);
        const DiscreteBall b = discrete_ball(m, {0, 0}, 0.8);  // contains both zones
        const auto pts = ball_sample_points(m, b);
        double prev = 0.0;
        for (double zm : {1.0, 4.0, 16.0, 64.0, 256.0}) {
            const double r = nonlocal_ratio(I, pts, {zm, 0.0});
            CHECK(r > prev);
            prev = r;
        }
        CHECK(prev > 100.0);
    }
}

TEST_CASE("structural exponent") {
    CHECK(structural_exponent_s(2, 2.0, 2.0) == 1.0);
    CHECK(structural_exponent_s(4, 2.0, 2.5) == Catch::Approx(2.0).epsilon(1e-14));
    CHECK(structural_exponent_s(3, 2.0, 2.0) == 1.0);
    CHECK(structural_exponent_s(3, 2.0, 2.4, 1e-3) ==
          Catch::Approx(1.001 * 2.4 / (4.0 - 2.4)).epsilon(1e-12));
    CHECK(structural_exponent_s(2, 2.0, 2.5) == Catch::Approx(2.0 * 2.5 / (6.0 - 2.5)).epsilon(1e-14));

    SECTION("hypothesis violations are rejected by name") {
        CHECK_THROWS_WITH(structural_exponent_s(2, 2.0, 6.001),
                          Catch::Matchers::ContainsSubstring("q/p < 1 + 2/(n-1)"));
        CHECK_THROWS_AS(structural_exponent_s(4, 2.0, 3.4), std::invalid_argument);
    }

    SECTION("monotone in p and q on a grid") {
        for (double p : {1.8, 2.0, 2.2, 2.6}) {
            double prev = 0.0;
            for (double q : {p, p * 1.05, p * 1.1, p * 1.2}) {
                const double s = structural_exponent_s(2, p, q);
                CHECK(s >= prev - 1e-12);
                CHECK(s >= 1.0 - 1e-12);
                prev = s;
            }
        }
        for (double q : {2.4, 2.6}) {
            double prev = infinity_marker();
            for (double p : {2.0, 2.2, 2.4}) {
                if (!(q >= p)) continue;
                const double s = structural_exponent_s(4, p, q);
                CHECK(s <= prev + 1e-12);
                prev = s;
            }
        }
    }
}

TEST_CASE("assumption audit") {
    SECTION("model density p = q = 2, mu = 1 has nonnegative margins") {
        auto I = Integrand::p_power(2.0, 1.0, 1.0);
        const AuditReport r = assumption_audit(I, 500);
        CHECK(r.growth_lower >= -1e-12);
        CHECK(r.growth_upper >= -1e-12);
        CHECK(r.hessian_lower >= -1e-12);
        CHECK(r.hessian_upper >= -1e-12);
        CHECK(r.holder_margin >= -1e-12);
        CHECK(r.flag_pq_alpha);
        CHECK(r.flag_pq_dimension);
    }

    SECTION("counterexample regime flags q/p >= 1 + alpha/n") {
        auto I = Integrand::double_phase(1.5, 3.0, Coefficient::zhikov_cone(0.5), 4.0, 0.5);
        const AuditReport r = assumption_audit(I, 200);
        CHECK_FALSE(r.flag_pq_alpha);  // 2 > 1.25
    }

    SECTION("perturbed double phase with bounded coefficient: growth holds with L = 1 + sup a") {
        const double sup_a = 0.8;
        auto I = Integrand::perturbed_double_phase(1.5, 3.0, 1.0, Coefficient::constant(sup_a),
                                                   1.0 + sup_a, 0.5);
        const AuditReport r = assumption_audit(I, 400);
        CHECK(r.growth_lower >= -1e-12);
        CHECK(r.growth_upper >= -1e-12);
    }
}
